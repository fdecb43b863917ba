//! Stochastic first-order solvers on manifolds: Riemannian SGD with optional
//! momentum, constrained RMSProp, and Riemannian Adam/AMSGrad. Dense and
//! sparse row updates, plus bit-exact state serialization.

use crate::array::Array;
use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Rsgd,
    CRmsprop,
    RAdam,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Rsgd => "rsgd",
            Algorithm::CRmsprop => "crmsprop",
            Algorithm::RAdam => "radam",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "rsgd" => Some(Algorithm::Rsgd),
            "crmsprop" => Some(Algorithm::CRmsprop),
            "radam" => Some(Algorithm::RAdam),
            _ => None,
        }
    }
}

/// Hyperparameters. `use_exp` / `use_exact_transport` select the exact maps
/// where a manifold provides them; otherwise the first-order retraction and
/// vector transport are used.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub learning_rate: f64,
    pub momentum: f64,
    pub rho: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub amsgrad: bool,
    pub epsilon: f64,
    pub use_exact_transport: bool,
    pub use_exp: bool,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            learning_rate: 1e-3,
            momentum: 0.0,
            rho: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            amsgrad: false,
            epsilon: 1e-8,
            use_exact_transport: true,
            use_exp: true,
        }
    }

    pub fn rsgd(lr: f64) -> Self {
        Self {
            learning_rate: lr,
            ..Self::new(Algorithm::Rsgd)
        }
    }

    pub fn crmsprop(lr: f64) -> Self {
        Self {
            learning_rate: lr,
            ..Self::new(Algorithm::CRmsprop)
        }
    }

    pub fn radam(lr: f64) -> Self {
        Self {
            learning_rate: lr,
            ..Self::new(Algorithm::RAdam)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64, name: &str| -> Result<()> {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {v}")));
            }
            Ok(())
        };
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        unit(self.momentum, "momentum")?;
        unit(self.rho, "rho")?;
        unit(self.beta1, "beta1")?;
        unit(self.beta2, "beta2")?;
        Ok(())
    }
}

/// Whether an incoming gradient is an ambient Euclidean gradient (converted
/// through egrad2rgrad) or already Riemannian (consumed as-is).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradKind {
    Euclidean,
    Riemannian,
}

/// A named, manifold-constrained parameter. Leading axes of `values` batch
/// independent points.
#[derive(Debug, Clone)]
pub struct ParameterBinding {
    pub name: String,
    pub manifold: Manifold,
    pub values: Array,
}

impl ParameterBinding {
    pub fn new(name: impl Into<String>, manifold: Manifold, values: Array) -> Result<Self> {
        if !manifold.check_point(&values, 1e-8)? {
            return Err(Error::Config(
                "binding values fail the manifold membership check".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            manifold,
            values,
        })
    }

    /// Unconstrained parameters live on the Euclidean manifold.
    pub fn euclidean(name: impl Into<String>, values: Array) -> Result<Self> {
        let m = Manifold::euclidean(values.shape().to_vec())?;
        Self::new(name, m, values)
    }

    fn batch_rows(&self) -> Result<(usize, usize)> {
        let l = crate::array::batch_layout(self.values.shape(), &self.manifold.point_shape())?;
        Ok((l.rows, l.point_len))
    }
}

#[derive(Debug, Clone, Default)]
struct Slots {
    steps: u64,
    m: Option<Array>,
    v: Option<Array>,
    vhat: Option<Array>,
    prev: Option<Array>,
}

/// Mutable solver state: global step counter plus per-parameter slot arrays.
/// Single-writer: apply_* calls on one state must be externally serialized.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    pub t: u64,
    slots: Vec<Slots>,
}

fn batch_shape_of(b: &ParameterBinding) -> Result<Vec<usize>> {
    Ok(
        crate::array::batch_layout(b.values.shape(), &b.manifold.point_shape())?
            .batch_shape,
    )
}

/// Allocate zeroed slots for each binding. Momentum buffers are only
/// allocated when the algorithm uses them.
pub fn init(config: OptimizerConfig, bindings: &[ParameterBinding]) -> Result<OptimizerState> {
    config.validate()?;
    let mut slots = Vec::with_capacity(bindings.len());
    for b in bindings {
        if !b.manifold.check_point(&b.values, 1e-8)? {
            return Err(Error::Config(format!(
                "binding '{}' fails the membership check",
                b.name
            )));
        }
        let mut s = Slots::default();
        match config.algorithm {
            Algorithm::Rsgd => {
                if config.momentum > 0.0 {
                    s.m = Some(Array::zeros(b.values.shape().to_vec()));
                }
            }
            Algorithm::CRmsprop => {
                s.v = Some(Array::zeros(b.values.shape().to_vec()));
                s.prev = Some(b.values.clone());
            }
            Algorithm::RAdam => {
                s.m = Some(Array::zeros(b.values.shape().to_vec()));
                s.v = Some(Array::zeros(batch_shape_of(b)?));
                if config.amsgrad {
                    s.vhat = Some(Array::zeros(batch_shape_of(b)?));
                }
            }
        }
        slots.push(s);
    }
    Ok(OptimizerState {
        config,
        t: 0,
        slots,
    })
}

fn step_map(m: &Manifold, use_exp: bool, x: &Array, u: &Array) -> Result<Array> {
    if use_exp && m.has_exact_ops() {
        m.exp(x, u)
    } else {
        m.retr(x, u)
    }
}

fn transport(
    m: &Manifold,
    use_exact: bool,
    x: &Array,
    y: &Array,
    v: &Array,
) -> Result<Array> {
    if use_exact && m.has_exact_ops() {
        m.ptransp(x, y, v)
    } else {
        m.transp(x, y, v)
    }
}

/// Divide each batch row of `a` by the matching entry of `per_row` (a
/// batch-shaped scalar array), elementwise within the row.
fn div_rows(a: &Array, per_row: &Array, rows: usize, plen: usize) -> Array {
    let mut out = a.clone();
    for r in 0..rows {
        let d = per_row.data()[r];
        for v in &mut out.data_mut()[r * plen..(r + 1) * plen] {
            *v /= d;
        }
    }
    out
}

fn riemannian_grad(b: &ParameterBinding, g: &Array, kind: GradKind) -> Result<Array> {
    match kind {
        GradKind::Euclidean => b.manifold.egrad2rgrad(&b.values, g),
        GradKind::Riemannian => Ok(g.clone()),
    }
}

/// One dense step on binding `index`. The gradient must be shaped like the
/// binding's values.
pub fn apply_dense(
    state: &mut OptimizerState,
    index: usize,
    binding: &mut ParameterBinding,
    grad: &Array,
    kind: GradKind,
) -> Result<()> {
    if index >= state.slots.len() {
        return Err(Error::Index(format!(
            "binding index {index} out of range ({} slots)",
            state.slots.len()
        )));
    }
    if grad.shape() != binding.values.shape() {
        return Err(Error::Shape(format!(
            "gradient shape {:?} does not match parameter shape {:?}",
            grad.shape(),
            binding.values.shape()
        )));
    }
    if !grad.all_finite() {
        return Err(Error::NonFiniteGradient);
    }
    let cfg = state.config.clone();
    let man = binding.manifold.clone();
    let x = binding.values.clone();
    let (rows, plen) = binding.batch_rows()?;
    let alpha = cfg.learning_rate;
    let slot = &mut state.slots[index];
    slot.steps += 1;
    state.t += 1;

    match cfg.algorithm {
        Algorithm::Rsgd => {
            let r = riemannian_grad(binding, grad, kind)?;
            if cfg.momentum > 0.0 {
                let b = slot.m.as_ref().expect("momentum slot");
                let b_new = b.scale(cfg.momentum).add(&r)?;
                let x_new = step_map(&man, cfg.use_exp, &x, &b_new.scale(-alpha))?;
                slot.m = Some(transport(
                    &man,
                    cfg.use_exact_transport,
                    &x,
                    &x_new,
                    &b_new,
                )?);
                binding.values = x_new;
            } else {
                binding.values = step_map(&man, cfg.use_exp, &x, &r.scale(-alpha))?;
            }
        }
        Algorithm::CRmsprop => {
            let r = riemannian_grad(binding, grad, kind)?;
            let prev = slot.prev.take().expect("previous-point slot");
            let acc = slot.v.take().expect("second-moment slot");
            // accumulator ridden along the step path, squared gradient
            // projected to the current tangent space
            let carried = transport(&man, cfg.use_exact_transport, &prev, &x, &acc)?;
            let sq = man.proju(&x, &grad.zip_map(grad, |a, b| a * b)?)?;
            let acc = carried.scale(cfg.rho).add(&sq.scale(1.0 - cfg.rho))?;
            // transported squares can dip below zero on curved spaces; clamp
            // before the root
            let denom = acc.map(|v| v.max(0.0).sqrt() + cfg.epsilon);
            let dir = man.proju(&x, &r.zip_map(&denom, |a, b| a / b)?)?;
            let x_new = step_map(&man, cfg.use_exp, &x, &dir.scale(-alpha))?;
            slot.v = Some(acc);
            slot.prev = Some(x.clone());
            binding.values = x_new;
        }
        Algorithm::RAdam => {
            let r = riemannian_grad(binding, grad, kind)?;
            let m_old = slot.m.take().expect("first-moment slot");
            let v_old = slot.v.take().expect("second-moment slot");
            let m_new = m_old.scale(cfg.beta1).add(&r.scale(1.0 - cfg.beta1))?;
            let rr = man.inner(&x, &r, &r)?;
            let v_new = v_old.scale(cfg.beta2).add(&rr.scale(1.0 - cfg.beta2))?;
            let t = slot.steps as i32;
            let mhat = m_new.scale(1.0 / (1.0 - cfg.beta1.powi(t)));
            let mut vcorr = v_new.scale(1.0 / (1.0 - cfg.beta2.powi(t)));
            if cfg.amsgrad {
                let vh = slot.vhat.take().expect("amsgrad slot");
                vcorr = vh.zip_map(&vcorr, f64::max)?;
                slot.vhat = Some(vcorr.clone());
            }
            let denom = vcorr.map(|v| v.max(0.0).sqrt() + cfg.epsilon);
            let dir = div_rows(&mhat, &denom, rows, plen);
            let x_new = step_map(&man, cfg.use_exp, &x, &dir.scale(-alpha))?;
            slot.m = Some(transport(
                &man,
                cfg.use_exact_transport,
                &x,
                &x_new,
                &m_new,
            )?);
            slot.v = Some(v_new);
            binding.values = x_new;
        }
    }
    Ok(())
}

/// Sparse step: `row_grads` holds one gradient row per entry of `rows`
/// (indices into the flattened leading batch axes). Equivalent to a dense
/// step with the remaining rows zero-filled, including accumulator decay on
/// untouched rows.
pub fn apply_sparse(
    state: &mut OptimizerState,
    index: usize,
    binding: &mut ParameterBinding,
    rows: &[usize],
    row_grads: &Array,
    kind: GradKind,
) -> Result<()> {
    let (n_rows, plen) = binding.batch_rows()?;
    let mut seen = vec![false; n_rows];
    for &r in rows {
        if r >= n_rows {
            return Err(Error::Index(format!(
                "row index {r} out of range for {n_rows} rows"
            )));
        }
        if seen[r] {
            return Err(Error::Index(format!("duplicate row index {r}")));
        }
        seen[r] = true;
    }
    if row_grads.len() != rows.len() * plen {
        return Err(Error::Shape(format!(
            "row gradients hold {} values, expected {} rows x {} coords",
            row_grads.len(),
            rows.len(),
            plen
        )));
    }
    if !row_grads.all_finite() {
        return Err(Error::NonFiniteGradient);
    }
    let mut dense = Array::zeros(binding.values.shape().to_vec());
    for (k, &r) in rows.iter().enumerate() {
        dense.data_mut()[r * plen..(r + 1) * plen]
            .copy_from_slice(&row_grads.data()[k * plen..(k + 1) * plen]);
    }
    apply_dense(state, index, binding, &dense, kind)
}

// --- serialization -------------------------------------------------------
//
// Layout: magic "RMOP" | version byte 1 | u32 LE header length | UTF-8 JSON
// header | contiguous little-endian f64 payload. Floating hyperparameters
// are stored as hexadecimal bit patterns so the roundtrip is bitwise.

const MAGIC: &[u8; 4] = b"RMOP";
const VERSION: u8 = 1;

#[derive(Serialize, Deserialize)]
struct HeaderEntry {
    index: usize,
    slot: String,
    name: String,
    dtype: String,
    shape: Vec<usize>,
    offset: usize,
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    algorithm: String,
    learning_rate: String,
    momentum: String,
    rho: String,
    beta1: String,
    beta2: String,
    epsilon: String,
    amsgrad: bool,
    use_exact_transport: bool,
    use_exp: bool,
    t: u64,
    slot_steps: Vec<u64>,
    entries: Vec<HeaderEntry>,
}

fn f64_to_hex(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

fn f64_from_hex(s: &str) -> Result<f64> {
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| Error::CorruptCheckpoint(format!("bad float field '{s}'")))
}

/// Serialize solver state and parameter values to checkpoint bytes.
pub fn save(state: &OptimizerState, bindings: &[ParameterBinding]) -> Result<Vec<u8>> {
    if bindings.len() != state.slots.len() {
        return Err(Error::Config(format!(
            "{} bindings but {} state slots",
            bindings.len(),
            state.slots.len()
        )));
    }
    let cfg = &state.config;
    let mut entries = Vec::new();
    let mut payload: Vec<f64> = Vec::new();
    let push = |entries: &mut Vec<HeaderEntry>,
                    payload: &mut Vec<f64>,
                    index: usize,
                    slot: &str,
                    name: &str,
                    a: &Array| {
        entries.push(HeaderEntry {
            index,
            slot: slot.into(),
            name: name.into(),
            dtype: "f64".into(),
            shape: a.shape().to_vec(),
            offset: payload.len(),
            len: a.len(),
        });
        payload.extend_from_slice(a.data());
    };
    for (i, (b, s)) in bindings.iter().zip(&state.slots).enumerate() {
        push(&mut entries, &mut payload, i, "values", &b.name, &b.values);
        if let Some(a) = &s.m {
            push(&mut entries, &mut payload, i, "m", &b.name, a);
        }
        if let Some(a) = &s.v {
            push(&mut entries, &mut payload, i, "v", &b.name, a);
        }
        if let Some(a) = &s.vhat {
            push(&mut entries, &mut payload, i, "vhat", &b.name, a);
        }
        if let Some(a) = &s.prev {
            push(&mut entries, &mut payload, i, "prev", &b.name, a);
        }
    }
    let header = Header {
        algorithm: cfg.algorithm.name().into(),
        learning_rate: f64_to_hex(cfg.learning_rate),
        momentum: f64_to_hex(cfg.momentum),
        rho: f64_to_hex(cfg.rho),
        beta1: f64_to_hex(cfg.beta1),
        beta2: f64_to_hex(cfg.beta2),
        epsilon: f64_to_hex(cfg.epsilon),
        amsgrad: cfg.amsgrad,
        use_exact_transport: cfg.use_exact_transport,
        use_exp: cfg.use_exp,
        t: state.t,
        slot_steps: state.slots.iter().map(|s| s.steps).collect(),
        entries,
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::with_capacity(9 + header_json.len() + payload.len() * 8);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    for v in payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Parse checkpoint bytes back into solver state and named parameter value
/// arrays (ordered by binding index). Manifold descriptors are not stored;
/// the caller re-binds them.
pub fn load(bytes: &[u8]) -> Result<(OptimizerState, Vec<(String, Array)>)> {
    if bytes.len() < 9 {
        return Err(Error::CorruptCheckpoint("file shorter than header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::CorruptCheckpoint("bad magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::CorruptCheckpoint(format!(
            "unsupported version {} (expected {})",
            bytes[4], VERSION
        )));
    }
    let hlen = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    if bytes.len() < 9 + hlen {
        return Err(Error::CorruptCheckpoint("truncated header".into()));
    }
    let header: Header = serde_json::from_slice(&bytes[9..9 + hlen])
        .map_err(|e| Error::CorruptCheckpoint(format!("bad header: {e}")))?;
    let body = &bytes[9 + hlen..];
    if body.len() % 8 != 0 {
        return Err(Error::CorruptCheckpoint("payload is not whole f64s".into()));
    }
    let payload: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let algorithm = Algorithm::from_name(&header.algorithm).ok_or_else(|| {
        Error::CorruptCheckpoint(format!("unknown algorithm '{}'", header.algorithm))
    })?;
    let config = OptimizerConfig {
        algorithm,
        learning_rate: f64_from_hex(&header.learning_rate)?,
        momentum: f64_from_hex(&header.momentum)?,
        rho: f64_from_hex(&header.rho)?,
        beta1: f64_from_hex(&header.beta1)?,
        beta2: f64_from_hex(&header.beta2)?,
        epsilon: f64_from_hex(&header.epsilon)?,
        amsgrad: header.amsgrad,
        use_exact_transport: header.use_exact_transport,
        use_exp: header.use_exp,
    };

    let n = header.slot_steps.len();
    let mut slots: Vec<Slots> = (0..n).map(|_| Slots::default()).collect();
    for (s, &st) in slots.iter_mut().zip(&header.slot_steps) {
        s.steps = st;
    }
    let mut values: Vec<Option<(String, Array)>> = vec![None; n];
    for e in &header.entries {
        if e.index >= n {
            return Err(Error::CorruptCheckpoint(format!(
                "entry index {} out of range",
                e.index
            )));
        }
        let end = e.offset.checked_add(e.len).ok_or_else(|| {
            Error::CorruptCheckpoint("entry range overflow".into())
        })?;
        if end > payload.len() {
            return Err(Error::CorruptCheckpoint("truncated payload".into()));
        }
        let a = Array::new(e.shape.clone(), payload[e.offset..end].to_vec())
            .map_err(|_| Error::CorruptCheckpoint("entry shape mismatch".into()))?;
        let slot = &mut slots[e.index];
        match e.slot.as_str() {
            "values" => values[e.index] = Some((e.name.clone(), a)),
            "m" => slot.m = Some(a),
            "v" => slot.v = Some(a),
            "vhat" => slot.vhat = Some(a),
            "prev" => slot.prev = Some(a),
            other => {
                return Err(Error::CorruptCheckpoint(format!(
                    "unknown slot kind '{other}'"
                )))
            }
        }
    }
    let values: Vec<(String, Array)> = values
        .into_iter()
        .map(|v| v.ok_or_else(|| Error::CorruptCheckpoint("missing values entry".into())))
        .collect::<Result<_>>()?;
    Ok((
        OptimizerState {
            config,
            t: header.t,
            slots,
        },
        values,
    ))
}

impl OptimizerState {
    /// Bitwise equality of step counters and every slot array; used by
    /// roundtrip tests.
    pub fn bitwise_eq(&self, other: &OptimizerState) -> bool {
        fn arr_eq(a: &Option<Array>, b: &Option<Array>) -> bool {
            match (a, b) {
                (None, None) => true,
                (Some(a), Some(b)) => {
                    a.shape() == b.shape()
                        && a.data()
                            .iter()
                            .zip(b.data())
                            .all(|(x, y)| x.to_bits() == y.to_bits())
                }
                _ => false,
            }
        }
        self.t == other.t
            && self.slots.len() == other.slots.len()
            && self.slots.iter().zip(&other.slots).all(|(a, b)| {
                a.steps == b.steps
                    && arr_eq(&a.m, &b.m)
                    && arr_eq(&a.v, &b.v)
                    && arr_eq(&a.vhat, &b.vhat)
                    && arr_eq(&a.prev, &b.prev)
            })
    }
}
