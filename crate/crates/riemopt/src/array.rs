//! Dense real arrays with a trailing "point" axis block and leading batch axes.

use crate::error::{Error, Result};

/// A dense, row-major real array. Trailing axes are manifold coordinates,
/// leading axes form an independent batch of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Array {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "shape {:?} requires {} elements, got {}",
                shape,
                n,
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn scalar(v: f64) -> Self {
        Self {
            shape: vec![],
            data: vec![v],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn reshaped(mut self, shape: Vec<usize>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(Error::Shape(format!(
                "cannot reshape {} elements into {:?}",
                self.data.len(),
                shape
            )));
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Array {
        Array {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Array, f: impl Fn(f64, f64) -> f64) -> Result<Array> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "elementwise op on {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Array {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Array) -> Result<Array> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Array) -> Result<Array> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Array {
        self.map(|v| v * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Round every entry through IEEE-754 single precision.
    pub fn quantize_single(&mut self) {
        for v in &mut self.data {
            *v = *v as f32 as f64;
        }
    }
}

/// Layout of a batched operand: leading batch axes over a fixed point size.
#[derive(Debug, Clone)]
pub struct BatchLayout {
    pub batch_shape: Vec<usize>,
    pub rows: usize,
    pub point_len: usize,
}

/// Split `shape` into batch axes and the expected trailing point shape.
pub fn batch_layout(shape: &[usize], point_shape: &[usize]) -> Result<BatchLayout> {
    if shape.len() < point_shape.len() || &shape[shape.len() - point_shape.len()..] != point_shape {
        return Err(Error::Shape(format!(
            "array shape {:?} does not end with point shape {:?}",
            shape, point_shape
        )));
    }
    let batch_shape = shape[..shape.len() - point_shape.len()].to_vec();
    let rows = batch_shape.iter().product();
    Ok(BatchLayout {
        batch_shape,
        rows,
        point_len: point_shape.iter().product(),
    })
}

/// Pairwise broadcast: batch shapes must match, or one side is unbatched.
pub fn broadcast_batches(a: &BatchLayout, b: &BatchLayout) -> Result<(Vec<usize>, usize)> {
    if a.batch_shape == b.batch_shape {
        Ok((a.batch_shape.clone(), a.rows))
    } else if a.batch_shape.is_empty() {
        Ok((b.batch_shape.clone(), b.rows))
    } else if b.batch_shape.is_empty() {
        Ok((a.batch_shape.clone(), a.rows))
    } else {
        Err(Error::Shape(format!(
            "incompatible batch shapes {:?} vs {:?}",
            a.batch_shape, b.batch_shape
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(Array::new(vec![2, 3], vec![0.0; 6]).is_ok());
        assert!(Array::new(vec![2, 3], vec![0.0; 5]).is_err());
    }

    #[test]
    fn layout_split() {
        let l = batch_layout(&[4, 3, 3], &[3, 3]).unwrap();
        assert_eq!(l.batch_shape, vec![4]);
        assert_eq!(l.rows, 4);
        assert_eq!(l.point_len, 9);
        assert!(batch_layout(&[4, 2, 3], &[3, 3]).is_err());
    }

    #[test]
    fn broadcast_rules() {
        let a = batch_layout(&[4, 2], &[2]).unwrap();
        let b = batch_layout(&[2], &[2]).unwrap();
        let (shape, rows) = broadcast_batches(&a, &b).unwrap();
        assert_eq!(shape, vec![4]);
        assert_eq!(rows, 4);
        let c = batch_layout(&[3, 2], &[2]).unwrap();
        assert!(broadcast_batches(&a, &c).is_err());
    }
}
