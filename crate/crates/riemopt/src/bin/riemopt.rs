fn main() {
    std::process::exit(riemopt::bench::cli_main(std::env::args_os()));
}
