fn main() {
    std::process::exit(manifold_dp_harness::cli::run(std::env::args_os()));
}
