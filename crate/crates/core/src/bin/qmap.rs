fn main() {
    std::process::exit(qmap_core::cli::run_main(std::env::args_os()));
}
