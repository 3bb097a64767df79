fn main() {
    std::process::exit(nvdnp_cli::run(std::env::args_os()));
}
