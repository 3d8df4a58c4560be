fn main() {
    std::process::exit(panomem::cli::run(std::env::args_os()));
}
