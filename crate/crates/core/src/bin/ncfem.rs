fn main() {
    std::process::exit(ncfem::cli::main_with_args(std::env::args_os()));
}
