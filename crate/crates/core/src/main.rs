fn main() {
    std::process::exit(padiclf::cli::main_with_args(std::env::args_os()));
}
