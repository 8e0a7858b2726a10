fn main() {
    std::process::exit(conf_lab::cli::main_with_args(std::env::args_os()));
}
