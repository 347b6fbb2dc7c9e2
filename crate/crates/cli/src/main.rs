fn main() {
    std::process::exit(wvlab_cli::cli::main_with(std::env::args_os()));
}
