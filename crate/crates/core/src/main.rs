fn main() {
    std::process::exit(combsage::cli::main_from_args(std::env::args_os()));
}
