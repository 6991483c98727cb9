fn main() {
    std::process::exit(xpand::cli::main_with(std::env::args_os().collect()));
}
