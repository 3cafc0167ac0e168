fn main() {
    std::process::exit(nclil::harness::main_with_args(std::env::args_os()));
}
