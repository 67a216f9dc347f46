fn main() {
    std::process::exit(dicke_battery::cli::main_with_args(std::env::args_os()));
}
