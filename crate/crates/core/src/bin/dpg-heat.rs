fn main() {
    std::process::exit(dpg_heat::cli::main_with_args(std::env::args_os()));
}
