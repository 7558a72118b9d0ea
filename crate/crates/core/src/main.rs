fn main() {
    std::process::exit(dimple_core::app::cli_main(std::env::args_os()));
}
