fn main() {
    std::process::exit(layout_cli::cli_main(std::env::args_os()));
}
