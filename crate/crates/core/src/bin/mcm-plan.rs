fn main() {
    std::process::exit(mcm_plan::cli::cli_main(std::env::args_os()));
}
