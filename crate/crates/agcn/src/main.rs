fn main() {
    std::process::exit(agcn::cli::cli_main(std::env::args_os()));
}
