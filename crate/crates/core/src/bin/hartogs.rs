fn main() {
    std::process::exit(hartogs::cli::run_command(std::env::args_os()));
}
