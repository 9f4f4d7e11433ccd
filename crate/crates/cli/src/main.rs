fn main() {
    std::process::exit(airfair_cli::main_entry(std::env::args_os()));
}
