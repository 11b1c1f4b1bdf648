fn main() {
    if let Err(e) = tsxplain_cli::run(std::env::args_os()) {
        eprintln!("tsxplain: {e}");
        std::process::exit(e.exit_code());
    }
}
