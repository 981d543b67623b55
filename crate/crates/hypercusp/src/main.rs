fn main() {
    if let Err(e) = hypercusp::cli::init_threads() {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    let code = hypercusp::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
