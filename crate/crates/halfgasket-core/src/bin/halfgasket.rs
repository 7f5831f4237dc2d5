fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = halfgasket::cli::run_with(
        &args.iter().map(String::as_str).collect::<Vec<_>>(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}
