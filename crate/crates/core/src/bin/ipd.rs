fn main() {
    let code = ipd_core::cli::cli_main(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
