use clap::Parser;

fn main() {
    let cli = palmfact_cli::Cli::parse();
    let code = match palmfact_cli::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("palmfact: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
