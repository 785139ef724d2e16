use clap::Parser;

fn main() {
    let cli = sandlab_cli::Cli::parse();
    match sandlab_cli::run(&cli) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("sandlab: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
