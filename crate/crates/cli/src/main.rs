use clap::Parser;
use dynrecon_cli::{execute, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = cli.overrides.resolve(cli.command).and_then(|cfg| execute(cli.command, &cfg));
    match result {
        Ok(out) => println!("{}", out.display()),
        Err(e) => {
            eprintln!("{}", e.report());
            std::process::exit(e.category().exit_code());
        }
    }
}
