use clap::Parser;

use esqpt::cli::{execute, resolve_config, Args};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = resolve_config(&args).and_then(|config| execute(args.command, &config));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
