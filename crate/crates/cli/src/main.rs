use clap::Parser;
use quadweil_cli::commands::{envelope, load_form, run};
use quadweil_cli::config::RunConfig;
use quadweil_cli::{render, CliError, CliResult, Status};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Usage as u8 } else { 0 });
        }
    };
    match execute(&cfg) {
        Ok(s) => ExitCode::from(s as u8),
        Err(e) => {
            eprintln!("quadweil: {e}");
            ExitCode::from(e.status() as u8)
        }
    }
}

fn execute(cfg: &RunConfig) -> CliResult<Status> {
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let form = load_form(cfg)?;
    let out = run(cfg, &form)?;
    let artifact = envelope(cfg, &form, &out);
    if let Some(path) = &cfg.out {
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let body = match (is_csv, &out.table) {
            (true, Some(t)) => {
                render::csv(t).ok_or_else(|| CliError::Usage("result has no flat table for CSV".into()))?
            }
            (true, None) => {
                return Err(CliError::Usage(
                    "this command has no tabular output; use a .json path".into(),
                ))
            }
            (false, _) => serde_json::to_string_pretty(&artifact).expect("serializes") + "\n",
        };
        std::fs::write(path, body)?;
    }
    if cfg.pretty {
        print!("{}", render::pretty(&artifact));
    } else if cfg.out.is_none() {
        println!("{}", serde_json::to_string_pretty(&artifact).expect("serializes"));
    }
    Ok(out.status)
}
