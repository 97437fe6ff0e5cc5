mod args;
mod manifest;
mod run;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use manifest::{RunManifest, Tolerances};
use run::Failure;

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match &cli.command {
        Command::Validate(a) => run::validate(a),
        Command::Causal(a) => run::causal(a),
        Command::Noncausal(a) => run::noncausal(a),
        Command::Holevo(a) => run::holevo(a),
        Command::Types(a) => run::types(a),
        Command::Schur(a) => run::schur(a),
        Command::Simulate(a) => run::simulate(a),
    };
    let (code, hash, seed) = match outcome {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("json"));
            } else {
                print!("{}", report.text);
            }
            (0, report.channel_sha256, report.seed)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Domain(e)) => {
            if cli.json {
                let causes: Vec<String> = e.chain().map(|c| c.to_string()).collect();
                eprintln!("{}", json!({"error": causes[0], "causes": &causes[1..]}));
            } else {
                eprintln!("error: {e:#}");
            }
            (1, None, None)
        }
    };
    let manifest = RunManifest {
        command_line: std::env::args().collect(),
        channel_sha256: hash,
        seed,
        threads: rayon::current_num_threads(),
        tolerances: Tolerances::default(),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    eprintln!("{}", serde_json::to_string(&manifest).expect("manifest"));
    ExitCode::from(code)
}
