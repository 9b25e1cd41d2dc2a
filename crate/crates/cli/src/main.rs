mod args;
mod render;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;
use sqkd_core::adversary::build_attack;
use sqkd_core::mock::nonrobustness_demo;
use sqkd_core::protocol::run_protocol;
use sqkd_core::robustness::{even_grid, sample_random_attacks, sweep_row, verify_theorem, Tolerances};

use args::{Cli, Command, Output};

enum Failure {
    Usage(String),
    Io(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    let (header, output, body) = match command {
        Command::Run(a) => {
            let header = render::run_header(&a);
            let model = build_attack(&a.attack).map_err(|e| Failure::Usage(e.to_string()))?;
            a.protocol.config(0).validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let reports = (0..a.protocol.trials)
                .into_par_iter()
                .map(|t| run_protocol(&a.protocol.config(t), &model))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let body = render::run(&header, &reports, a.output.format);
            (header, a.output, body)
        }
        Command::MockDemo(a) => {
            let header = render::mock_header(&a);
            a.protocol.config(0).validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let trials = (0..a.protocol.trials)
                .into_par_iter()
                .map(|t| nonrobustness_demo(&a.protocol.config(t)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let body = render::mock_demo(&header, &trials, a.output.format);
            (header, a.output, body)
        }
        Command::Sweep(a) => {
            let header = render::sweep_header(&a);
            let rows = even_grid(a.points as usize)
                .into_par_iter()
                .map(sweep_row)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let body = render::sweep(&header, &rows, a.output.format);
            (header, a.output, body)
        }
        Command::Verify(a) => {
            let header = render::verify_header(&a);
            let tol = Tolerances {
                disturbance: a.tol_disturb,
                info: a.tol_info,
            };
            let body = if a.random_attacks > 0 {
                let cases = sample_random_attacks(a.random_attacks, a.seed);
                let verdicts = cases
                    .par_iter()
                    .map(|c| verify_theorem(&c.model, tol))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Failure::Usage(e.to_string()))?;
                render::verify_random(&header, &cases, &verdicts, a.output.format)
            } else {
                let model = build_attack(&a.attack).map_err(|e| Failure::Usage(e.to_string()))?;
                let verdict = verify_theorem(&model, tol).map_err(|e| Failure::Usage(e.to_string()))?;
                render::verify_single(&header, &verdict, a.output.format)
            };
            (header, a.output, body)
        }
    };
    eprintln!("{header}");
    emit(&output, &body)
}

fn emit(output: &Output, body: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, body)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(format!("cannot write to standard output: {e}")))
        }
    }
}
