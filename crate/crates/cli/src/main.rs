use std::process::ExitCode;

use adacons_cli::{parse_config, report, run_matrix, OUT_DIR_ENV};

fn main() -> ExitCode {
    let env_out_dir = std::env::var(OUT_DIR_ENV).ok();
    let matrix = match parse_config(std::env::args_os().skip(1), env_out_dir.as_deref()) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(1);
        }
    };

    let outcome = match run_matrix(&matrix) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    if let Err(e) = report::print_table(&outcome.comparisons, std::io::stdout().lock()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    println!(
        "wrote {} files under {}",
        outcome.written.len(),
        matrix.output_dir.display()
    );
    for failure in &outcome.failures {
        eprintln!("aborted: {}: {}", failure.cell, failure.error);
    }
    ExitCode::from(outcome.exit_code() as u8)
}
