use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use adacons::{run, run_ablation_matrix, EngineError, ProblemSpec, RunConfig, TrainTrace};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::ExperimentMatrix;
use crate::report::{self, Comparison, RunSummary};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

/// A run that aborted, with the engine's diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub cell: String,
    pub error: EngineError,
}

#[derive(Debug, Default)]
pub struct MatrixOutcome {
    pub summaries: Vec<RunSummary>,
    pub comparisons: Vec<Comparison>,
    pub failures: Vec<Failure>,
    pub written: Vec<PathBuf>,
}

impl MatrixOutcome {
    /// 0 on success, 2 if any run hit a numeric abort, 1 for other failures.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else if self.failures.iter().any(|f| f.error.is_numeric()) {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    workers: usize,
    effective_batch: usize,
    seed: u64,
}

type CellRuns = Vec<(&'static str, Result<TrainTrace, EngineError>)>;

fn run_cell(matrix: &ExperimentMatrix, cell: Cell) -> CellRuns {
    let spec = ProblemSpec {
        dimension: matrix.dimension,
        kind: matrix.problem,
        seed: matrix.problem_seed,
    };
    let base = match RunConfig::with_effective_batch(
        cell.workers,
        cell.effective_batch,
        matrix.iterations,
    ) {
        Ok(c) => RunConfig {
            step_rule: matrix.step_rule,
            seed: cell.seed,
            record_coefficient_stats: matrix.record_coefficient_stats,
            execution: matrix.execution,
            ..c
        },
        Err(e) => return vec![("config", Err(e))],
    };

    if matrix.ablation {
        let base = base.with_aggregator(adacons::AggregatorKind::AdaCons(matrix.adacons));
        return match run_ablation_matrix(&base, &spec) {
            Ok(runs) => runs.into_iter().map(|r| (r.label, Ok(r.trace))).collect(),
            Err(e) => vec![("ablation", Err(e))],
        };
    }
    matrix
        .aggregators
        .iter()
        .map(|choice| {
            let config = base.clone().with_aggregator(choice.kind(matrix.adacons));
            (choice.label(), run(&config, &spec))
        })
        .collect()
}

fn trace_path(matrix: &ExperimentMatrix, label: &str, cell: Cell) -> PathBuf {
    match &matrix.csv {
        Some(path) => path.clone(),
        None => matrix.output_dir.join(format!(
            "{label}_N{}_EBS{}_seed{}.csv",
            cell.workers, cell.effective_batch, cell.seed
        )),
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, RunError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| RunError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })
}

/// Runs every cell of the matrix and writes one trace CSV per run plus
/// `summary.csv` and `comparison.csv` in the output directory.
pub fn run_matrix(matrix: &ExperimentMatrix) -> Result<MatrixOutcome, RunError> {
    let mut cells = Vec::new();
    for &workers in &matrix.workers {
        for &effective_batch in &matrix.effective_batches {
            for &seed in &matrix.seeds {
                cells.push(Cell {
                    workers,
                    effective_batch,
                    seed,
                });
            }
        }
    }

    let results: Vec<(Cell, CellRuns)> = if matrix.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(matrix.jobs)
            .build()
            .map_err(|e| RunError::Io {
                path: matrix.output_dir.clone(),
                source: std::io::Error::other(e),
            })?;
        pool.install(|| {
            cells
                .par_iter()
                .map(|&cell| (cell, run_cell(matrix, cell)))
                .collect()
        })
    } else {
        cells
            .iter()
            .map(|&cell| (cell, run_cell(matrix, cell)))
            .collect()
    };

    let mut outcome = MatrixOutcome::default();
    for (cell, runs) in results {
        for (label, result) in runs {
            match result {
                Ok(trace) => {
                    let path = trace_path(matrix, label, cell);
                    report::write_trace(&trace, matrix.timing, create(&path)?).map_err(
                        |source| RunError::Csv {
                            path: path.clone(),
                            source,
                        },
                    )?;
                    outcome.written.push(path);
                    outcome.summaries.push(RunSummary::from_trace(
                        label,
                        cell.workers,
                        cell.effective_batch,
                        cell.seed,
                        &trace,
                        matrix.timing,
                        matrix.bytes_per_element,
                    ));
                }
                Err(error) => outcome.failures.push(Failure {
                    cell: format!(
                        "{label} workers={} effective_batch={} seed={}",
                        cell.workers, cell.effective_batch, cell.seed
                    ),
                    error,
                }),
            }
        }
    }

    outcome.comparisons = report::compare(&outcome.summaries);
    let summary_path = matrix.output_dir.join("summary.csv");
    report::write_summary(&outcome.summaries, create(&summary_path)?).map_err(|source| {
        RunError::Csv {
            path: summary_path.clone(),
            source,
        }
    })?;
    let comparison_path = matrix.output_dir.join("comparison.csv");
    report::write_comparison(&outcome.comparisons, create(&comparison_path)?).map_err(
        |source| RunError::Csv {
            path: comparison_path.clone(),
            source,
        },
    )?;
    outcome.written.push(summary_path);
    outcome.written.push(comparison_path);
    Ok(outcome)
}
