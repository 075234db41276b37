//! CSV schemas and the printed comparison table.

use std::collections::BTreeMap;
use std::io::Write;

use adacons::TrainTrace;

/// Column order of every per-run trace file.
pub const TRACE_HEADER: [&str; 13] = [
    "iteration",
    "objective",
    "coeff_mean_raw",
    "coeff_std_raw",
    "coeff_mean_smoothed",
    "coeff_std_smoothed",
    "coeff_mean_norm",
    "coeff_std_norm",
    "lambda",
    "fallback",
    "allreduce_elems",
    "allgather_elems",
    "wall_time_s",
];

pub const SUMMARY_HEADER: [&str; 12] = [
    "aggregator",
    "workers",
    "effective_batch",
    "local_batch",
    "seed",
    "iterations",
    "final_objective",
    "mean_iter_wall_s",
    "allreduce_elems",
    "allgather_elems",
    "comm_bytes",
    "fallback_count",
];

pub const COMPARISON_HEADER: [&str; 8] = [
    "aggregator",
    "workers",
    "effective_batch",
    "seeds",
    "median_final_objective",
    "mean_iter_wall_s",
    "wall_time_ratio_vs_sum",
    "comm_elems_per_iter",
];

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes one row per iteration. Wall times are zeroed unless `timing`.
pub fn write_trace<W: Write>(trace: &TrainTrace, timing: bool, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        let stats = r.coefficient_stats;
        w.write_record([
            r.iteration.to_string(),
            r.objective.to_string(),
            opt(stats.map(|s| s.raw.mean)),
            opt(stats.map(|s| s.raw.std)),
            opt(stats.map(|s| s.smoothed.mean)),
            opt(stats.map(|s| s.smoothed.std)),
            opt(stats.map(|s| s.normalized.mean)),
            opt(stats.map(|s| s.normalized.std)),
            opt(r.lambda),
            u8::from(r.fallback).to_string(),
            r.comm.payload_elements.to_string(),
            r.comm.gather_elements.to_string(),
            if timing { r.wall_time_s } else { 0.0 }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub aggregator: &'static str,
    pub workers: usize,
    pub effective_batch: usize,
    pub seed: u64,
    pub iterations: usize,
    pub final_objective: f64,
    pub mean_iter_wall_s: f64,
    pub allreduce_elems: u64,
    pub allgather_elems: u64,
    pub comm_bytes: u64,
    pub fallback_count: usize,
}

impl RunSummary {
    pub fn from_trace(
        aggregator: &'static str,
        workers: usize,
        effective_batch: usize,
        seed: u64,
        trace: &TrainTrace,
        timing: bool,
        bytes_per_element: u64,
    ) -> Self {
        let comm = trace.total_comm();
        Self {
            aggregator,
            workers,
            effective_batch,
            seed,
            iterations: trace.records.len(),
            final_objective: trace.final_objective(),
            mean_iter_wall_s: if timing { trace.mean_wall_time() } else { 0.0 },
            allreduce_elems: comm.payload_elements,
            allgather_elems: comm.gather_elements,
            comm_bytes: comm.total_elements() * bytes_per_element,
            fallback_count: trace.fallback_count(),
        }
    }
}

pub fn write_summary<W: Write>(rows: &[RunSummary], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.aggregator.to_string(),
            r.workers.to_string(),
            r.effective_batch.to_string(),
            (r.effective_batch / r.workers).to_string(),
            r.seed.to_string(),
            r.iterations.to_string(),
            r.final_objective.to_string(),
            r.mean_iter_wall_s.to_string(),
            r.allreduce_elems.to_string(),
            r.allgather_elems.to_string(),
            r.comm_bytes.to_string(),
            r.fallback_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Seed-aggregated view of one (aggregator, workers, effective batch) group.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub aggregator: &'static str,
    pub workers: usize,
    pub effective_batch: usize,
    pub seeds: usize,
    pub median_final_objective: f64,
    pub mean_iter_wall_s: f64,
    /// Mean per-iteration wall time relative to `sum` in the same group.
    pub wall_time_ratio_vs_sum: Option<f64>,
    pub comm_elems_per_iter: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Groups runs by (workers, effective batch, aggregator), in first-seen
/// aggregator order within each group.
pub fn compare(rows: &[RunSummary]) -> Vec<Comparison> {
    let mut order: Vec<&'static str> = Vec::new();
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&RunSummary>> = BTreeMap::new();
    for r in rows {
        let pos = match order.iter().position(|a| *a == r.aggregator) {
            Some(p) => p,
            None => {
                order.push(r.aggregator);
                order.len() - 1
            }
        };
        groups
            .entry((r.workers, r.effective_batch, pos))
            .or_default()
            .push(r);
    }

    let mut out: Vec<Comparison> = groups
        .iter()
        .map(|(&(workers, effective_batch, pos), runs)| {
            let mut finals: Vec<f64> = runs.iter().map(|r| r.final_objective).collect();
            let iters: usize = runs.iter().map(|r| r.iterations).sum();
            let elems: u64 = runs
                .iter()
                .map(|r| r.allreduce_elems + r.allgather_elems)
                .sum();
            Comparison {
                aggregator: order[pos],
                workers,
                effective_batch,
                seeds: runs.len(),
                median_final_objective: median(&mut finals),
                mean_iter_wall_s: runs.iter().map(|r| r.mean_iter_wall_s).sum::<f64>()
                    / runs.len() as f64,
                wall_time_ratio_vs_sum: None,
                comm_elems_per_iter: elems as f64 / iters.max(1) as f64,
            }
        })
        .collect();

    let baseline: BTreeMap<(usize, usize), f64> = out
        .iter()
        .filter(|c| c.aggregator == "sum")
        .map(|c| ((c.workers, c.effective_batch), c.mean_iter_wall_s))
        .collect();
    for c in &mut out {
        if let Some(&base) = baseline.get(&(c.workers, c.effective_batch)) {
            if base > 0.0 {
                c.wall_time_ratio_vs_sum = Some(c.mean_iter_wall_s / base);
            }
        }
    }
    out
}

pub fn write_comparison<W: Write>(rows: &[Comparison], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_HEADER)?;
    for c in rows {
        w.write_record([
            c.aggregator.to_string(),
            c.workers.to_string(),
            c.effective_batch.to_string(),
            c.seeds.to_string(),
            c.median_final_objective.to_string(),
            c.mean_iter_wall_s.to_string(),
            opt(c.wall_time_ratio_vs_sum),
            c.comm_elems_per_iter.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn print_table<W: Write>(rows: &[Comparison], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<22} {:>7} {:>9} {:>5} {:>14} {:>12} {:>9} {:>12}",
        "aggregator",
        "workers",
        "eff_batch",
        "seeds",
        "median_final",
        "iter_wall_s",
        "vs_sum",
        "elems/iter"
    )?;
    for c in rows {
        let ratio = c
            .wall_time_ratio_vs_sum
            .map_or_else(|| "-".to_string(), |r| format!("{r:.3}x"));
        writeln!(
            out,
            "{:<22} {:>7} {:>9} {:>5} {:>14.6e} {:>12.3e} {:>9} {:>12.0}",
            c.aggregator,
            c.workers,
            c.effective_batch,
            c.seeds,
            c.median_final_objective,
            c.mean_iter_wall_s,
            ratio,
            c.comm_elems_per_iter
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(aggregator: &'static str, seed: u64, fin: f64, wall: f64) -> RunSummary {
        RunSummary {
            aggregator,
            workers: 4,
            effective_batch: 16,
            seed,
            iterations: 10,
            final_objective: fin,
            mean_iter_wall_s: wall,
            allreduce_elems: 100,
            allgather_elems: 40,
            comm_bytes: 560,
            fallback_count: 0,
        }
    }

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn comparison_groups_and_ratios() {
        let rows = [
            row("sum", 1, 1.0, 2.0),
            row("adacons", 1, 0.5, 3.0),
            row("sum", 2, 3.0, 2.0),
            row("adacons", 2, 0.1, 3.0),
            row("sum", 3, 2.0, 2.0),
            row("adacons", 3, 0.2, 3.0),
        ];
        let cmp = compare(&rows);
        assert_eq!(cmp.len(), 2);
        assert_eq!(cmp[0].aggregator, "sum");
        assert_eq!(cmp[0].median_final_objective, 2.0);
        assert_eq!(cmp[0].wall_time_ratio_vs_sum, Some(1.0));
        assert_eq!(cmp[1].median_final_objective, 0.2);
        assert_eq!(cmp[1].wall_time_ratio_vs_sum, Some(1.5));
        assert_eq!(cmp[1].comm_elems_per_iter, 14.0);
    }
}
