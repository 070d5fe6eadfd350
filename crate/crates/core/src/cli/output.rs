//! CSV and JSON emission. Floats are written with 17 significant digits so
//! re-parsing reproduces them exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::game::GameAnalysis;
use crate::lifted::Signal;
use crate::runner::{ExperimentResults, TrialRecord};

use super::CliError;

const SIGNAL_TRIALS: [usize; 5] = [0, 1, 5, 10, 30];

/// `{:.16e}`: one leading digit plus sixteen decimals.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Creates `dir` if absent; an existing non-empty directory needs `force`.
pub fn prepare_output_dir(dir: &Path, force: bool) -> Result<(), CliError> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(io_err(dir))?;
        if entries.next().is_some() && !force {
            return Err(CliError::OutputExists(dir.to_path_buf()));
        }
        Ok(())
    } else {
        fs::create_dir_all(dir).map_err(io_err(dir))
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn ordered_records(results: &ExperimentResults) -> impl Iterator<Item = (String, &Vec<TrialRecord>)> {
    results
        .policies
        .iter()
        .filter_map(|p| results.records.get(p).map(|r| (p.to_string(), r)))
}

pub fn write_trials_csv(path: &Path, results: &ExperimentResults) -> Result<(), CliError> {
    let rows = ordered_records(results).flat_map(|(name, recs)| {
        recs.iter().map(move |rec| {
            let c = &rec.cost;
            let mut row = vec![name.clone(), rec.trial.to_string()];
            row.extend(
                [
                    c.total,
                    c.q_item,
                    c.r_item,
                    c.s_item,
                    c.w_item,
                    c.wr_item,
                    rec.err_norm,
                    rec.actual_err_norm,
                ]
                .map(format_float),
            );
            row
        })
    });
    write_rows(
        path,
        &[
            "policy",
            "trial",
            "J_total",
            "J_Q",
            "J_R",
            "J_S",
            "J_W",
            "J_Wr",
            "err_norm",
            "actual_err_norm",
        ],
        rows,
    )
}

/// Trials kept in `signals.csv`: {0, 1, 5, 10, 30, last}, or every trial.
pub fn signal_trials(last: usize, all: bool) -> Vec<usize> {
    if all {
        return (0..=last).collect();
    }
    let mut keep: Vec<usize> = SIGNAL_TRIALS.into_iter().filter(|k| *k <= last).collect();
    if !keep.contains(&last) {
        keep.push(last);
    }
    keep
}

pub fn write_signals_csv(
    path: &Path,
    results: &ExperimentResults,
    all_trials: bool,
) -> Result<(), CliError> {
    let dt = results.y_d.sample_time();
    let rows = ordered_records(results).flat_map(|(name, recs)| {
        let last = recs.last().map_or(0, |r| r.trial);
        let keep = signal_trials(last, all_trials);
        recs.iter()
            .filter(move |rec| keep.contains(&rec.trial))
            .flat_map(move |rec| {
                let name = name.clone();
                (0..rec.r.len()).map(move |i| {
                    let at = |s: &Signal| format_float(s.as_slice()[i]);
                    vec![
                        name.clone(),
                        rec.trial.to_string(),
                        format_float(i as f64 * dt),
                        at(&rec.r),
                        at(&rec.u),
                        at(&rec.y),
                        at(&rec.e),
                        at(&rec.e_hat),
                        at(&rec.u_mix),
                    ]
                })
            })
    });
    write_rows(
        path,
        &["policy", "trial", "t", "r", "u", "y", "e", "e_hat", "u_mix"],
        rows,
    )
}

pub fn write_game_csv(path: &Path, game: &GameAnalysis) -> Result<(), CliError> {
    let rows = game.reports.iter().map(|r| {
        vec![
            r.trial.to_string(),
            format_float(r.baseline_v0),
            format_float(r.v_empty_raw),
            format_float(r.v_input),
            format_float(r.v_trajectory),
            format_float(r.v_grand),
            r.superadditive.to_string(),
            r.internally_stable.to_string(),
        ]
    });
    write_rows(
        path,
        &[
            "trial",
            "V0",
            "v_empty_raw",
            "v_input",
            "v_trajectory",
            "v_grand",
            "superadditive",
            "internally_stable",
        ],
        rows,
    )
}

/// `t,y_d`.
pub fn write_reference_csv(path: &Path, y_d: &Signal) -> Result<(), CliError> {
    let dt = y_d.sample_time();
    let rows = y_d
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, v)| vec![format_float(i as f64 * dt), format_float(*v)]);
    write_rows(path, &["t", "y_d"], rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| io_err(path)(std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_analysis(path: &Path, results: &ExperimentResults) -> Result<(), CliError> {
    write_json(path, &results.analysis)
}

/// Writes every output of a run and returns the paths in write order.
/// `game.csv` is written only when all four coalitions ran.
pub fn write_results(
    dir: &Path,
    results: &ExperimentResults,
    all_trials: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let p = dir.join("trials.csv");
    write_trials_csv(&p, results)?;
    written.push(p);
    let p = dir.join("signals.csv");
    write_signals_csv(&p, results, all_trials)?;
    written.push(p);
    if let Some(game) = &results.game {
        let p = dir.join("game.csv");
        write_game_csv(&p, game)?;
        written.push(p);
    }
    let p = dir.join("reference.csv");
    write_reference_csv(&p, &results.y_d)?;
    written.push(p);
    let p = dir.join("analysis.json");
    write_analysis(&p, results)?;
    written.push(p);
    Ok(written)
}
