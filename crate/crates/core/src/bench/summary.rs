//! Aggregation of trial records into per-cell statistics and plot series.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::record::{read_records, TrialRecord};
use crate::analysis::median;
use crate::error::Result;

pub const SUMMARY_HEADER: &str = "algorithm,m,n,N,s,trials,degenerate,median_direction_error,p90_direction_error,median_full_error,p90_full_error";

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub big_n: usize,
    pub s: usize,
    pub trials: usize,
    pub degenerate: usize,
    pub median_direction: Option<f64>,
    pub p90_direction: Option<f64>,
    pub median_full: Option<f64>,
    pub p90_full: Option<f64>,
}

/// Linearly interpolated quantile of an unsorted sample.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

fn stats(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        (None, None)
    } else {
        (Some(median(values)), Some(quantile(values, 0.9)))
    }
}

/// Median and 90th percentile per (algorithm, m, n, N, s), ordered by those
/// keys. Degenerate rows are counted but contribute no errors.
pub fn summarize_records(records: &[TrialRecord]) -> Vec<SummaryRow> {
    type Key = (String, usize, usize, usize, usize);
    let mut groups: BTreeMap<Key, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.algorithm.clone(), r.m, r.n, r.big_n, r.s))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((algorithm, m, n, big_n, s), rows)| {
            let dir: Vec<f64> = rows.iter().filter_map(|r| r.direction_error).collect();
            let full: Vec<f64> = rows.iter().filter_map(|r| r.full_error).collect();
            let (median_direction, p90_direction) = stats(&dir);
            let (median_full, p90_full) = stats(&full);
            SummaryRow {
                algorithm,
                m,
                n,
                big_n,
                s,
                trials: rows.len(),
                degenerate: rows.iter().filter(|r| r.degenerate).count(),
                median_direction,
                p90_direction,
                median_full,
                p90_full,
            }
        })
        .collect()
}

pub fn summarize_file(path: &Path) -> Result<Vec<SummaryRow>> {
    Ok(summarize_records(&read_records(File::open(path)?)?))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_summary<W: Write>(mut w: W, rows: &[SummaryRow]) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.algorithm,
            r.m,
            r.n,
            r.big_n,
            r.s,
            r.trials,
            r.degenerate,
            opt(r.median_direction),
            opt(r.p90_direction),
            opt(r.median_full),
            opt(r.p90_full)
        )?;
    }
    Ok(())
}

/// `(m, median error)` per algorithm: the full error when the algorithm
/// reports one, the direction error otherwise.
pub fn plot_series(records: &[TrialRecord]) -> BTreeMap<String, Vec<(usize, f64)>> {
    let mut series: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for row in summarize_records(records) {
        if let Some(err) = row.median_full.or(row.median_direction) {
            series
                .entry(row.algorithm.clone())
                .or_default()
                .insert(row.m, err);
        }
    }
    series
        .into_iter()
        .map(|(k, v)| (k, v.into_iter().collect()))
        .collect()
}

/// Writes one `<algorithm>.csv` file with header `m,median_error` per series.
pub fn emit_plotdata(records: &[TrialRecord], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (algorithm, points) in plot_series(records) {
        let path = out_dir.join(format!("{algorithm}.csv"));
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "m,median_error")?;
        for (m, e) in points {
            writeln!(w, "{m},{e}")?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(m: usize, trial: usize, dir: Option<f64>, full: Option<f64>) -> TrialRecord {
        TrialRecord {
            cell_id: 0,
            m,
            n: 8,
            big_n: 12,
            s: 2,
            sigma: 1.0,
            r: 1.0,
            algorithm: if full.is_some() { "lp_full" } else { "ht_direction" }.into(),
            trial,
            direction_error: dir,
            full_error: full,
            status: "ok".into(),
            degenerate: dir.is_none(),
            wall_ms: 0.0,
        }
    }

    #[test]
    fn empty_and_single_row() {
        assert!(summarize_records(&[]).is_empty());
        let rows = summarize_records(&[rec(100, 0, Some(0.3), None)]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].median_direction, Some(0.3));
        assert_eq!(rows[0].p90_direction, Some(0.3));
        assert_eq!(rows[0].median_full, None);
    }

    #[test]
    fn hand_computed_five_rows() {
        let errs = [0.5, 0.1, 0.4, 0.2, 0.3];
        let recs: Vec<_> = errs
            .iter()
            .enumerate()
            .map(|(i, &e)| rec(100, i, Some(e), None))
            .collect();
        let row = &summarize_records(&recs)[0];
        assert_eq!(row.median_direction, Some(0.3));
        // Sorted 0.1..0.5, position 0.9·4 = 3.6 → 0.4 + 0.6·0.1.
        assert!((row.p90_direction.unwrap() - 0.46).abs() < 1e-15);
        assert_eq!(row.trials, 5);
    }

    #[test]
    fn degenerate_rows_are_counted_not_averaged() {
        let recs = vec![rec(100, 0, Some(0.2), None), rec(100, 1, None, None)];
        let row = &summarize_records(&recs)[0];
        assert_eq!((row.trials, row.degenerate), (2, 1));
        assert_eq!(row.median_direction, Some(0.2));
    }

    #[test]
    fn plot_series_prefers_full_error() {
        let recs = vec![
            rec(100, 0, Some(0.2), Some(0.9)),
            rec(200, 0, Some(0.1), Some(0.5)),
            rec(100, 0, Some(0.4), None),
        ];
        let series = plot_series(&recs);
        assert_eq!(series["lp_full"], vec![(100, 0.9), (200, 0.5)]);
        assert_eq!(series["ht_direction"], vec![(100, 0.4)]);
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plotdata(&recs, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let text = std::fs::read_to_string(dir.path().join("lp_full.csv")).unwrap();
        assert_eq!(text, "m,median_error\n100,0.9\n200,0.5\n");
    }
}
