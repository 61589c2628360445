//! Monte Carlo sweeps over the measurement grid.

use std::time::Instant;

use rayon::prelude::*;

use super::config::{Algorithm, ExperimentConfig, SignalClass};
use super::record::TrialRecord;
use crate::error::{Error, Result};
use crate::frames::TightFrame;
use crate::measure::{dithered_measure, sign_measure, SensingEnsemble};
use crate::recover::{self, Diagnostics, RecoveryOutput};
use crate::rng::derive_seed;
use crate::signals::{
    direction_error, gen_analysis_sparse_effective, gen_synthesis_sparse, GroundTruth,
};

const SIGNAL_STREAM: u64 = 1;
const ENSEMBLE_STREAM: u64 = 2;

/// Seed of one trial: a hash of the master seed, the cell coordinates and
/// the trial index.
pub fn trial_seed(cfg: &ExperimentConfig, m: usize, trial: usize) -> u64 {
    derive_seed(
        cfg.seed,
        &[
            m as u64,
            cfg.dict.n as u64,
            cfg.dict.big_n as u64,
            cfg.s as u64,
            trial as u64,
        ],
    )
}

fn error_status(e: &Error) -> String {
    match e {
        Error::Degenerate(_) => "degenerate".into(),
        Error::Solver(report) => report.status.to_string(),
        Error::ConstraintViolation(_) => "constraint_violation".into(),
        Error::GenerationFailed { .. } => "generation_failed".into(),
        _ => "error".into(),
    }
}

struct Instance {
    truth: GroundTruth,
    ensemble: SensingEnsemble,
    sign: Option<Vec<i8>>,
    dithered: Option<Vec<i8>>,
}

fn build_instance(cfg: &ExperimentConfig, frame: &TightFrame, m: usize, seed: u64) -> Result<Instance> {
    let signal_seed = derive_seed(seed, &[SIGNAL_STREAM]);
    let truth = if cfg.r == 0.0 {
        GroundTruth::zero(frame.rows(), cfg.s)
    } else {
        match cfg.signal_class {
            SignalClass::Synthesis => gen_synthesis_sparse(frame, cfg.s, signal_seed, cfg.r)?,
            SignalClass::AnalysisEffective => {
                gen_analysis_sparse_effective(frame, cfg.s, signal_seed, cfg.r)?
            }
        }
    };
    let mut ensemble = SensingEnsemble::sample(m, frame.rows(), derive_seed(seed, &[ENSEMBLE_STREAM]))?;
    if cfg.dithered {
        ensemble = ensemble.with_thresholds(cfg.sigma)?;
    }
    let needs_sign = cfg.algorithms.iter().any(|a| !a.is_full());
    let sign = if needs_sign {
        Some(sign_measure(&ensemble, &truth.f)?.signs().to_vec())
    } else {
        None
    };
    let dithered = if cfg.dithered {
        Some(dithered_measure(&ensemble, &truth.f)?.signs().to_vec())
    } else {
        None
    };
    Ok(Instance {
        truth,
        ensemble,
        sign,
        dithered,
    })
}

fn run_algorithm(
    cfg: &ExperimentConfig,
    frame: &TightFrame,
    inst: &Instance,
    algorithm: Algorithm,
) -> Result<RecoveryOutput> {
    let a = inst.ensemble.matrix();
    let truth = &inst.truth;
    let sign = || inst.sign.as_deref().ok_or_else(|| Error::param("missing sign observation"));
    let dithered = || {
        inst.dithered
            .as_deref()
            .ok_or_else(|| Error::param("missing dithered observation"))
    };
    let tau = || {
        inst.ensemble
            .thresholds()
            .ok_or_else(|| Error::param("missing thresholds"))
    };
    match algorithm {
        Algorithm::LpDirection => recover::lp_direction(frame, a, sign()?),
        Algorithm::HtDirection => {
            let t = match cfg.t {
                Some(t) => t,
                None => recover::choose_t(cfg.epsilon, truth.kappa, cfg.s)?,
            };
            recover::ht_direction(frame, a, sign()?, t)
        }
        Algorithm::LpFull => recover::lp_full(frame, a, tau()?, cfg.sigma, dithered()?),
        Algorithm::SocpFull => {
            let radius = cfg.radius.unwrap_or(cfg.r);
            recover::socp_full(frame, a, tau()?, dithered()?, radius)
        }
        Algorithm::HtFull => {
            let t = match cfg.t_full {
                Some(t) => t,
                None => recover::choose_t_full(cfg.epsilon, truth.kappa, cfg.s, cfg.r, cfg.sigma)?,
            };
            recover::ht_full(frame, a, tau()?, cfg.sigma, dithered()?, t)
        }
    }
}

/// Runs every configured algorithm on trial `trial` of cell `cell_id`. The
/// trial draws only from its own seed, so it can be replayed in isolation.
/// Failures become degenerate records rather than errors.
pub fn run_trial(
    cfg: &ExperimentConfig,
    frame: &TightFrame,
    cell_id: usize,
    trial: usize,
) -> Vec<TrialRecord> {
    let m = cfg.m_grid[cell_id];
    let seed = trial_seed(cfg, m, trial);
    let base = |algorithm: Algorithm| TrialRecord {
        cell_id,
        m,
        n: frame.rows(),
        big_n: frame.cols(),
        s: cfg.s,
        sigma: cfg.sigma,
        r: cfg.r,
        algorithm: algorithm.name().to_string(),
        trial,
        direction_error: None,
        full_error: None,
        status: String::new(),
        degenerate: true,
        wall_ms: 0.0,
    };
    let inst = match build_instance(cfg, frame, m, seed) {
        Ok(inst) => inst,
        Err(e) => {
            return cfg
                .algorithms
                .iter()
                .map(|&a| TrialRecord {
                    status: error_status(&e),
                    ..base(a)
                })
                .collect();
        }
    };
    cfg.algorithms
        .iter()
        .map(|&algorithm| {
            let start = Instant::now();
            let result = run_algorithm(cfg, frame, &inst, algorithm);
            let wall_ms = if cfg.timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            let mut rec = TrialRecord {
                wall_ms,
                ..base(algorithm)
            };
            match result {
                Ok(out) => {
                    rec.status = match &out.diagnostics {
                        Diagnostics::Solver(report) => report.status.to_string(),
                        Diagnostics::Thresholding { .. } => "ok".into(),
                    };
                    let finite = out.f_hat.iter().all(|v| v.is_finite());
                    rec.direction_error = direction_error(&inst.truth.f, &out.f_hat).ok();
                    if algorithm.is_full() && cfg.r > 0.0 && finite {
                        rec.full_error = Some((&inst.truth.f - &out.f_hat).norm() / cfg.r);
                    }
                    rec.degenerate = rec.direction_error.is_none() || !finite;
                }
                Err(e) => rec.status = error_status(&e),
            }
            rec
        })
        .collect()
}

/// Runs the whole sweep on an existing frame, in parallel over trials.
/// Records are ordered by cell, trial and the configured algorithm order.
pub fn run_experiment_with_frame(cfg: &ExperimentConfig, frame: &TightFrame) -> Vec<TrialRecord> {
    let units: Vec<(usize, usize)> = (0..cfg.m_grid.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let mut records: Vec<TrialRecord> = units
        .par_iter()
        .flat_map_iter(|&(cell, trial)| run_trial(cfg, frame, cell, trial))
        .collect();
    let position = |name: &str| cfg.algorithms.iter().position(|a| a.name() == name);
    records.sort_by_key(|r| (r.cell_id, r.trial, position(&r.algorithm)));
    records
}

/// Builds the frame and runs the sweep, on `cfg.threads` workers when set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let frame = cfg.dict.build()?;
    match cfg.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {k} threads: {e}")))?;
            Ok(pool.install(|| run_experiment_with_frame(cfg, &frame)))
        }
        None => Ok(run_experiment_with_frame(cfg, &frame)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::record::write_records;

    fn config(extra: &str) -> ExperimentConfig {
        let text = format!(
            "dict.n = 8\ndict.N = 12\ndict.seed = 3\nsignal.s = 2\nmeasure.m = 40, 160\n\
             run.trials = 3\nrun.seed = 5\nrun.timing = false\n{extra}"
        );
        ExperimentConfig::parse(&text).unwrap()
    }

    #[test]
    fn one_record_per_algorithm() {
        let mut cfg = config("recover.algorithms = ht_direction, lp_direction\nrecover.t = 4");
        cfg.trials = 1;
        cfg.m_grid = vec![60];
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].algorithm, "ht_direction");
        assert!(recs.iter().all(|r| !r.degenerate && r.full_error.is_none()));
    }

    #[test]
    fn reruns_are_byte_identical_and_thread_independent() {
        let mut cfg = config(
            "recover.algorithms = lp_direction, ht_direction, lp_full, socp_full, ht_full\n\
             recover.t = 4\nrecover.t_full = 5\nmeasure.dithered = true",
        );
        let bytes = |cfg: &ExperimentConfig| {
            let mut buf = Vec::new();
            write_records(&mut buf, &run_experiment(cfg).unwrap()).unwrap();
            buf
        };
        cfg.threads = Some(1);
        let serial = bytes(&cfg);
        cfg.threads = Some(3);
        let parallel = bytes(&cfg);
        assert_eq!(serial, parallel);
        assert_eq!(serial, bytes(&cfg));
        assert_eq!(serial.iter().filter(|&&b| b == b'\n').count(), 1 + 2 * 3 * 5);
    }

    #[test]
    fn single_trial_replays_in_isolation() {
        let cfg = config("recover.algorithms = ht_direction, lp_direction\nrecover.t = 4");
        let frame = cfg.dict.build().unwrap();
        let all = run_experiment_with_frame(&cfg, &frame);
        let replay = run_trial(&cfg, &frame, 1, 2);
        let from_sweep: Vec<_> = all
            .iter()
            .filter(|r| r.cell_id == 1 && r.trial == 2)
            .cloned()
            .collect();
        assert_eq!(replay, from_sweep);
    }

    #[test]
    fn zero_signal_yields_flagged_rows() {
        let mut cfg = config(
            "recover.algorithms = lp_direction, ht_direction, lp_full, socp_full, ht_full\n\
             recover.t = 4\nrecover.t_full = 4\nmeasure.dithered = true\nrecover.radius = 1",
        );
        cfg.r = 0.0;
        let recs = run_experiment(&cfg).unwrap();
        assert!(recs.iter().all(|r| r.degenerate && r.direction_error.is_none()));
    }

    #[test]
    fn generation_failure_is_recorded() {
        // Effectively 1-analysis-sparse signals do not exist for a generic frame.
        let cfg = config("recover.algorithms = ht_direction\nrecover.t = 4\nsignal.class = analysis-effective");
        let mut cfg = cfg;
        cfg.s = 1;
        cfg.trials = 1;
        let recs = run_experiment(&cfg).unwrap();
        assert!(recs
            .iter()
            .all(|r| r.degenerate && r.status == "generation_failed"));
    }
}
