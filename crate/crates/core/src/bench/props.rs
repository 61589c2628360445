//! Driver for the property estimators over a measurement grid.

use std::io::Write;

use super::config::{PropertyKind, PropsConfig};
use crate::analysis::{
    gaussian_width_mc, rip1_ratios, spep_deviation, synthesis_unit, tes_check, PropertyEstimate,
    Sphere,
};
use crate::error::Result;
use crate::measure::SensingEnsemble;
use crate::rng::derive_seed;

pub const PROPS_HEADER: &str = "property,m,n,N,s,param,samples,max,median,violation_count,seed";

const ENSEMBLE_STREAM: u64 = 0;
const ESTIMATOR_STREAM: u64 = 1;

/// Evaluates every configured property at every `m`. The width does not
/// depend on `m` and is reported once, with `m = 0`.
pub fn run_props(cfg: &PropsConfig) -> Result<Vec<PropertyEstimate>> {
    let frame = cfg.dict.build()?;
    let sphere = if cfg.analysis_sphere {
        Sphere::Analysis
    } else {
        Sphere::Synthesis
    };
    let mut out = Vec::new();
    for &m in &cfg.m_grid {
        let ensemble = SensingEnsemble::sample(
            m,
            frame.rows(),
            derive_seed(cfg.seed, &[ENSEMBLE_STREAM, m as u64]),
        )?;
        let seed = derive_seed(cfg.seed, &[ESTIMATOR_STREAM, m as u64]);
        for &p in &cfg.properties {
            match p {
                PropertyKind::Spep => out.push(spep_deviation(
                    &ensemble.isometric(),
                    &frame,
                    cfg.s,
                    cfg.samples,
                    seed,
                )?),
                PropertyKind::Rip1 => out.push(rip1_ratios(
                    &ensemble.isometric(),
                    &frame,
                    cfg.s,
                    cfg.samples,
                    seed,
                )?),
                PropertyKind::Tes => out.push(tes_check(
                    ensemble.matrix(),
                    &frame,
                    cfg.s,
                    cfg.epsilon,
                    cfg.samples,
                    seed,
                    sphere,
                )?),
                PropertyKind::Width => {}
            }
        }
    }
    if cfg.properties.contains(&PropertyKind::Width) {
        let mut w = gaussian_width_mc(
            |rng| synthesis_unit(rng, &frame, cfg.s).0,
            cfg.samples,
            cfg.samples,
            derive_seed(cfg.seed, &[ESTIMATOR_STREAM]),
        )?;
        w.s = cfg.s;
        w.big_n = frame.cols();
        out.push(w);
    }
    Ok(out)
}

pub fn write_props<W: Write>(mut w: W, rows: &[PropertyEstimate]) -> Result<()> {
    writeln!(w, "{PROPS_HEADER}")?;
    for e in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            e.property,
            e.m,
            e.n,
            e.big_n,
            e.s,
            e.param,
            e.samples,
            e.max,
            e.median,
            e.violation_count,
            e.seed
        )?;
    }
    Ok(())
}
