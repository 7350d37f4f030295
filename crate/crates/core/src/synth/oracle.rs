use std::fmt;
use std::fs;
use std::path::Path;

use log::warn;

use super::SynthWorld;
use crate::analysis::{averaged_signed_r2, spearman, CultureView, PipelineParams};
use crate::bias::{score_set, Metric};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    pub metric: Metric,
    pub pipeline: PipelineParams,
    /// Required Spearman correlation of measured vs. injected bias per theme.
    pub min_spearman: f64,
    /// Required |signed R²| of a theme against its own statistic.
    pub min_abs_r2: f64,
    /// Ceiling on |signed R²| for unrelated pairs and filler sets.
    pub ceiling: f64,
    /// Filler-set trials per statistic.
    pub null_seeds: usize,
    pub null_set_size: usize,
    /// Share of filler trials that must stay under the ceiling.
    pub null_pass_rate: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            metric: Metric::AxisProjection,
            pipeline: PipelineParams::default(),
            min_spearman: 0.8,
            min_abs_r2: 0.6,
            ceiling: 0.25,
            null_seeds: 20,
            null_set_size: 10,
            null_pass_rate: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub value: f64,
    /// Human-readable pass condition, e.g. `>= 0.8`.
    pub condition: String,
    pub passed: bool,
}

impl fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {:.4} (want {})", self.name, self.value, self.condition)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub seed: u64,
    pub metric: Metric,
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &OracleCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// `check,value,condition,passed` rows preceded by `seed` and `metric` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["check", "value", "condition", "passed"]).map_err(err)?;
        w.write_record(["seed", &self.seed.to_string(), "", ""]).map_err(err)?;
        w.write_record(["metric", self.metric.as_str(), "", ""]).map_err(err)?;
        for c in &self.checks {
            w.write_record([c.name.as_str(), &c.value.to_string(), &c.condition, &c.passed.to_string()])
                .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

fn check(name: String, value: f64, condition: String, passed: bool) -> OracleCheck {
    OracleCheck {
        name,
        value,
        condition,
        passed,
    }
}

/// Measured bias of each theme per culture, in `world.regions` order.
/// Cultures missing from `cultures` or lacking the theme's words yield `None`.
pub fn measured_bias(world: &SynthWorld, cultures: &[CultureView], metric: Metric) -> Vec<(String, Vec<Option<f64>>)> {
    world
        .theme_sets()
        .into_iter()
        .map(|set| {
            let vals = world
                .regions
                .iter()
                .map(|r| {
                    let c = cultures.iter().find(|c| &c.region == r)?;
                    score_set(&c.space, &c.axis, &set, metric).ok().map(|s| s.value)
                })
                .collect();
            (set.name.clone(), vals)
        })
        .collect()
}

/// Compares trained models of a synthetic world against its ground truth:
/// (a) measured vs. injected bias rank correlation per theme, (b) each theme
/// against its own statistic (sign and strength), (c) themes against other
/// themes' statistics and random filler sets against every statistic stay
/// under the ceiling.
pub fn pipeline_oracle_check(world: &SynthWorld, cultures: &[CultureView], params: &OracleParams) -> Result<OracleReport> {
    let pipeline = PipelineParams {
        metric: params.metric,
        ..params.pipeline.clone()
    };
    let mut checks = Vec::new();

    for (theme, measured) in measured_bias(world, cultures, params.metric) {
        let truth = &world.true_bias[&theme];
        let (x, y): (Vec<f64>, Vec<f64>) = measured
            .iter()
            .zip(truth)
            .filter_map(|(m, t)| m.map(|m| (m, *t)))
            .unzip();
        let rho = spearman(&x, &y).unwrap_or(f64::NAN);
        checks.push(check(
            format!("spearman/{theme}"),
            rho,
            format!(">= {}", params.min_spearman),
            rho >= params.min_spearman,
        ));
    }

    let sets = world.theme_sets();
    for (k, set) in sets.iter().enumerate() {
        for (j, stat) in world.stats.iter().enumerate() {
            let r2 = match averaged_signed_r2(set, cultures, stat, &pipeline) {
                Ok(r) => r.signed_r2,
                Err(e) => {
                    warn!("{} vs {}: {e}", set.name, stat.name);
                    f64::NAN
                }
            };
            if j == k {
                let slope = world.derivations[j].slope;
                let ok = r2.signum() == slope.signum() && r2.abs() >= params.min_abs_r2;
                let sign = if slope > 0.0 { ">=" } else { "<=" };
                let bound = params.min_abs_r2 * slope.signum();
                checks.push(check(format!("r2/{}/{}", set.name, stat.name), r2, format!("{sign} {bound}"), ok));
            } else {
                checks.push(check(
                    format!("unrelated/{}/{}", set.name, stat.name),
                    r2,
                    format!("|r2| <= {}", params.ceiling),
                    r2.abs() <= params.ceiling,
                ));
            }
        }
    }

    for stat in &world.stats {
        let mut under = 0usize;
        for s in 0..params.null_seeds {
            let seed = derive_seed(world.spec.seed, &["null", &stat.name, &s.to_string()]);
            let set = world.filler_set(&format!("filler-{s}"), params.null_set_size, seed);
            let p = PipelineParams {
                seed,
                ..pipeline.clone()
            };
            match averaged_signed_r2(&set, cultures, stat, &p) {
                Ok(r) if r.signed_r2.abs() <= params.ceiling => under += 1,
                Ok(_) => {}
                Err(e) => warn!("filler set vs {}: {e}", stat.name),
            }
        }
        let rate = under as f64 / params.null_seeds.max(1) as f64;
        checks.push(check(
            format!("null/filler/{}", stat.name),
            rate,
            format!(">= {} of {} sets with |r2| <= {}", params.null_pass_rate, params.null_seeds, params.ceiling),
            rate >= params.null_pass_rate,
        ));
    }

    Ok(OracleReport {
        seed: world.spec.seed,
        metric: params.metric,
        checks,
    })
}
