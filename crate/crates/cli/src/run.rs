//! The `run` pipeline: series, measures, checks and artifacts.

use std::path::{Path, PathBuf};

use mixchan::channels::{dilate, mix, verify_cpt, ChannelFamily};
use mixchan::distinguish::HelstromEnsemble;
use mixchan::infoflow::{flow_balance_check, info_flow_helstrom, CONSERVATION_TOL};
use mixchan::nonmarkov::{
    dephasing_kink_times, distinguishability_series, finite_difference, nm_measure, nm_measure_optimized,
    verify_subadditivity, NMEstimate, SearchConfig, SearchStrategy,
};
use serde_json::{json, Value};

use crate::config::{Artifact, Scenario};
use crate::error::CliError;
use crate::output;
use crate::presets::Preset;
use crate::verify::{linspace, montecarlo_checks, CheckOutcome};

pub const VERSION: &str = concat!("mixchan ", env!("CARGO_PKG_VERSION"));

/// Slack for the optimized measure against the configured pair.
const DOMINANCE_TOL: f64 = 1e-9;
const EXT_NONNEG_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub name: String,
    pub csv: String,
    pub summary: Value,
    pub checks: Vec<CheckOutcome>,
}

impl RunArtifacts {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Writes the requested artifacts to `dir`, creating it if needed.
    pub fn write(&self, dir: &Path, outputs: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::new();
        for a in outputs {
            let (path, body) = match a {
                Artifact::Csv => (dir.join(format!("{}.csv", self.name)), self.csv.clone()),
                Artifact::Json => {
                    let mut s = serde_json::to_string_pretty(&self.summary).expect("serializable summary");
                    s.push('\n');
                    (dir.join(format!("{}.json", self.name)), s)
                }
            };
            std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn strategy_name(s: SearchStrategy) -> &'static str {
    match s {
        SearchStrategy::Auto => "auto",
        SearchStrategy::Antipodal => "antipodal",
        SearchStrategy::RandomRestart => "random-restart",
    }
}

fn intervals_json(iv: &[(f64, f64)]) -> Value {
    iv.iter().map(|(a, b)| json!([a, b])).collect()
}

fn pair_json(e: &HelstromEnsemble) -> Value {
    let describe = |s: &mixchan::qmath::QState| match s.bloch_vector() {
        Some(b) => json!({ "bloch": b }),
        None => json!({ "dim": s.dim() }),
    };
    json!({ "p1": e.p1(), "rho1": describe(e.rho1()), "rho2": describe(e.rho2()) })
}

fn estimate_json(est: &NMEstimate) -> Value {
    let mut v = json!({
        "value": est.value,
        "ensemble": pair_json(&est.ensemble),
        "positive_intervals": intervals_json(&est.positive_intervals),
        "horizon_distinguishability": est.horizon_distinguishability,
    });
    if let Some(s) = &est.search {
        v["search"] = json!({
            "strategy": strategy_name(s.strategy),
            "candidates_evaluated": s.candidates_evaluated,
            "restricted_value": s.restricted_value,
            "unrestricted_value": s.unrestricted_value,
            "p1_scan": s.p1_scan.iter().map(|(p, x)| json!([p, x])).collect::<Value>(),
        });
    }
    v
}

fn cpt_checks(scenario: &Scenario) -> Result<Vec<CheckOutcome>, CliError> {
    let n = scenario.checks.cpt_samples;
    if n == 0 {
        return Ok(Vec::new());
    }
    let times = if n == 1 {
        vec![scenario.grid.start]
    } else {
        linspace(scenario.grid.start, scenario.grid.end, n)
    };
    let mut families: Vec<(String, ChannelFamily)> = scenario
        .spec
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("component {} ({})", i + 1, c.kind()), c.clone()))
        .collect();
    families.push(("mixture".into(), mix(&scenario.spec)));
    families.push(("dilation".into(), dilate(&scenario.spec)));
    families
        .into_iter()
        .map(|(name, fam)| {
            let r = verify_cpt(&fam, &times)?;
            Ok(CheckOutcome::new(
                format!("cpt {name}"),
                r.passed(),
                format!(
                    "{n} times, min Choi eigenvalue {:.3e}, worst trace residual {:.3e}",
                    r.min_choi_eigenvalue(),
                    r.worst_trace_residual()
                ),
            ))
        })
        .collect()
}

/// Computes every series, measure and check for `scenario`.
pub fn execute(scenario: &Scenario, preset: Option<&Preset>) -> Result<RunArtifacts, CliError> {
    let grid = scenario.time_grid();
    let spec = &scenario.spec;
    let ens = &scenario.ensemble;
    let phi = mix(spec);

    let equal = HelstromEnsemble::equal(ens.rho1().clone(), ens.rho2().clone())?;
    let d_mix = distinguishability_series(&phi, &equal, &grid)?;
    let sigma = finite_difference(&grid, &d_mix)?;
    let flow = info_flow_helstrom(spec, ens, &grid)?;
    let csv = output::csv([
        grid.points(),
        &d_mix,
        &sigma,
        &flow.i_int,
        &flow.i_ext,
        &flow.i_tot,
        &flow.corr_bound,
    ]);

    let mut checks = cpt_checks(scenario)?;

    let excess = flow.max_bound_excess();
    let min_ext = flow.i_ext.iter().copied().fold(f64::INFINITY, f64::min);
    let starts_at_zero = grid.t_start() == 0.0;
    checks.push(CheckOutcome::new(
        "external information bound",
        excess <= CONSERVATION_TOL && min_ext >= -EXT_NONNEG_TOL && (!starts_at_zero || flow.i_ext[0].abs() <= EXT_NONNEG_TOL),
        format!("max I_ext - bound {excess:.3e}, min I_ext {min_ext:.3e}"),
    ));

    let fb = flow_balance_check(spec, (ens.rho1(), ens.rho2()), &grid)?;
    checks.push(if fb.components_markovian {
        CheckOutcome::new(
            "total information balance",
            fb.passed,
            format!(
                "max dI_tot/dt {:.3e}, backflow covered by the ancilla: {}{}",
                fb.max_total_rate,
                fb.backflow_from_ancilla,
                if fb.all_unitary {
                    format!(", I_tot variation {:.3e}", fb.i_tot_variation)
                } else {
                    String::new()
                }
            ),
        )
    } else {
        CheckOutcome::new(
            "total information balance",
            true,
            "not applicable: a component is itself non-markovian",
        )
    });

    let pair = nm_measure(&phi, ens, &grid)?;
    let search = SearchConfig {
        p1: if scenario.search.optimize_p1 { 0.5 } else { ens.p1() },
        ..scenario.search.clone()
    };
    let optimized = match nm_measure_optimized(&phi, &grid, &search) {
        Ok(est) => Some(est),
        Err(mixchan::Error::Numerical(msg)) => {
            checks.push(CheckOutcome::new("optimizer validation", false, msg));
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(est) = &optimized {
        if let Some(s) = &est.search {
            if let Some(u) = s.unrestricted_value {
                checks.push(CheckOutcome::new(
                    "optimizer validation",
                    true,
                    format!("restricted {:.12}, unrestricted {u:.12}", s.restricted_value),
                ));
            }
        }
        if search.p1 == ens.p1() {
            checks.push(CheckOutcome::new(
                "optimizer dominates the configured pair",
                est.value >= pair.value - DOMINANCE_TOL,
                format!("optimized {:.12}, configured pair {:.12}", est.value, pair.value),
            ));
        }
    }

    let subadditivity = if scenario.checks.subadditivity {
        let cfg = SearchConfig {
            p1: 0.5,
            optimize_p1: false,
            ..scenario.search.clone()
        };
        match verify_subadditivity(spec, &grid, &cfg) {
            Ok(r) => {
                checks.push(CheckOutcome::new(
                    "measure subadditivity",
                    r.passed(),
                    format!(
                        "N(dilation) {:.9}, weighted component sum {:.9}, markovian components: {}",
                        r.dilated_value, r.bound, r.components_markovian
                    ),
                ));
                json!({
                    "dilated_value": r.dilated_value,
                    "component_values": r.component_values,
                    "bound": r.bound,
                    "components_markovian": r.components_markovian,
                    "passed": r.passed(),
                })
            }
            Err(mixchan::Error::Numerical(msg)) => {
                checks.push(CheckOutcome::new("measure subadditivity", false, msg));
                Value::Null
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        Value::Null
    };

    if scenario.checks.montecarlo_trials > 0 {
        checks.extend(montecarlo_checks(
            scenario.seed,
            scenario.checks.montecarlo_trials,
            &scenario.checks.montecarlo_times,
            spec,
            ens,
        )?);
    }

    let passed = checks.iter().all(|c| c.passed);
    let summary = json!({
        "version": VERSION,
        "scenario": scenario.name,
        "preset": preset.map(|p| json!({ "name": p.name, "reproduces": p.reproduces })),
        "seed": scenario.seed,
        "grid": {
            "start": scenario.grid.start,
            "end": scenario.grid.end,
            "step": scenario.grid.step,
            "points": grid.len(),
            "kink_times": dephasing_kink_times(spec, grid.t_end()),
        },
        "measures": {
            "configured_pair": estimate_json(&pair),
            "optimized": optimized.as_ref().map(estimate_json),
            "subadditivity": subadditivity,
        },
        "checks": checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail })).collect::<Value>(),
        "passed": passed,
        "config": scenario.echo,
    });

    Ok(RunArtifacts {
        name: scenario.name.clone(),
        csv,
        summary,
        checks,
    })
}
