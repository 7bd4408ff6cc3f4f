//! TOML scenario files.
//!
//! ```toml
//! seed = 7
//! outputs = ["csv", "json"]
//!
//! [scenario]
//! name = "worked"
//!
//! [mixture]
//! weights = [0.5, 0.5]
//!
//! [[mixture.components]]
//! kind = "dephasing"
//! gamma = 0.3333333333333333
//! lambda = 1.5707963267948966
//!
//! [[mixture.components]]
//! kind = "unitary"
//! hamiltonian = [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-0.5, 0.0]]]
//!
//! [ensemble]
//! p1 = 0.5
//! pair = { bloch = [[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]] }
//!
//! [grid]
//! start = 0.0
//! end = 12.0
//! step = 0.001
//! ```
//!
//! Complex matrices are row-major lists of rows of `[re, im]` pairs.

use std::ops::Range;
use std::path::Path;

use mixchan::channels::{ChannelFamily, MixtureSpec};
use mixchan::distinguish::HelstromEnsemble;
use mixchan::nonmarkov::{kink_aware_grid, SearchConfig, SearchStrategy, TimeGrid};
use mixchan::qmath::{CMatrix, QState, C64};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{line_column, CliError};

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    outputs: Option<Spanned<Vec<String>>>,
    scenario: RawScenario,
    mixture: Spanned<RawMixture>,
    ensemble: Spanned<RawEnsemble>,
    grid: Spanned<RawGrid>,
    search: Option<Spanned<RawSearch>>,
    checks: Option<Spanned<RawChecks>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixture {
    weights: Spanned<Vec<f64>>,
    components: Vec<Spanned<RawComponent>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawComponent {
    Identity {
        dim: Option<usize>,
    },
    Dephasing {
        gamma: Option<f64>,
        lambda: Option<f64>,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    Unitary {
        hamiltonian: RawMatrix,
    },
    Lindblad {
        hamiltonian: RawMatrix,
        #[serde(default)]
        jumps: Vec<RawJump>,
    },
    /// `Tr_E[U_t (ρ ⊗ ρ_E) U_t†]` with `hamiltonian` on `S ⊗ E`.
    Microscopic {
        hamiltonian: RawMatrix,
        env_dim: usize,
        env_state: Option<RawMatrix>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJump {
    rate: f64,
    operator: RawMatrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    p1: Option<f64>,
    pair: RawPair,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    bloch: Option<[[f64; 3]; 2]>,
    matrices: Option<[RawMatrix; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    start: Option<f64>,
    end: f64,
    step: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    strategy: Option<String>,
    polar_points: Option<usize>,
    azimuth_points: Option<usize>,
    refine_rounds: Option<usize>,
    golden_iterations: Option<usize>,
    random_pairs: Option<usize>,
    validate: Option<bool>,
    optimize_p1: Option<bool>,
    p1_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChecks {
    cpt_samples: Option<usize>,
    subadditivity: Option<bool>,
    montecarlo_trials: Option<u64>,
    montecarlo_times: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Artifact {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridParams {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChecksConfig {
    /// Times sampled on `[start, end]` for the CPT check.
    pub cpt_samples: usize,
    pub subadditivity: bool,
    /// Monte Carlo discrimination runs; zero trials disables the check.
    pub montecarlo_trials: u64,
    pub montecarlo_times: Vec<f64>,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            cpt_samples: 20,
            subadditivity: true,
            montecarlo_trials: 0,
            montecarlo_times: Vec::new(),
        }
    }
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub outputs: Vec<Artifact>,
    pub spec: MixtureSpec,
    pub ensemble: HelstromEnsemble,
    pub grid: GridParams,
    pub search: SearchConfig,
    pub checks: ChecksConfig,
    /// The configuration as parsed, for the run summary.
    pub echo: serde_json::Value,
}

struct Ctx<'a> {
    src: &'a str,
    origin: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> CliError {
        let (line, column) = line_column(self.src, span.start);
        CliError::Config {
            origin: self.origin.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn matrix(&self, span: &Range<usize>, raw: &RawMatrix, what: &str) -> Result<CMatrix, CliError> {
        let rows: Vec<Vec<C64>> = raw
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        CMatrix::from_rows(&rows).map_err(|e| self.err(span.clone(), format!("{what}: {e}")))
    }
}

impl Scenario {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    /// Parses and validates a scenario. `origin` names the source in
    /// diagnostics.
    pub fn parse(src: &str, origin: &str) -> Result<Self, CliError> {
        let ctx = Ctx { src, origin };
        let raw: RawConfig = toml::from_str(src).map_err(|e| {
            let span = e.span().unwrap_or(0..0);
            ctx.err(span, e.message().trim().to_string())
        })?;
        let name = &raw.scenario.name;
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            let span = src.find("name").map_or(0..0, |i| i..i);
            return Err(ctx.err(span, format!("scenario.name '{name}' cannot be used as a file name")));
        }
        let echo_value: toml::Value = toml::from_str(src).map_err(|e| ctx.err(0..0, e.to_string()))?;
        let echo = serde_json::to_value(&echo_value).map_err(|e| ctx.err(0..0, e.to_string()))?;

        let outputs = match &raw.outputs {
            None => vec![Artifact::Csv, Artifact::Json],
            Some(list) => {
                let mut out = Vec::new();
                for s in list.get_ref() {
                    let a = match s.as_str() {
                        "csv" => Artifact::Csv,
                        "json" => Artifact::Json,
                        other => {
                            return Err(ctx.err(list.span(), format!("unknown output '{other}' (expected csv or json)")))
                        }
                    };
                    if !out.contains(&a) {
                        out.push(a);
                    }
                }
                out
            }
        };

        let mixture = raw.mixture.get_ref();
        let mut components = Vec::new();
        for c in &mixture.components {
            components.push(build_component(&ctx, c)?);
        }
        let spec = MixtureSpec::new(mixture.weights.get_ref().clone(), components).map_err(|e| {
            let span = match e {
                mixchan::Error::Dimension(_) => raw.mixture.span(),
                _ => mixture.weights.span(),
            };
            ctx.err(span, e.to_string())
        })?;

        let ens = raw.ensemble.get_ref();
        let ens_span = raw.ensemble.span();
        let (rho1, rho2) = match (&ens.pair.bloch, &ens.pair.matrices) {
            (Some(b), None) => {
                let s1 = QState::from_bloch(b[0]).map_err(|e| ctx.err(ens_span.clone(), e.to_string()))?;
                let s2 = QState::from_bloch(b[1]).map_err(|e| ctx.err(ens_span.clone(), e.to_string()))?;
                (s1, s2)
            }
            (None, Some(m)) => {
                let m1 = ctx.matrix(&ens_span, &m[0], "first pair state")?;
                let m2 = ctx.matrix(&ens_span, &m[1], "second pair state")?;
                let s1 = QState::new(m1).map_err(|e| ctx.err(ens_span.clone(), e.to_string()))?;
                let s2 = QState::new(m2).map_err(|e| ctx.err(ens_span.clone(), e.to_string()))?;
                (s1, s2)
            }
            _ => {
                return Err(ctx.err(
                    ens_span,
                    "ensemble.pair needs exactly one of `bloch` or `matrices`",
                ))
            }
        };
        if rho1.dim() != spec.system_dim() {
            return Err(ctx.err(
                ens_span,
                format!(
                    "pair states have dimension {} but the mixture acts on dimension {}",
                    rho1.dim(),
                    spec.system_dim()
                ),
            ));
        }
        let ensemble = HelstromEnsemble::new(ens.p1.unwrap_or(0.5), rho1, rho2)
            .map_err(|e| ctx.err(ens_span.clone(), e.to_string()))?;

        let g = raw.grid.get_ref();
        let grid = GridParams {
            start: g.start.unwrap_or(0.0),
            end: g.end,
            step: g.step,
        };
        TimeGrid::uniform(grid.start, grid.end, grid.step).map_err(|e| ctx.err(raw.grid.span(), e.to_string()))?;

        let seed = raw.seed.unwrap_or(0);
        let search = match &raw.search {
            None => SearchConfig {
                seed,
                ..SearchConfig::default()
            },
            Some(s) => build_search(&ctx, s, seed)?,
        };

        let mut checks = ChecksConfig::default();
        if let Some(c) = &raw.checks {
            let r = c.get_ref();
            if let Some(n) = r.cpt_samples {
                checks.cpt_samples = n;
            }
            if let Some(b) = r.subadditivity {
                checks.subadditivity = b;
            }
            if let Some(n) = r.montecarlo_trials {
                checks.montecarlo_trials = n;
            }
            if let Some(ts) = &r.montecarlo_times {
                if ts.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    return Err(ctx.err(c.span(), "montecarlo_times must be non-negative"));
                }
                checks.montecarlo_times = ts.clone();
            }
            if checks.montecarlo_trials > 0 && checks.montecarlo_times.is_empty() {
                return Err(ctx.err(c.span(), "montecarlo_trials given without montecarlo_times"));
            }
        }

        Ok(Scenario {
            name: raw.scenario.name,
            seed,
            outputs,
            spec,
            ensemble,
            grid,
            search,
            checks,
            echo,
        })
    }

    /// Applies command-line overrides.
    pub fn override_with(&mut self, seed: Option<u64>, grid_step: Option<f64>) -> Result<(), CliError> {
        if let Some(s) = seed {
            self.seed = s;
            self.search.seed = s;
        }
        if let Some(step) = grid_step {
            TimeGrid::uniform(self.grid.start, self.grid.end, step).map_err(|e| CliError::Usage(e.to_string()))?;
            self.grid.step = step;
        }
        Ok(())
    }

    /// Uniform grid augmented with the known kink times of the scenario.
    pub fn time_grid(&self) -> TimeGrid {
        let base = TimeGrid::uniform(self.grid.start, self.grid.end, self.grid.step).expect("validated grid");
        kink_aware_grid(&self.spec, &base)
    }
}

fn build_component(ctx: &Ctx, c: &Spanned<RawComponent>) -> Result<ChannelFamily, CliError> {
    let span = c.span();
    let wrap = |r: mixchan::Result<ChannelFamily>| r.map_err(|e| ctx.err(span.clone(), e.to_string()));
    match c.get_ref() {
        RawComponent::Identity { dim } => Ok(ChannelFamily::identity(dim.unwrap_or(2))),
        RawComponent::Dephasing { gamma, lambda } => {
            wrap(ChannelFamily::dephasing(gamma.unwrap_or(0.0), lambda.unwrap_or(0.0)))
        }
        RawComponent::AmplitudeDamping { gamma } => wrap(ChannelFamily::amplitude_damping(*gamma)),
        RawComponent::Unitary { hamiltonian } => {
            wrap(ChannelFamily::unitary(ctx.matrix(&span, hamiltonian, "hamiltonian")?))
        }
        RawComponent::Lindblad { hamiltonian, jumps } => {
            let h = ctx.matrix(&span, hamiltonian, "hamiltonian")?;
            let mut ops = Vec::new();
            for j in jumps {
                ops.push((j.rate, ctx.matrix(&span, &j.operator, "jump operator")?));
            }
            wrap(ChannelFamily::lindblad(&h, &ops))
        }
        RawComponent::Microscopic {
            hamiltonian,
            env_dim,
            env_state,
        } => {
            let h = ctx.matrix(&span, hamiltonian, "hamiltonian")?;
            if *env_dim == 0 || h.rows() % env_dim != 0 {
                return Err(ctx.err(span, format!("hamiltonian size {} is not a multiple of env_dim {env_dim}", h.rows())));
            }
            let env = match env_state {
                Some(m) => QState::new(ctx.matrix(&span, m, "env_state")?).map_err(|e| ctx.err(span.clone(), e.to_string()))?,
                None => QState::basis(*env_dim, 0),
            };
            if env.dim() != *env_dim {
                return Err(ctx.err(span, "env_state dimension differs from env_dim"));
            }
            let system_dim = h.rows() / env_dim;
            wrap(ChannelFamily::coupled(system_dim, h, env))
        }
    }
}

fn build_search(ctx: &Ctx, s: &Spanned<RawSearch>, seed: u64) -> Result<SearchConfig, CliError> {
    let r = s.get_ref();
    let d = SearchConfig::default();
    let strategy = match r.strategy.as_deref() {
        None | Some("auto") => SearchStrategy::Auto,
        Some("antipodal") => SearchStrategy::Antipodal,
        Some("random-restart") => SearchStrategy::RandomRestart,
        Some(other) => {
            return Err(ctx.err(
                s.span(),
                format!("unknown search strategy '{other}' (expected auto, antipodal or random-restart)"),
            ))
        }
    };
    let cfg = SearchConfig {
        strategy,
        polar_points: r.polar_points.unwrap_or(d.polar_points),
        azimuth_points: r.azimuth_points.unwrap_or(d.azimuth_points),
        refine_rounds: r.refine_rounds.unwrap_or(d.refine_rounds),
        golden_iterations: r.golden_iterations.unwrap_or(d.golden_iterations),
        random_pairs: r.random_pairs.unwrap_or(d.random_pairs),
        seed,
        validate: r.validate.unwrap_or(d.validate),
        p1: d.p1,
        optimize_p1: r.optimize_p1.unwrap_or(d.optimize_p1),
        p1_points: r.p1_points.unwrap_or(d.p1_points),
    };
    cfg.validate().map_err(|e| ctx.err(s.span(), e.to_string()))?;
    Ok(cfg)
}
