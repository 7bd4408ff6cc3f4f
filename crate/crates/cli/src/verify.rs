//! Randomized and analytic verification suites.

use std::f64::consts::PI;
use std::fmt;

use clap::ValueEnum;
use mixchan::channels::{
    choi_matrix, dilate, microscopic_family, mix, verify_cpt, ChannelFamily, MicroscopicModel, MixtureSpec,
    CHOI_EIG_TOL, TRACE_RESIDUAL_TOL,
};
use mixchan::distinguish::{monte_carlo_discriminate, p_max, HelstromEnsemble};
use mixchan::infoflow::{flow_balance_check, info_flow, marginals_lemma_check, CONSERVATION_TOL, RATE_TOL};
use mixchan::nonmarkov::{
    distinguishability_series, kink_aware_grid, nm_measure, verify_subadditivity, SearchConfig, TimeGrid,
    MARKOV_TOL,
};
use mixchan::qmath::random::{random_hermitian, random_state, random_traceless_hermitian, random_weights};
use mixchan::qmath::{partial_trace, trace_norm, CMatrix, QState, TensorLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::presets::PRESETS;

/// Seed used when none is given on the command line.
pub const DEFAULT_SEED: u64 = 20_240_517;

pub const ADDITIVITY_TOL: f64 = 1e-10;
pub const MICROSCOPIC_TOL: f64 = 1e-10;
pub const CURVE_TOL: f64 = 1e-9;
pub const RADICAL_TOL: f64 = 1e-10;
pub const MONTE_CARLO_SIGMAS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Cpt,
    Additivity,
    Subadditivity,
    Lemma,
    Bounds,
    Microscopic,
    Montecarlo,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Cpt => "cpt",
            Suite::Additivity => "additivity",
            Suite::Subadditivity => "subadditivity",
            Suite::Lemma => "lemma",
            Suite::Bounds => "bounds",
            Suite::Microscopic => "microscopic",
            Suite::Montecarlo => "montecarlo",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Cpt,
                Suite::Additivity,
                Suite::Subadditivity,
                Suite::Lemma,
                Suite::Bounds,
                Suite::Microscopic,
                Suite::Montecarlo,
            ],
            s => vec![s],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} (seed {})", self.suite.name(), self.seed)?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        write!(
            f,
            "  {} checks, {} passed, {} failed",
            self.checks.len(),
            self.checks.len() - self.failures(),
            self.failures()
        )
    }
}

/// Runs `suite` (every suite for [`Suite::All`]).
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<SuiteReport>, CliError> {
    suite
        .members()
        .into_iter()
        .map(|s| {
            let checks = match s {
                Suite::Cpt => cpt_suite()?,
                Suite::Additivity => additivity_suite(seed)?,
                Suite::Subadditivity => subadditivity_suite(seed)?,
                Suite::Lemma => lemma_suite(seed)?,
                Suite::Bounds => bounds_suite(seed)?,
                Suite::Microscopic => microscopic_suite(seed)?,
                Suite::Montecarlo => montecarlo_suite(seed)?,
                Suite::All => unreachable!("expanded above"),
            };
            Ok(SuiteReport { suite: s, seed, checks })
        })
        .collect()
}

fn rng_for(seed: u64, suite: Suite) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite as u64);
    rng
}

fn dephasing_pair(g: (f64, f64), l: (f64, f64), q1: f64) -> Result<MixtureSpec, CliError> {
    Ok(MixtureSpec::new(
        vec![q1, 1.0 - q1],
        vec![ChannelFamily::dephasing(g.0, l.0)?, ChannelFamily::dephasing(g.1, l.1)?],
    )?)
}

fn y_states() -> (QState, QState) {
    (
        QState::from_bloch([0.0, 1.0, 0.0]).expect("pure state"),
        QState::from_bloch([0.0, -1.0, 0.0]).expect("pure state"),
    )
}

/// The worked mixture: `γ = 1/3` for both components, `λ = (π/2, 0)`, equal weights.
pub fn worked_spec() -> MixtureSpec {
    dephasing_pair((1.0 / 3.0, 1.0 / 3.0), (PI / 2.0, 0.0), 0.5).expect("valid parameters")
}

/// Times `start, …, end` with `n` points.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
        .collect()
}

fn max_abs_diff(a: &[f64], b: impl Fn(usize) -> f64) -> f64 {
    a.iter().enumerate().map(|(k, v)| (v - b(k)).abs()).fold(0.0, f64::max)
}

/// Every family the tool can build, with representative parameters.
pub fn built_in_families() -> Result<Vec<(String, ChannelFamily)>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let sm = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])?;
    let mut out = vec![
        ("identity".to_string(), ChannelFamily::identity(2)),
        ("dephasing".to_string(), ChannelFamily::dephasing(1.0 / 3.0, PI / 2.0)?),
        ("unitary".to_string(), ChannelFamily::unitary(random_hermitian(&mut rng, 2))?),
        ("amplitude-damping".to_string(), ChannelFamily::amplitude_damping(0.4)?),
        (
            "lindblad".to_string(),
            ChannelFamily::lindblad(&random_hermitian(&mut rng, 2), &[(0.3, sm), (0.1, CMatrix::sigma_z())])?,
        ),
        (
            "microscopic-component".to_string(),
            ChannelFamily::coupled(2, random_hermitian(&mut rng, 4), QState::basis(2, 0))?,
        ),
    ];
    let model = random_model(&mut rng, 2)?;
    out.push(("microscopic-dilation".to_string(), microscopic_family(model)?));
    for p in PRESETS {
        let s = p.scenario()?;
        out.push((format!("{} mixture", p.name), mix(&s.spec)));
        out.push((format!("{} dilation", p.name), dilate(&s.spec)));
    }
    Ok(out)
}

fn cpt_suite() -> Result<Vec<CheckOutcome>, CliError> {
    let times = linspace(0.0, 10.0, 20);
    built_in_families()?
        .into_iter()
        .map(|(name, fam)| {
            let r = verify_cpt(&fam, &times)?;
            Ok(CheckOutcome::new(
                format!("cpt {name}"),
                r.passed(),
                format!(
                    "{} times, min Choi eigenvalue {:.3e} (>= -{CHOI_EIG_TOL:e}), worst trace residual {:.3e} (<= {TRACE_RESIDUAL_TOL:e})",
                    times.len(),
                    r.min_choi_eigenvalue(),
                    r.worst_trace_residual()
                ),
            ))
        })
        .collect()
}

fn random_dephasing_mixture<R: Rng>(rng: &mut R, n: usize) -> Result<MixtureSpec, CliError> {
    let comps = (0..n)
        .map(|_| ChannelFamily::dephasing(rng.gen_range(0.0..1.0), rng.gen_range(-2.0 * PI..2.0 * PI)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MixtureSpec::new(random_weights(rng, n), comps)?)
}

fn additivity_suite(seed: u64) -> Result<Vec<CheckOutcome>, CliError> {
    const MIXTURES: usize = 200;
    const TIMES: usize = 5;
    let mut rng = rng_for(seed, Suite::Additivity);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..MIXTURES {
        let n = rng.gen_range(2..=4);
        let spec = random_dephasing_mixture(&mut rng, n)?;
        let x = random_traceless_hermitian(&mut rng, 2);
        let lambda = dilate(&spec);
        for _ in 0..TIMES {
            let t = rng.gen_range(0.0..10.0);
            let lhs = trace_norm(&lambda.apply_operator(&x, t)?)?;
            let rhs: f64 = spec
                .weights()
                .iter()
                .zip(spec.components())
                .map(|(q, c)| Ok(q * trace_norm(&c.apply_operator(&x, t)?)?))
                .sum::<mixchan::Result<f64>>()?;
            let r = (lhs - rhs).abs();
            worst = worst.max(r);
            if r > ADDITIVITY_TOL {
                failures += 1;
            }
        }
    }
    Ok(vec![CheckOutcome::new(
        "trace-norm additivity of the dilation",
        failures == 0,
        format!(
            "{MIXTURES} mixtures x {TIMES} times, max residual {worst:.3e} (<= {ADDITIVITY_TOL:e}), {failures} failures"
        ),
    )])
}

/// A component for the subadditivity suite: a dephasing semigroup, or a
/// two-term dephasing mixture that may itself show backflow.
fn random_component<R: Rng>(rng: &mut R) -> Result<(ChannelFamily, bool), CliError> {
    if rng.gen_bool(0.5) {
        let c = ChannelFamily::dephasing(rng.gen_range(0.02..1.0), rng.gen_range(-2.0 * PI..2.0 * PI))?;
        Ok((c, true))
    } else {
        let inner = dephasing_pair(
            (rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5)),
            (rng.gen_range(-2.0 * PI..2.0 * PI), rng.gen_range(-2.0 * PI..2.0 * PI)),
            rng.gen_range(0.1..0.9),
        )?;
        Ok((mix(&inner), false))
    }
}

fn subadditivity_suite(seed: u64) -> Result<Vec<CheckOutcome>, CliError> {
    const MIXTURES: usize = 100;
    let mut rng = rng_for(seed, Suite::Subadditivity);
    let grid = TimeGrid::uniform(0.0, 8.0, 1e-2)?;
    let search = SearchConfig {
        seed,
        ..SearchConfig::quick()
    };
    let (mut violations, mut worst_gap) = (0, f64::NEG_INFINITY);
    let (mut markov_cases, mut markov_failures, mut worst_markov) = (0, 0, 0.0f64);
    for _ in 0..MIXTURES {
        let (c1, semi1) = random_component(&mut rng)?;
        let (c2, semi2) = random_component(&mut rng)?;
        let q1 = rng.gen_range(0.05..0.95);
        let spec = MixtureSpec::new(vec![q1, 1.0 - q1], vec![c1, c2])?;
        let r = verify_subadditivity(&spec, &grid, &search)?;
        worst_gap = worst_gap.max(r.dilated_value - r.bound);
        if !r.holds {
            violations += 1;
        }
        if semi1 && semi2 {
            markov_cases += 1;
            worst_markov = worst_markov.max(r.dilated_value);
            if r.dilated_value > MARKOV_TOL {
                markov_failures += 1;
            }
        }
    }
    Ok(vec![
        CheckOutcome::new(
            "measure subadditivity",
            violations == 0,
            format!(
                "{MIXTURES} mixtures, max N(dilation) - sum q_i N(component) = {worst_gap:.3e} (<= 1e-6), {violations} violations"
            ),
        ),
        CheckOutcome::new(
            "markovian components give a markovian dilation",
            markov_failures == 0 && markov_cases > 0,
            format!("{markov_cases} cases, max N(dilation) = {worst_markov:.3e} (<= {MARKOV_TOL:e}), {markov_failures} failures"),
        ),
    ])
}

fn lemma_suite(seed: u64) -> Result<Vec<CheckOutcome>, CliError> {
    const INSTANCES: usize = 500;
    let mut rng = rng_for(seed, Suite::Lemma);
    let mut out = Vec::new();
    for n in 2..=4 {
        let mut failures = 0;
        let mut worst: f64 = if n == 2 { 0.0 } else { f64::NEG_INFINITY };
        for _ in 0..INSTANCES {
            let d = rng.gen_range(2..=3);
            let w = random_weights(&mut rng, n);
            let states: Vec<QState> = (0..n).map(|_| random_state(&mut rng, d)).collect();
            let r = marginals_lemma_check(&w, &states)?;
            if n == 2 {
                worst = worst.max((r.lhs - r.rhs).abs());
            } else {
                worst = worst.max(r.lhs - r.rhs);
            }
            if !r.passed() {
                failures += 1;
            }
        }
        let (name, what) = if n == 2 {
            ("marginals lemma n=2 equality".to_string(), format!("max |lhs - rhs| {worst:.3e}"))
        } else {
            (format!("marginals lemma n={n} bound"), format!("max lhs - rhs {worst:.3e}"))
        };
        out.push(CheckOutcome::new(
            name,
            failures == 0,
            format!("{INSTANCES} instances, {what}, {failures} failures"),
        ));
    }
    Ok(out)
}

/// Closed-form information curves of the worked mixture on `[0, 6]`.
pub fn worked_curve_errors() -> Result<[f64; 4], CliError> {
    let spec = worked_spec();
    let grid = kink_aware_grid(&spec, &TimeGrid::uniform(0.0, 6.0, 1e-3)?);
    let (a, b) = y_states();
    let f = info_flow(&spec, (&a, &b), &grid)?;
    let t = grid.points();
    let decay = |k: usize| (-t[k] / 3.0).exp();
    let e_int = max_abs_diff(&f.i_int, |k| decay(k) * (PI * t[k] / 4.0).cos().abs());
    let e_tot = max_abs_diff(&f.i_tot, decay);
    let e_bound = max_abs_diff(&f.corr_bound, |k| decay(k) * (PI * t[k] / 4.0).sin().abs());
    let k2 = t.iter().position(|&x| x == 2.0).expect("t = 2 on the grid");
    Ok([e_int, e_tot, e_bound, f.i_int[k2]])
}

/// `|k(t)|` for `k(t) = q1 e^{-(γ1+iλ1)t} + q2 e^{-(γ2+iλ2)t}`.
pub fn coherence_modulus(g: (f64, f64), l: (f64, f64), q1: f64, t: f64) -> f64 {
    let q2 = 1.0 - q1;
    let a = q1 * q1 * (-2.0 * g.0 * t).exp();
    let b = q2 * q2 * (-2.0 * g.1 * t).exp();
    let c = 2.0 * q1 * q2 * (-(g.0 + g.1) * t).exp() * ((l.0 - l.1) * t).cos();
    (a + b + c).max(0.0).sqrt()
}

/// Largest deviation from [`coherence_modulus`] over `draws` random mixtures
/// at `times` random times each.
pub fn radical_formula_error(seed: u64, draws: usize, times: usize) -> Result<f64, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = y_states();
    let ens = HelstromEnsemble::equal(a, b)?;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let g = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let l = (rng.gen_range(-2.0 * PI..2.0 * PI), rng.gen_range(-2.0 * PI..2.0 * PI));
        let q1 = rng.gen_range(0.0..1.0);
        let mut ts: Vec<f64> = (0..times).map(|_| rng.gen_range(0.0..10.0)).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let grid = TimeGrid::new(ts)?;
        let d = distinguishability_series(&mix(&dephasing_pair(g, l, q1)?), &ens, &grid)?;
        for (t, v) in grid.points().iter().zip(&d) {
            worst = worst.max((v - coherence_modulus(g, l, q1, *t)).abs());
        }
    }
    Ok(worst)
}

fn bounds_suite(seed: u64) -> Result<Vec<CheckOutcome>, CliError> {
    let mut out = Vec::new();
    let [e_int, e_tot, e_bound, at_two] = worked_curve_errors()?;
    out.push(CheckOutcome::new(
        "worked example closed forms",
        e_int <= CURVE_TOL && e_tot <= CURVE_TOL && e_bound <= CURVE_TOL,
        format!("max errors I_int {e_int:.2e}, I_tot {e_tot:.2e}, bound {e_bound:.2e} (<= {CURVE_TOL:e})"),
    ));
    out.push(CheckOutcome::new(
        "worked example zero crossing",
        at_two <= CURVE_TOL,
        format!("I_int(2) = {at_two:.2e}"),
    ));
    let worst = radical_formula_error(seed, 50, 100)?;
    out.push(CheckOutcome::new(
        "equatorial distinguishability radical formula",
        worst <= RADICAL_TOL,
        format!("50 mixtures x 100 times, max error {worst:.2e} (<= {RADICAL_TOL:e})"),
    ));

    let ru = dephasing_pair((0.0, 0.0), (2.0 * PI, 0.0), 0.5)?;
    let grid = kink_aware_grid(&ru, &TimeGrid::uniform(0.0, 6.0, 1e-3)?);
    let (a, b) = y_states();
    let fb = flow_balance_check(&ru, (&a, &b), &grid)?;
    out.push(CheckOutcome::new(
        "random-unitary information conservation",
        fb.passed && fb.all_unitary,
        format!(
            "I_tot variation {:.2e} (<= {CONSERVATION_TOL:e}), max |dI_int + dI_ext| {:.2e} (<= {RATE_TOL:e})",
            fb.i_tot_variation, fb.max_abs_total_rate
        ),
    ));
    let est = nm_measure(&mix(&ru), &HelstromEnsemble::equal(a.clone(), b.clone())?, &grid)?;
    out.push(CheckOutcome::new(
        "random-unitary mixture is non-markovian",
        est.value > 0.01,
        format!("N = {:.6} on [0, 6]", est.value),
    ));

    let mut rng = rng_for(seed, Suite::Bounds);
    let g = TimeGrid::uniform(0.0, 8.0, 1e-2)?;
    let (mut worst_excess, mut worst_neg, mut failures) = (f64::NEG_INFINITY, 0.0f64, 0);
    let mut balance_failures = 0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=3);
        let spec = random_dephasing_mixture(&mut rng, n)?;
        let (s1, s2) = (random_state(&mut rng, 2), random_state(&mut rng, 2));
        let f = info_flow(&spec, (&s1, &s2), &g)?;
        let excess = f.max_bound_excess();
        let neg = f.i_ext.iter().fold(0.0f64, |m, &v| m.min(v));
        worst_excess = worst_excess.max(excess);
        worst_neg = worst_neg.min(neg);
        if excess > CONSERVATION_TOL || neg < -1e-12 || f.i_ext[0].abs() > 1e-12 {
            failures += 1;
        }
        if !flow_balance_check(&spec, (&s1, &s2), &g)?.passed {
            balance_failures += 1;
        }
    }
    out.push(CheckOutcome::new(
        "external information bounded by correlations",
        failures == 0,
        format!("50 mixtures, max I_ext - bound {worst_excess:.2e}, min I_ext {worst_neg:.2e}, {failures} failures"),
    ));
    out.push(CheckOutcome::new(
        "total information non-increasing for markovian components",
        balance_failures == 0,
        format!("50 mixtures, {balance_failures} failures"),
    ));
    Ok(out)
}

fn random_model<R: Rng>(rng: &mut R, n: usize) -> Result<MicroscopicModel, CliError> {
    let hs = (0..n).map(|_| random_hermitian(rng, 4)).collect();
    let envs = (0..n).map(|_| random_state(rng, 2)).collect();
    Ok(MicroscopicModel::new(2, hs, envs, random_weights(rng, n))?)
}

fn microscopic_suite(seed: u64) -> Result<Vec<CheckOutcome>, CliError> {
    const MODELS: usize = 50;
    let mut rng = rng_for(seed, Suite::Microscopic);
    let times = linspace(0.0, 5.0, 20);
    let (mut w_dil, mut w_mix, mut w_prop) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..MODELS {
        let n = rng.gen_range(2..=3);
        let model = random_model(&mut rng, n)?;
        let spec = model.mixture_spec()?;
        let micro = microscopic_family(model.clone())?;
        let mixture = mix(&spec);
        let dilation = dilate(&spec);
        let layout = TensorLayout::new(vec![2, n])?;
        let mixchan::channels::Representation::Microscopic(fam) = micro.representation() else {
            unreachable!("microscopic family");
        };
        for &t in &times {
            let cm = choi_matrix(&micro, t)?;
            w_dil = w_dil.max(cm.max_abs_diff(&choi_matrix(&dilation, t)?));
            for i in 0..2 {
                for j in 0..2 {
                    let x = CMatrix::unit(2, i, j);
                    let reduced = partial_trace(&micro.apply_operator(&x, t)?, &layout, &[1])?;
                    w_mix = w_mix.max(reduced.max_abs_diff(&mixture.apply_operator(&x, t)?));
                }
            }
            w_prop = w_prop.max(fam.propagator(t).max_abs_diff(&model.factorized_propagator(t)?));
        }
    }
    let detail = |w: f64| format!("{MODELS} models x {} times, max entrywise deviation {w:.2e} (<= {MICROSCOPIC_TOL:e})", times.len());
    Ok(vec![
        CheckOutcome::new("microscopic model equals the dilation", w_dil <= MICROSCOPIC_TOL, detail(w_dil)),
        CheckOutcome::new("ancilla trace gives the mixture", w_mix <= MICROSCOPIC_TOL, detail(w_mix)),
        CheckOutcome::new("propagator factorizes", w_prop <= MICROSCOPIC_TOL, detail(w_prop)),
    ])
}

/// Monte Carlo discrimination of the worked pair at a few times.
pub fn montecarlo_checks(seed: u64, trials: u64, times: &[f64], spec: &MixtureSpec, ens: &HelstromEnsemble) -> Result<Vec<CheckOutcome>, CliError> {
    let phi = mix(spec);
    times
        .iter()
        .map(|&t| {
            let r = monte_carlo_discriminate(ens, &phi, t, trials, seed)?;
            let p = p_max(ens, &phi, t)?;
            let limit = MONTE_CARLO_SIGMAS * (p * (1.0 - p) / trials as f64).sqrt();
            let dev = (r.empirical_rate - p).abs();
            Ok(CheckOutcome::new(
                format!("monte carlo t={t}"),
                dev <= limit,
                format!(
                    "{trials} trials, empirical {:.5}, P_max {p:.5}, |diff| {dev:.2e} (<= {limit:.2e})",
                    r.empirical_rate
                ),
            ))
        })
        .collect()
}

fn montecarlo_suite(seed: u64) -> Result<Vec<CheckOutcome>, CliError> {
    let (a, b) = y_states();
    let ens = HelstromEnsemble::equal(a, b)?;
    montecarlo_checks(seed, 100_000, &[0.5, 1.0, 2.0, 3.0], &worked_spec(), &ens)
}
