//! Maximization of the measure over preparations.
//!
//! Qubit families are searched over antipodal Bloch pairs `(I ± n·σ)/2` on a
//! polar/azimuth grid followed by golden-section refinement; the restriction
//! is cross-checked against a coarse unrestricted set of pairs. Other
//! dimensions use random orthogonal pure pairs refined by small unitary
//! rotations.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::channels::ChannelFamily;
use crate::distinguish::{trial_rng, HelstromEnsemble};
use crate::error::{dim_err, Error, Result};
use crate::qmath::random::random_orthogonal_pair;
use crate::qmath::{unitary_exp, CMatrix, QState, C64};

use super::{increment_measure, NMEstimate, SampledFamily, TimeGrid};

/// Relative amount by which the unrestricted check may exceed the restricted
/// optimum before the search is reported as failed.
const VALIDATION_REL_TOL: f64 = 1e-6;
const VALIDATION_ABS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Antipodal pairs for qubits, random restarts otherwise.
    Auto,
    Antipodal,
    RandomRestart,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub strategy: SearchStrategy,
    /// Polar angles in `[0, π/2]`, endpoints included.
    pub polar_points: usize,
    /// Azimuths `2πk / azimuth_points`.
    pub azimuth_points: usize,
    /// Alternating golden-section passes over the two angles (or the
    /// number of unitary-rotation sweeps per step size on the generic path).
    pub refine_rounds: usize,
    pub golden_iterations: usize,
    pub random_pairs: usize,
    pub seed: u64,
    /// Cross-check the antipodal optimum against a coarse unrestricted set.
    pub validate: bool,
    /// Prior of the first state; `0.5` gives the plain trace distance.
    pub p1: f64,
    /// Also maximize over `p1` at the optimal pair.
    pub optimize_p1: bool,
    /// Scan points on `[0.025, 0.975]` before refinement.
    pub p1_points: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            strategy: SearchStrategy::Auto,
            polar_points: 17,
            azimuth_points: 8,
            refine_rounds: 2,
            golden_iterations: 30,
            random_pairs: 32,
            seed: 0,
            validate: true,
            p1: 0.5,
            optimize_p1: false,
            p1_points: 41,
        }
    }
}

impl SearchConfig {
    /// Smaller search for bulk property runs.
    pub fn quick() -> Self {
        SearchConfig {
            polar_points: 9,
            azimuth_points: 4,
            refine_rounds: 1,
            golden_iterations: 20,
            random_pairs: 16,
            validate: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("search config: {msg}")));
        if self.polar_points < 2 {
            return bad("polar_points must be at least 2");
        }
        if self.azimuth_points == 0 {
            return bad("azimuth_points must be positive");
        }
        if self.random_pairs == 0 {
            return bad("random_pairs must be positive");
        }
        if self.golden_iterations > 200 {
            return bad("golden_iterations must not exceed 200");
        }
        if !(0.0..=1.0).contains(&self.p1) {
            return bad("p1 must lie in [0, 1]");
        }
        if self.optimize_p1 && self.p1_points < 3 {
            return bad("p1_points must be at least 3");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchSummary {
    /// The strategy actually used.
    pub strategy: SearchStrategy,
    pub candidates_evaluated: usize,
    /// Best value over pairs at the configured `p1`.
    pub restricted_value: f64,
    /// Best value over the coarse unrestricted set, when validated.
    pub unrestricted_value: Option<f64>,
    /// `(p1, value)` scan at the optimal pair, when requested.
    pub p1_scan: Vec<(f64, f64)>,
}

struct Objective<'a> {
    sampled: &'a SampledFamily,
    grid: &'a TimeGrid,
    evaluations: AtomicUsize,
}

impl Objective<'_> {
    fn value(&self, e: &HelstromEnsemble) -> f64 {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let series = self
            .sampled
            .norm_series(&e.helstrom_matrix())
            .expect("ensemble dimension checked");
        increment_measure(self.grid, &series).0
    }
}

/// First index of the maximum, so ties resolve to the earliest candidate.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iterations: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iterations {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn bloch(theta: f64, phi: f64, r: f64) -> [f64; 3] {
    [
        r * theta.sin() * phi.cos(),
        r * theta.sin() * phi.sin(),
        r * theta.cos(),
    ]
}

fn antipodal(p1: f64, theta: f64, phi: f64) -> HelstromEnsemble {
    let n = bloch(theta, phi, 1.0);
    let m = [-n[0], -n[1], -n[2]];
    HelstromEnsemble::new(
        p1,
        QState::from_bloch(n).expect("unit Bloch vector"),
        QState::from_bloch(m).expect("unit Bloch vector"),
    )
    .expect("valid prior")
}

fn antipodal_search(obj: &Objective, cfg: &SearchConfig) -> (HelstromEnsemble, f64) {
    let mut angles = Vec::new();
    for i in 0..cfg.polar_points {
        let theta = 0.5 * PI * i as f64 / (cfg.polar_points - 1) as f64;
        let azimuths = if i == 0 { 1 } else { cfg.azimuth_points };
        for j in 0..azimuths {
            angles.push((theta, 2.0 * PI * j as f64 / cfg.azimuth_points as f64));
        }
    }
    let values: Vec<f64> = angles
        .par_iter()
        .map(|&(th, ph)| obj.value(&antipodal(cfg.p1, th, ph)))
        .collect();
    let k = argmax(&values);
    let (mut theta, mut phi) = angles[k];
    let mut best = values[k];

    let f = |th: f64, ph: f64| obj.value(&antipodal(cfg.p1, th, ph));
    let mut h_theta = 0.5 * PI / (cfg.polar_points - 1) as f64;
    let mut h_phi = PI / cfg.azimuth_points as f64;
    for _ in 0..cfg.refine_rounds {
        let (x, fx) = golden_max(
            |x| f(x, phi),
            (theta - h_theta).max(0.0),
            (theta + h_theta).min(PI),
            cfg.golden_iterations,
        );
        if fx > best {
            theta = x;
            best = fx;
        }
        if theta > 0.0 {
            let (y, fy) = golden_max(|y| f(theta, y), phi - h_phi, phi + h_phi, cfg.golden_iterations);
            if fy > best {
                phi = y;
                best = fy;
            }
        }
        h_theta *= 0.5;
        h_phi *= 0.5;
    }
    (antipodal(cfg.p1, theta, phi), best)
}

/// Orthonormal basis of the Hermitian `d×d` matrices (Frobenius product).
fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let s = 0.5f64.sqrt();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(CMatrix::unit(d, i, i));
        for j in (i + 1)..d {
            let mut x = CMatrix::zeros(d, d);
            x[(i, j)] = C64::new(s, 0.0);
            x[(j, i)] = C64::new(s, 0.0);
            out.push(x);
            let mut y = CMatrix::zeros(d, d);
            y[(i, j)] = C64::new(0.0, -s);
            y[(j, i)] = C64::new(0.0, s);
            out.push(y);
        }
    }
    out
}

fn random_restart_search(obj: &Objective, cfg: &SearchConfig, d: usize) -> (HelstromEnsemble, f64) {
    let candidates: Vec<(HelstromEnsemble, f64)> = (0..cfg.random_pairs as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(cfg.seed, k);
            let (a, b) = random_orthogonal_pair(&mut rng, d);
            let e = HelstromEnsemble::new(cfg.p1, a, b).expect("valid prior");
            let v = obj.value(&e);
            (e, v)
        })
        .collect();
    let values: Vec<f64> = candidates.iter().map(|c| c.1).collect();
    let k = argmax(&values);
    let (mut best_e, mut best) = candidates[k].clone();

    let generators = hermitian_basis(d);
    let sweeps = cfg.refine_rounds.max(1) * 4;
    let mut eps = 0.5;
    while eps >= 1e-3 {
        for _ in 0..sweeps {
            let mut improved = false;
            for g in &generators {
                for sign in [1.0, -1.0] {
                    let u = unitary_exp(g, sign * eps).expect("Hermitian generator");
                    let rotate = |s: &QState| QState::new_unchecked(s.matrix().conjugate_by(&u).hermitian_part());
                    let e = HelstromEnsemble::new(cfg.p1, rotate(best_e.rho1()), rotate(best_e.rho2()))
                        .expect("valid prior");
                    let v = obj.value(&e);
                    if v > best {
                        best = v;
                        best_e = e;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        eps *= 0.5;
    }
    (best_e, best)
}

/// Pure and mixed qubit states on a coarse lattice: the centre and radii
/// `{1, ½}` along polar angles `{0, π/4, π/2, 3π/4, π}` and azimuths that
/// are multiples of `π/2`.
fn coarse_qubit_states() -> Vec<QState> {
    let mut out = vec![QState::maximally_mixed(2)];
    for r in [1.0, 0.5] {
        for i in 0..5 {
            let theta = PI * i as f64 / 4.0;
            let azimuths = if i == 0 || i == 4 { 1 } else { 4 };
            for j in 0..azimuths {
                let phi = 0.5 * PI * j as f64;
                out.push(QState::from_bloch(bloch(theta, phi, r)).expect("inside the Bloch ball"));
            }
        }
    }
    out
}

fn unrestricted_check(obj: &Objective, p1: f64) -> f64 {
    let states = coarse_qubit_states();
    let ordered = p1 != 0.5;
    let mut pairs = Vec::new();
    for i in 0..states.len() {
        for j in 0..states.len() {
            if i != j && (ordered || i < j) {
                pairs.push((i, j));
            }
        }
    }
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let e = HelstromEnsemble::new(p1, states[i].clone(), states[j].clone()).expect("valid prior");
            obj.value(&e)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

fn scan_p1(obj: &Objective, cfg: &SearchConfig, pair: &HelstromEnsemble) -> (f64, f64, Vec<(f64, f64)>) {
    let n = cfg.p1_points;
    let ps: Vec<f64> = (0..n).map(|k| 0.025 + 0.95 * k as f64 / (n - 1) as f64).collect();
    let at = |p: f64| obj.value(&pair.with_p1(p).expect("p1 in range"));
    let scan: Vec<(f64, f64)> = ps.par_iter().map(|&p| (p, at(p))).collect();
    let values: Vec<f64> = scan.iter().map(|s| s.1).collect();
    let k = argmax(&values);
    let (mut p, mut best) = scan[k];
    let h = 0.95 / (n - 1) as f64;
    let (x, fx) = golden_max(at, (p - h).max(1e-6), (p + h).min(1.0 - 1e-6), cfg.golden_iterations);
    if fx > best {
        p = x;
        best = fx;
    }
    (p, best, scan)
}

/// Maximizes the increment-sum measure over preparations. The result carries
/// the best ensemble found and a [`SearchSummary`].
///
/// Fails with [`Error::Numerical`] when validation is enabled and the coarse
/// unrestricted search beats the antipodal optimum by more than a relative
/// `1e-6`.
pub fn nm_measure_optimized(family: &ChannelFamily, grid: &TimeGrid, search: &SearchConfig) -> Result<NMEstimate> {
    search.validate()?;
    let d = family.input_dim();
    let strategy = match search.strategy {
        SearchStrategy::Auto if d == 2 => SearchStrategy::Antipodal,
        SearchStrategy::Auto => SearchStrategy::RandomRestart,
        s => s,
    };
    if strategy == SearchStrategy::Antipodal && d != 2 {
        return dim_err(format!("antipodal search needs a qubit family, got dimension {d}"));
    }
    if d < 2 {
        return dim_err("pair search needs dimension at least 2");
    }
    let sampled = SampledFamily::new(family, grid)?;
    let obj = Objective {
        sampled: &sampled,
        grid,
        evaluations: AtomicUsize::new(0),
    };

    let (mut ensemble, restricted) = match strategy {
        SearchStrategy::Antipodal => antipodal_search(&obj, search),
        _ => random_restart_search(&obj, search, d),
    };

    let unrestricted_value = if search.validate && d == 2 {
        let u = unrestricted_check(&obj, search.p1);
        if u - restricted > VALIDATION_REL_TOL * restricted + VALIDATION_ABS_TOL {
            return Err(Error::Numerical(format!(
                "restricted pair search found {restricted:.12e} but the unrestricted check reached {u:.12e}"
            )));
        }
        Some(u)
    } else {
        None
    };

    let mut p1_scan = Vec::new();
    if search.optimize_p1 {
        let (p, _, scan) = scan_p1(&obj, search, &ensemble);
        p1_scan = scan;
        ensemble = ensemble.with_p1(p)?;
    }

    let series = sampled.norm_series(&ensemble.helstrom_matrix())?;
    let mut est = NMEstimate::from_series(ensemble, grid, &series);
    est.search = Some(SearchSummary {
        strategy,
        candidates_evaluated: obj.evaluations.load(Ordering::Relaxed),
        restricted_value: restricted,
        unrestricted_value,
        p1_scan,
    });
    Ok(est)
}
