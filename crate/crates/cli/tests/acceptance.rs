//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mixchan::channels::mix;
use mixchan::distinguish::HelstromEnsemble;
use mixchan::infoflow::flow_balance_check;
use mixchan::nonmarkov::{kink_aware_grid, nm_measure, nm_measure_optimized, SearchConfig, TimeGrid};
use mixchan::qmath::QState;
use mixchan_cli::presets::PRESETS;
use mixchan_cli::verify::{
    montecarlo_checks, radical_formula_error, run_suite, worked_curve_errors, worked_spec, Suite, DEFAULT_SEED,
};
use mixchan_cli::CliError;

/// Dense-grid value of the measure for the random-unitary preset on `[0, 12]`.
const RANDOM_UNITARY_MEASURE: f64 = 12.0;

type Criterion = (&'static str, fn() -> Result<Verdict, CliError>);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Verdict, CliError> {
    Ok(Verdict {
        passed,
        detail: detail.into(),
    })
}

fn y_ensemble() -> HelstromEnsemble {
    HelstromEnsemble::equal(
        QState::from_bloch([0.0, 1.0, 0.0]).unwrap(),
        QState::from_bloch([0.0, -1.0, 0.0]).unwrap(),
    )
    .unwrap()
}

fn suite(s: Suite) -> Result<Verdict, CliError> {
    let reports = run_suite(s, DEFAULT_SEED)?;
    let passed = reports.iter().all(|r| r.passed());
    let detail = reports
        .iter()
        .flat_map(|r| r.checks.iter().map(|c| format!("{} ({})", c.detail, c.name)))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(passed, detail)
}

fn worked_curves() -> Result<Verdict, CliError> {
    let start = Instant::now();
    let [e_int, e_tot, e_bound, _] = worked_curve_errors()?;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        e_int <= 1e-9 && e_tot <= 1e-9 && e_bound <= 1e-9 && secs < 5.0,
        format!("max errors I_int {e_int:.2e}, I_tot {e_tot:.2e}, bound {e_bound:.2e} (<= 1e-9), {secs:.2} s (< 5 s)"),
    )
}

fn zero_crossing() -> Result<Verdict, CliError> {
    let [.., at_two] = worked_curve_errors()?;
    verdict(at_two <= 1e-9, format!("I_int(2) = {at_two:.2e} (<= 1e-9)"))
}

fn radical() -> Result<Verdict, CliError> {
    let worst = radical_formula_error(DEFAULT_SEED, 50, 100)?;
    verdict(worst <= 1e-10, format!("50 draws x 100 times, max error {worst:.2e} (<= 1e-10)"))
}

fn monte_carlo() -> Result<Verdict, CliError> {
    let start = Instant::now();
    let checks = montecarlo_checks(DEFAULT_SEED, 100_000, &[0.5, 1.0, 2.0, 3.0], &worked_spec(), &y_ensemble())?;
    let secs = start.elapsed().as_secs_f64();
    let passed = checks.iter().all(|c| c.passed) && secs < 10.0;
    let detail = checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ");
    verdict(passed, format!("{detail}; {secs:.2} s (< 10 s)"))
}

fn random_unitary() -> Result<Verdict, CliError> {
    let spec = PRESETS.iter().find(|p| p.name == "random-unitary").unwrap().scenario()?.spec;
    let (a, b) = (y_ensemble().rho1().clone(), y_ensemble().rho2().clone());
    let g6 = kink_aware_grid(&spec, &TimeGrid::uniform(0.0, 6.0, 1e-3)?);
    let fb = flow_balance_check(&spec, (&a, &b), &g6)?;
    let g12 = kink_aware_grid(&spec, &TimeGrid::uniform(0.0, 12.0, 1e-3)?);
    let n = nm_measure(&mix(&spec), &y_ensemble(), &g12)?.value;
    verdict(
        fb.i_tot_variation <= 1e-10 && fb.max_abs_total_rate <= 1e-8 && n > 0.01 && (n - RANDOM_UNITARY_MEASURE).abs() <= 1e-9,
        format!(
            "I_tot variation {:.2e} (<= 1e-10), max |dI_int + dI_ext| {:.2e} (<= 1e-8), N = {n:.10} (> 0.01, regression {RANDOM_UNITARY_MEASURE})",
            fb.i_tot_variation, fb.max_abs_total_rate
        ),
    )
}

fn optimizer() -> Result<Verdict, CliError> {
    let mut passed = true;
    let mut parts = Vec::new();
    for p in PRESETS {
        let s = p.scenario()?;
        let grid = s.time_grid();
        let phi = mix(&s.spec);
        let reference = nm_measure(&phi, &y_ensemble(), &grid)?.value;
        let est = nm_measure_optimized(&phi, &grid, &SearchConfig::default())?;
        let summary = est.search.as_ref().unwrap();
        let unrestricted = summary.unrestricted_value.unwrap();
        let rel = (unrestricted - summary.restricted_value).abs() / summary.restricted_value.max(f64::MIN_POSITIVE);
        let z = est.ensemble.rho1().bloch_vector().map_or(f64::INFINITY, |r| r[2].abs());
        let ok = rel <= 1e-6 && est.value >= reference - 1e-9 && z <= 1e-6;
        passed &= ok;
        parts.push(format!(
            "{}: optimized {:.12}, (I+-sigma_y)/2 {:.12}, relative gap to unrestricted {rel:.1e}, |r_z| {z:.1e}",
            p.name, est.value, reference
        ));
    }
    verdict(passed, parts.join("; "))
}

const DETERMINISM_CONFIG: &str = r#"
seed = 42

[scenario]
name = "determinism"

[mixture]
weights = [0.5, 0.5]

[[mixture.components]]
kind = "dephasing"
gamma = 0.3333333333333333
lambda = 1.5707963267948966

[[mixture.components]]
kind = "dephasing"
gamma = 0.3333333333333333

[ensemble]
pair = { bloch = [[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]] }

[grid]
end = 12.0
step = 0.001

[checks]
subadditivity = false
montecarlo_trials = 20000
montecarlo_times = [1.0]
"#;

fn run_binary(cfg: &Path, out: &Path, threads: &str) -> Result<Vec<u8>, CliError> {
    let status = Command::new(env!("CARGO_BIN_EXE_mixchan"))
        .args(["--format", "csv", "--out-dir"])
        .arg(out)
        .arg("run")
        .arg(cfg)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .map_err(|e| CliError::Usage(e.to_string()))?
        .status;
    if !status.success() {
        return Err(CliError::Usage(format!("run exited with {status}")));
    }
    std::fs::read(out.join("determinism.csv")).map_err(|e| CliError::Usage(e.to_string()))
}

fn determinism() -> Result<Verdict, CliError> {
    let dir = tempfile::tempdir().map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg = dir.path().join("determinism.toml");
    std::fs::write(&cfg, DETERMINISM_CONFIG).map_err(|e| CliError::Usage(e.to_string()))?;
    let a = run_binary(&cfg, &dir.path().join("a"), "1")?;
    let b = run_binary(&cfg, &dir.path().join("b"), "1")?;
    let c = run_binary(&cfg, &dir.path().join("c"), "4")?;
    verdict(
        a == b && a == c && !a.is_empty(),
        format!(
            "{} bytes; repeat identical: {}, 1 vs 4 threads identical: {}",
            a.len(),
            a == b,
            a == c
        ),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("worked-example information curves", worked_curves),
        ("internal information vanishes at t = 2", zero_crossing),
        ("coherence modulus radical formula", radical),
        ("trace-norm additivity of the dilation", || suite(Suite::Additivity)),
        ("measure subadditivity", || suite(Suite::Subadditivity)),
        ("microscopic equivalence", || suite(Suite::Microscopic)),
        ("monte carlo discrimination", monte_carlo),
        ("marginals lemma", || suite(Suite::Lemma)),
        ("random-unitary mixture", random_unitary),
        ("optimizer validity", optimizer),
        ("cpt suite", || suite(Suite::Cpt)),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check().unwrap_or_else(|e| Verdict {
            passed: false,
            detail: format!("error: {e}"),
        });
        if !v.passed {
            failures += 1;
        }
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] criterion {:>2} {name} ({:.1} s): {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
