//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use d2dshare::cli::experiments::{build_table, Experiment, RunOptions};
use d2dshare::cli::table::Cell;
use d2dshare::cli::Config;
use d2dshare::coverage::{cellular_coverage, d2d_coverage};
use d2dshare::game::{sharing_gain, trace_is_monotone, Game, SolverSettings};
use d2dshare::mode_selection::select_modes;
use d2dshare::model::{Scenario, REFERENCE_BS_DENSITY};
use d2dshare::montecarlo::{estimate_coverage, estimate_retention, McSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            lines: Vec::new(),
        }
    }

    /// Records a sub-check and its outcome.
    fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.lines
            .push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
    }

    fn within(&mut self, started: Instant, limit: Duration) {
        let t = started.elapsed();
        self.check(t < limit, format!("runtime {t:.2?} < {limit:?}"));
    }
}

fn asymmetric() -> Scenario {
    let mut s = Scenario::reference();
    s.operators[1].lambda_d = 0.8 * REFERENCE_BS_DENSITY;
    s
}

/// ₂F₁(1, b; 2-2/a; -γ) from its Euler integral. With c - b = 1 the
/// integral reduces to `b ∫₀¹ t^{b-1}/(1+γt) dt`, and `t = s^{1/b}` turns it
/// into `∫₀¹ ds / (1 + γ s^{1/b})`, integrated by composite Simpson.
fn cellular_oracle(gamma: f64, alpha: f64, a: f64) -> f64 {
    let p = a / (a - 2.0);
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f = |s: f64| 1.0 / (1.0 + gamma * s.powf(p));
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let hyp = acc * h / 3.0;
    1.0 / (1.0 + alpha * 2.0 * gamma / (a - 2.0) * hyp)
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for a in [3.0, 3.76, 4.0] {
        for alpha in [0.3, 1.0] {
            for k in 0..=40 {
                let gamma = 10f64.powf(-2.0 + k as f64 / 10.0);
                let got = cellular_coverage(gamma, alpha, a).unwrap();
                worst = worst.max((got - cellular_oracle(gamma, alpha, a)).abs());
            }
        }
    }
    o.check(
        worst < 1e-6,
        format!("max |P_c - oracle| = {worst:.3e} < 1e-6"),
    );
    let spot = cellular_coverage(1.0, 1.0, 4.0).unwrap();
    o.check(
        (spot - 0.56010).abs() <= 1e-5,
        format!("a=4, alpha=1, gamma=1: {spot:.7} = 0.56010 +- 1e-5"),
    );
    o.within(t0, Duration::from_secs(5));
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let s = Scenario::reference();
    let modes = select_modes(&s, 0).shared;
    let settings = McSettings {
        trials: 10_000,
        ..McSettings::default()
    };
    let gammas = [0.1, 1.0, 10.0];
    let est = estimate_coverage(&s, 1.0, &gammas, &settings, 0).unwrap();
    for e in &est {
        let analytic = d2d_coverage(
            e.gamma,
            1.0,
            modes.q,
            s.shared.lambda,
            modes.delta,
            &s.shared,
        )
        .unwrap();
        let diff = e.coverage - analytic;
        o.check(
            diff.abs() <= 0.02,
            format!(
                "gamma={}: analytic {analytic:.4}, empirical {:.4} [{:.4}, {:.4}], |diff| {:.4} <= 0.02",
                e.gamma,
                e.coverage,
                e.ci_lo,
                e.ci_hi,
                diff.abs()
            ),
        );
    }
    // noise only: η = 10 at full bandwidth
    let mut quiet = Scenario::reference();
    quiet.shared.lambda = 0.0;
    quiet.shared.noise_dbm =
        quiet.shared.pt_d_dbm - quiet.shared.pl_d2d.loss_db(quiet.shared.d).unwrap() - 10.0;
    let e = estimate_coverage(&quiet, 1.0, &[1.0], &settings, 0).unwrap()[0];
    let want = (-0.1f64).exp();
    o.check(
        e.ci_lo <= want && want <= e.ci_hi,
        format!(
            "noise only: e^-0.1 = {want:.4} in [{:.4}, {:.4}]",
            e.ci_lo, e.ci_hi
        ),
    );
    o.within(t0, Duration::from_secs(60));
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let s = Scenario::reference();
    let settings = McSettings::default();
    let cases = [
        ("multi-operator", s.shared.lambda, s.shared.eps_dbm),
        (
            "intra-operator",
            s.operators[0].lambda_d,
            s.operators[0].eps_d_dbm,
        ),
    ];
    for (name, lambda, eps) in cases {
        let r = estimate_retention(lambda, eps, &s.shared, 200, &settings, 0).unwrap();
        let diff = (r.fraction - r.analytic).abs();
        o.check(
            diff <= 0.015,
            format!(
                "{name}: closed form {:.4}, empirical {:.4} ({} of {}), |diff| {diff:.4} <= 0.015",
                r.analytic, r.fraction, r.retained, r.total
            ),
        );
    }
    o.within(t0, Duration::from_secs(30));
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let g = Game::new(&Scenario::reference(), SolverSettings::default()).unwrap();
    let report = g.verify_properties(10, 1e-4);
    let count = |f: &dyn Fn(&d2dshare::game::DiagnosticRow) -> bool| {
        report.rows.iter().filter(|r| !f(r)).count()
    };
    let own = count(&|r| r.own < 0.0);
    let cross = count(&|r| r.cross < 0.0);
    let dom = count(&|r| r.own.abs() > r.cross.abs());
    let constraint = count(&|r| r.constraint_concave);
    o.check(
        report.rows.len() == 200,
        format!("{} grid points (2 operators x 10 x 10)", report.rows.len()),
    );
    o.check(own == 0, format!("d2U/dbeta_i^2 < 0: {own} violations"));
    o.check(
        cross == 0,
        format!("d2U/dbeta_i dbeta_j < 0: {cross} violations"),
    );
    o.check(dom == 0, format!("|own| > |cross|: {dom} violations"));
    o.check(
        constraint == 0,
        format!("constraint curvature < 0: {constraint} violations"),
    );
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let settings = SolverSettings::default();
    for (name, s) in [
        ("symmetric", Scenario::reference()),
        ("asymmetric", asymmetric()),
    ] {
        let g = Game::new(&s, settings).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let (mut max_iter, mut monotone, mut order_gap) = (0, true, 0.0f64);
        let mut nes = Vec::new();
        for _ in 0..20 {
            let init = (
                rng.random_range(0.0..=g.players[0].region.upper),
                rng.random_range(0.0..=g.players[1].region.upper),
            );
            let st = g.find_equilibrium(init).unwrap();
            max_iter = max_iter.max(st.trace.len() - 1);
            monotone &= trace_is_monotone(&st.trace, 1e-7);
            let other = g.find_equilibrium_ordered(init, 1).unwrap();
            order_gap = order_gap
                .max((st.ne.0 - other.ne.0).abs())
                .max((st.ne.1 - other.ne.1).abs());
            nes.push(st.ne);
        }
        let spread = |f: fn(&(f64, f64)) -> f64| {
            let v: Vec<f64> = nes.iter().map(f).collect();
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        let spread = spread(|p| p.0).max(spread(|p| p.1));
        o.check(
            max_iter <= 30,
            format!("{name}: at most {max_iter} iterations <= 30"),
        );
        o.check(
            spread < 1e-4,
            format!("{name}: NE spread {spread:.2e} < 1e-4"),
        );
        o.check(
            monotone,
            format!("{name}: traces monotone in opposite directions after iteration 1"),
        );
        o.check(
            order_gap < 1e-4,
            format!("{name}: move-order gap {order_gap:.2e} < 1e-4"),
        );
    }
    o.within(t0, Duration::from_secs(120));
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let st = Game::new(&Scenario::reference(), SolverSettings::default())
        .unwrap()
        .find_equilibrium((0.0, 0.0))
        .unwrap();
    let gap = (st.ne.0 - st.ne.1).abs();
    o.check(
        gap < 1e-5,
        format!(
            "beta* = ({:.6}, {:.6}), |beta_1* - beta_2*| = {gap:.2e} < 1e-5",
            st.ne.0, st.ne.1
        ),
    );
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let settings = SolverSettings::default();
    let reference = Game::new(&Scenario::reference(), settings).unwrap();

    let br = reference.players[0].best_response(0.0, settings.br_tol);
    o.check(
        (0.14..=0.34).contains(&br),
        format!("first best response of MNO 1 at beta_2 = 0: {br:.4} in [0.14, 0.34]"),
    );

    let st = Game::new(&asymmetric(), settings)
        .unwrap()
        .find_equilibrium((0.0, 0.0))
        .unwrap();
    let g = sharing_gain(&st);
    o.check(
        st.ne.1 > st.ne.0 && g.0 > 0.0 && g.1 > 0.0,
        format!(
            "lambda_2d = 0.8 lambda_b: beta* = ({:.4}, {:.4}), gains ({:.4}, {:.4}); need beta_2* > beta_1*, gains > 0",
            st.ne.0, st.ne.1, g.0, g.1
        ),
    );

    for ratio in [1.3, 1.4, 1.5, 1.6] {
        let mut s = Scenario::reference();
        s.operators[1].lambda_d = ratio * REFERENCE_BS_DENSITY;
        let st = Game::new(&s, settings)
            .unwrap()
            .find_equilibrium((0.0, 0.0))
            .unwrap();
        let g = sharing_gain(&st);
        o.check(
            st.ne.1 == 0.0 && g.0 > 0.0,
            format!(
                "lambda_2d = {ratio} lambda_b: beta_2* = {:.4} (need 0), gain_1 = {:.4} (need > 0)",
                st.ne.1, g.0
            ),
        );
    }

    let st = reference.find_equilibrium((0.0, 0.0)).unwrap();
    let g = sharing_gain(&st);
    o.check(
        (0.25..=0.75).contains(&g.0) && (0.25..=0.75).contains(&g.1),
        format!(
            "symmetric gain at eps = -72 dBm: ({:.4}, {:.4}) in [0.25, 0.75]",
            g.0, g.1
        ),
    );
    o
}

fn column(table: &d2dshare::cli::table::Table, name: &str) -> Vec<f64> {
    let j = table
        .header
        .iter()
        .position(|h| *h == name)
        .expect("column");
    table
        .rows
        .iter()
        .map(|r| match r[j] {
            Cell::Num(x) => x,
            ref c => panic!("non-numeric cell {c:?}"),
        })
        .collect()
}

/// Sign changes of the discrete differences after 3-point smoothing.
fn sign_changes(xs: &[f64]) -> usize {
    let smooth: Vec<f64> = xs.windows(3).map(|w| (w[0] + w[1] + w[2]) / 3.0).collect();
    let signs: Vec<f64> = smooth
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d != 0.0)
        .map(f64::signum)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    for (name, s) in [
        ("symmetric", Scenario::reference()),
        ("asymmetric", asymmetric()),
    ] {
        let cfg = Config {
            operators: s.operators,
            shared: s.shared,
            ..Config::default()
        };
        let betas = build_table(&cfg, Experiment::BetaVsEps, RunOptions::default()).unwrap();
        let gains = build_table(&cfg, Experiment::GainVsEps, RunOptions::default()).unwrap();
        for (table, col) in [
            (&betas, "beta_1_star"),
            (&betas, "beta_2_star"),
            (&gains, "gain_1"),
            (&gains, "gain_2"),
        ] {
            let xs = column(table, col);
            let n = sign_changes(&xs);
            o.check(
                n <= 1,
                format!(
                    "{name} {col}(eps): {n} sign changes <= 1 (eps=-80: {:.6}, eps=-60: {:.6})",
                    xs[0],
                    xs[xs.len() - 1]
                ),
            );
        }
    }
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let bin = env!("CARGO_BIN_EXE_d2dshare");
    let config: PathBuf =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/section4_asymmetric.json");
    let dir = tempfile::tempdir().unwrap();
    for exp in Experiment::ALL {
        let mut outputs = Vec::new();
        for workers in [1, 4, 8] {
            let out = dir.path().join(format!("{}_{workers}.csv", exp.name()));
            let status = Command::new(bin)
                .arg("--config")
                .arg(&config)
                .args(["--experiment", exp.name(), "--seed", "7", "--workers"])
                .arg(workers.to_string())
                .arg("--output")
                .arg(&out)
                .status()
                .unwrap();
            outputs.push(if status.success() {
                std::fs::read(&out).ok()
            } else {
                None
            });
        }
        let same = outputs[0].is_some() && outputs.iter().all(|x| *x == outputs[0]);
        o.check(
            same,
            format!("{}: identical CSV for 1, 4, 8 workers", exp.name()),
        );
    }
    o
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "cellular coverage matches hypergeometric Euler-integral quadrature",
            criterion_1,
        ),
        ("D2D coverage matches Monte Carlo", criterion_2),
        (
            "Matern retention matches interference thinning",
            criterion_3,
        ),
        (
            "concavity, sub-modularity and dominance on a 10x10 grid",
            criterion_4,
        ),
        (
            "unique NE, monotone convergence, order invariance",
            criterion_5,
        ),
        ("symmetric scenario gives equal contributions", criterion_6),
        ("sanity windows of the reference evaluation", criterion_7),
        (
            "unimodal shapes over the mode selection threshold",
            criterion_8,
        ),
        ("byte-identical CSVs across worker counts", criterion_9),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = match std::panic::catch_unwind(run) {
            Ok(o) => o,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Outcome {
                    pass: false,
                    lines: vec![format!("FAIL panicked: {msg}")],
                }
            }
        };
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {title} ({:.1?})",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            t0.elapsed()
        );
        for line in &outcome.lines {
            println!("    {line}");
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
