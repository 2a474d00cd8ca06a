//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line.

use std::sync::OnceLock;

use camle::cmle::{omega_mu, omega_sigma, SufficientStats};
use camle::eval::{auc_roc, run_sensitivity_sweep, run_simulation, simulate_dataset, SimConfig, SimulationReport, SweepConfig};
use camle::specfn::r_lambert;
use camle::{constrained_mle, standard_mle, Afr, CamleConfig, KktCase, LabelEstimate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, Normal as StatrsNormal};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id} ({name}): {} - {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn desk_simulation() -> &'static SimulationReport<f64> {
    static REPORT: OnceLock<SimulationReport<f64>> = OnceLock::new();
    REPORT.get_or_init(|| run_simulation(&SimConfig::desk(2024)).unwrap())
}

#[test]
fn criterion_1_simulation_directionality() {
    let r = desk_simulation();
    let g = &r.guessed;
    let pass = g.camle.mu <= 0.6 * g.mle.mu && g.camle.sigma <= 0.7 * g.mle.sigma && g.mle.p <= g.camle.p;
    report(
        1,
        "guessed-label MAD directionality",
        pass,
        format!(
            "mu {:.4} vs {:.4} (ratio {:.3}), sigma {:.4} vs {:.4} (ratio {:.3}), p MLE {:.4} vs CAMLE {:.4}; {} of {} cells failed",
            g.camle.mu,
            g.mle.mu,
            g.camle.mu / g.mle.mu,
            g.camle.sigma,
            g.mle.sigma,
            g.camle.sigma / g.mle.sigma,
            g.mle.p,
            g.camle.p,
            r.n_failed,
            r.n_cells
        ),
    );
}

#[test]
fn criterion_2_simulation_true_label_agreement() {
    let t = &desk_simulation().true_labels;
    let rel = |a: f64, b: f64| (a - b).abs() / a.max(b);
    let (dm, ds, dp) = (rel(t.mle.mu, t.camle.mu), rel(t.mle.sigma, t.camle.sigma), rel(t.mle.p, t.camle.p));
    report(
        2,
        "true-label MAD agreement",
        dm <= 0.05 && ds <= 0.05 && dp <= 0.05,
        format!(
            "relative gaps mu {dm:.4}, sigma {ds:.4}, p {dp:.4} (MLE {:.4}/{:.4}/{:.4}, CAMLE {:.4}/{:.4}/{:.4})",
            t.mle.mu, t.mle.sigma, t.mle.p, t.camle.mu, t.camle.sigma, t.camle.p
        ),
    );
}

// ---------------------------------------------------------------------------
// independent oracle for the constrained problem

const Z_975: f64 = 1.959_963_984_540_054;

struct Oracle<'a> {
    x: &'a [f64],
    b: &'a [bool],
    afr: (f64, f64),
    p_bar: f64,
    w: f64,
    f_inf: f64,
}

impl<'a> Oracle<'a> {
    fn new(x: &'a [f64], b: &'a [bool], afr: (f64, f64)) -> Self {
        let n = x.len() as f64;
        let outside = x.iter().filter(|&&v| v < afr.0 || v > afr.1).count() as f64 / n;
        let z2 = Z_975 * Z_975;
        let denom = 1.0 + z2 / n;
        let p_bar = (outside + z2 / (2.0 * n)) / denom;
        let w = Z_975 / denom * (outside * (1.0 - outside) / n + z2 / (4.0 * n * n)).sqrt();
        let (lo, hi) = x.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        Oracle { x, b, afr, p_bar, w, f_inf: 1.0 / (10.0 * (hi - lo)) }
    }

    fn ll(&self, mu: f64, s2: f64, p: f64) -> f64 {
        let mut total = 0.0;
        for (&v, &l) in self.x.iter().zip(self.b) {
            total += if l {
                p.ln() + self.f_inf.ln()
            } else {
                (1.0 - p).ln() - 0.5 * (2.0 * std::f64::consts::PI * s2).ln() - (v - mu).powi(2) / (2.0 * s2)
            };
        }
        total
    }

    fn residual(&self, mu: f64, s2: f64, p: f64) -> f64 {
        let g = StatrsNormal::new(mu, s2.sqrt()).unwrap();
        let inside = g.cdf(self.afr.1) - g.cdf(self.afr.0);
        1.0 - (1.0 - p) * inside - self.p_bar
    }

    fn feasible(&self, mu: f64, s2: f64, p: f64) -> bool {
        self.residual(mu, s2, p).powi(2) <= self.w * self.w
    }

    /// Best feasible log-likelihood on a 30^3 grid, if any grid point is feasible.
    fn grid_max(&self) -> Option<f64> {
        let k = 30;
        let (lo, hi) = self.x.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        let range = hi - lo;
        let s_b = self.b.iter().filter(|&&l| l).count();
        let mut best: Option<f64> = None;
        for i in 0..k {
            let mu = lo + range * i as f64 / (k - 1) as f64;
            for j in 0..k {
                let s2 = (range / 1000.0).powi(2) * 1e6f64.powf(j as f64 / (k - 1) as f64);
                for q in 0..k {
                    let p = if s_b == 0 { 0.0 } else { (q as f64 + 0.5) / k as f64 };
                    if self.feasible(mu, s2, p) {
                        let v = self.ll(mu, s2, p);
                        best = Some(best.map_or(v, |b: f64| b.max(v)));
                    }
                    if s_b == 0 {
                        break;
                    }
                }
            }
        }
        best
    }
}

/// Guessed labels on simulated data; `None` when the normal-labeled points are degenerate.
fn guessed_instance(rng: &mut ChaCha8Rng, n: usize) -> Option<(Vec<f64>, LabelEstimate, Afr<f64>)> {
    let mu = rng.random_range(-5.0..5.0);
    let sigma = rng.random_range(0.1..2.0);
    let p = rng.random_range(0.05..0.95);
    let d = simulate_dataset(mu, sigma, p, n, rng.random()).ok()?;
    let mut b = LabelEstimate::new((0..n).map(|_| rng.random_bool(p)).collect());
    b.zero_inside(&d.x, &d.afr);
    standard_mle(&d.x, &b).ok()?;
    Some((d.x, b, d.afr))
}

#[test]
fn criterion_3_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut instances, mut active, mut compared, mut fallbacks) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    let mut worst_gap = f64::NEG_INFINITY;
    while instances < 100 {
        let Some((x, b, afr)) = guessed_instance(&mut rng, 50) else { continue };
        instances += 1;
        let est = constrained_mle(&x, &b, &afr, 0.05).unwrap();
        let oracle = Oracle::new(&x, b.as_slice(), (afr.a(), afr.b()));
        let ours = oracle.ll(est.params.mu, est.params.sigma2, est.p);
        let unc = standard_mle(&x, &b).unwrap();
        let unconstrained = oracle.ll(unc.params.mu, unc.params.sigma2, unc.p);
        if est.fallback {
            fallbacks += 1;
        }
        if ours > unconstrained + 1e-9 {
            failures.push(format!("instance {instances}: exceeds unconstrained ({ours} > {unconstrained})"));
        }
        if est.kkt_case != KktCase::Unconstrained {
            active += 1;
            let res = oracle.residual(est.params.mu, est.params.sigma2, est.p);
            if (res * res - oracle.w * oracle.w).abs() > 1e-6 {
                failures.push(format!("instance {instances}: |res^2 - w^2| = {:e}", (res * res - oracle.w * oracle.w).abs()));
            }
        }
        if let Some(grid) = oracle.grid_max() {
            compared += 1;
            worst_gap = worst_gap.max(grid - ours);
            if ours < grid - 1e-3 {
                failures.push(format!("instance {instances}: grid {grid} beats ours {ours}"));
            }
        }
    }
    report(
        3,
        "brute-force oracle equivalence",
        failures.is_empty(),
        format!(
            "{instances} instances, {active} constraint-active, {compared} with a feasible grid point, {fallbacks} fallbacks, worst grid-minus-ours {worst_gap:.3e}; failures: {failures:?}"
        ),
    );
}

#[test]
fn criterion_4_variance_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut fits, mut skipped) = (0, 0);
    let (mut worst_fp, mut worst_omega) = (0.0_f64, 0.0_f64);
    while fits < 1000 {
        let Some((x, b, afr)) = guessed_instance(&mut rng, 200) else { continue };
        let est = constrained_mle(&x, &b, &afr, 0.05).unwrap();
        if est.kkt_case != KktCase::ConsistencyActive {
            continue;
        }
        if est.fallback {
            skipped += 1;
            continue;
        }
        fits += 1;
        let stats = SufficientStats::from_labeled(&x, &b).unwrap();
        let (mu, s2) = (est.params.mu, est.params.sigma2);
        // E = (a e_a - b e_b) / (e_a - e_b), with t = e_b / e_a
        let (a, bb) = (afr.a(), afr.b());
        let u = ((a - mu).powi(2) - (bb - mu).powi(2)) / (2.0 * s2);
        let e = if u <= 0.0 {
            let t = u.exp();
            (a - bb * t) / (1.0 - t)
        } else {
            let t = (-u).exp();
            (a * t - bb) / (t - 1.0)
        };
        let rhs = stats.x2_bar - mu * stats.x_bar + (mu - stats.x_bar) * e;
        worst_fp = worst_fp.max((rhs - s2).abs() / s2.max(1.0));
        let om_mu = omega_mu(&est.params, &stats, &afr).unwrap();
        let om_sigma = omega_sigma(&est.params, &stats, &afr).unwrap();
        worst_omega = worst_omega.max((om_mu - om_sigma).abs() / om_mu.abs().max(1.0));
    }
    report(
        4,
        "variance fixed point and gradient match",
        worst_fp <= 1e-8 && worst_omega <= 1e-6,
        format!("{fits} fits ({skipped} fallbacks skipped), worst fixed-point gap {worst_fp:.2e}, worst omega gap {worst_omega:.2e}"),
    );
}

#[test]
fn criterion_5_r_lambert() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = |x: f64, r: f64| x * x.exp() + r * x;
    let grid: Vec<f64> = (0..=20_000).map(|i| -50.0 + i as f64 * 0.005).collect();
    let (mut worst, mut missed, mut roots) = (0.0_f64, 0, 0);
    for _ in 0..10_000 {
        let r = rng.random_range(-10.0..10.0);
        let a = rng.random_range(-10.0..10.0);
        let sol = r_lambert(r, a);
        roots += sol.len();
        for &x in sol.iter() {
            worst = worst.max((g(x, r) - a).abs() / a.abs().max(1.0));
        }
        for w in grid.windows(2) {
            let (f0, f1) = (g(w[0], r) - a, g(w[1], r) - a);
            if f0.signum() != f1.signum() && f0 != 0.0 && f1 != 0.0 && !sol.iter().any(|&x| x >= w[0] && x <= w[1]) {
                missed += 1;
            }
        }
    }
    report(
        5,
        "r-Lambert correctness",
        worst <= 1e-10 && missed == 0,
        format!("10000 instances, {roots} roots, worst relative residual {worst:.2e}, {missed} unexplained sign changes"),
    );
}

#[test]
fn criterion_6_auc_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=200);
        // coarse scores so that ties are common
        let mut scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..20) as f64 * 0.25).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        labels[0] = true;
        labels[1] = false;
        scores.swap(0, n - 1);
        let (mut wins2, mut n1, mut n0) = (0u64, 0u64, 0u64);
        for i in 0..n {
            if labels[i] {
                n1 += 1;
            } else {
                n0 += 1;
            }
        }
        for i in (0..n).filter(|&i| labels[i]) {
            for j in (0..n).filter(|&j| !labels[j]) {
                wins2 += match scores[i].partial_cmp(&scores[j]).unwrap() {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
        }
        let oracle = wins2 as f64 / (2 * n1 * n0) as f64;
        if auc_roc(&scores, &labels).unwrap() != oracle {
            mismatches += 1;
        }
    }
    report(6, "AUC against pairwise oracle", mismatches == 0, format!("100 instances, {mismatches} mismatches"));
}

#[test]
fn criterion_7_sweep_stability() {
    // 1900 standard normal points and 100 outliers uniform on [-10, -4] U [4, 10]
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::with_capacity(2000);
    let mut labels = Vec::with_capacity(2000);
    for i in 0..2000 {
        if i % 20 == 0 {
            let v: f64 = rng.random_range(4.0..10.0);
            x.push(if rng.random_bool(0.5) { v } else { -v });
            labels.push(true);
        } else {
            x.push(normal.sample(&mut rng));
            labels.push(false);
        }
    }
    let points =
        run_sensitivity_sweep(&[x], &labels, &SweepConfig::default(), &CamleConfig { seed: 7, ..Default::default() }).unwrap();
    let aucs: Vec<f64> = points.iter().map(|p| p.auc).collect();
    let mid = &aucs[1..aucs.len() - 1];
    let (mid_lo, mid_hi) = mid.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    let extreme = aucs[0].max(aucs[aucs.len() - 1]);
    report(
        7,
        "sensitivity sweep stability",
        mid_hi - mid_lo <= 0.05 && mid_lo > extreme,
        format!("AUC by delta {aucs:.4?}; mid-range spread {:.4}, mid minimum {mid_lo:.4} vs extreme maximum {extreme:.4}", mid_hi - mid_lo),
    );
}

#[test]
#[ignore = "needs the Office dataset at $CAMLE_OFFICE_CSV (columns: minutes, label)"]
fn criterion_8_office_dataset() {
    let path = std::env::var("CAMLE_OFFICE_CSV").expect("CAMLE_OFFICE_CSV not set");
    let text = std::fs::read_to_string(path).unwrap();
    let (mut x, mut labels) = (Vec::new(), Vec::new());
    for line in text.lines().skip(1) {
        let mut f = line.split(',');
        x.push(f.next().unwrap().trim().parse::<f64>().unwrap());
        labels.push(f.next().unwrap().trim().parse::<f64>().unwrap() != 0.0);
    }
    let afr = Afr::new(-29.0, 29.0).unwrap();
    let scores = camle::camle_score_1d(&x, &afr, &CamleConfig::default()).unwrap();
    let auc = auc_roc(scores.as_slice(), &labels).unwrap();
    report(8, "Office dataset AUC", (auc - 0.97).abs() <= 0.02, format!("AUC {auc:.4}"));
}

