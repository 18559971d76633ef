use hadamard_audit::funcs::{random_convex, ConvexFunction, Family, Interval};
use hadamard_audit::quad::{integrate_1d, integrate_2d, integrate_3d, try_integrate, QuadError, Sample};
use hadamard_audit::rng::substream;
use rand::Rng;

/// Midpoint Riemann sum with `n` cells.
/// Name, integrand, range and exact integral.
type Corpus = Vec<(&'static str, Box<dyn Fn(f64) -> f64>, f64, f64, f64)>;

fn riemann(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| g(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

struct Case {
    name: String,
    g: Box<dyn Fn(f64) -> f64>,
    lo: f64,
    hi: f64,
    truth: f64,
}

fn corpus() -> Vec<Case> {
    let mut cases = Vec::new();
    for (lo, hi) in [(0.0, 1.0), (1.0, 3.0), (-1.0, 2.0)] {
        for k in 0..=6 {
            let p = k as f64 + 1.0;
            cases.push(Case {
                name: format!("x^{k} on [{lo}, {hi}]"),
                g: Box::new(move |x: f64| x.powi(k)),
                lo,
                hi,
                truth: (hi.powf(p) - lo.powf(p)) / p,
            });
        }
        for c in [-2.0, -1.0, 1.0, 2.0, 3.0] {
            cases.push(Case {
                name: format!("exp({c}x) on [{lo}, {hi}]"),
                g: Box::new(move |x: f64| (c * x).exp()),
                lo,
                hi,
                truth: ((c * hi).exp() - (c * lo).exp()) / c,
            });
        }
    }
    for (lo, hi) in [(1.0, 2.0), (0.5, 4.0), (0.1, 1.0)] {
        cases.push(Case {
            name: format!("1/x on [{lo}, {hi}]"),
            g: Box::new(|x: f64| 1.0 / x),
            lo,
            hi,
            truth: (hi / lo).ln(),
        });
        cases.push(Case {
            name: format!("1/x^2 on [{lo}, {hi}]"),
            g: Box::new(|x: f64| 1.0 / (x * x)),
            lo,
            hi,
            truth: 1.0 / lo - 1.0 / hi,
        });
    }
    cases
}

#[test]
fn closed_form_corpus_at_1e_10() {
    let spec_corpus: Corpus = vec![
        ("1", Box::new(|_| 1.0), 0.0, 1.0, 1.0),
        ("x", Box::new(|x| x), 0.0, 1.0, 0.5),
        ("x^2", Box::new(|x| x * x), 0.0, 1.0, 1.0 / 3.0),
        ("x^3", Box::new(|x| x.powi(3)), 0.0, 1.0, 0.25),
        ("x^4", Box::new(|x| x.powi(4)), 0.0, 1.0, 0.2),
        ("1/x", Box::new(|x| 1.0 / x), 1.0, 2.0, 2f64.ln()),
        ("1/x^2", Box::new(|x| 1.0 / (x * x)), 1.0, 2.0, 0.5),
        ("exp", Box::new(f64::exp), 0.0, 1.0, 1f64.exp() - 1.0),
    ];
    for (name, g, lo, hi, truth) in spec_corpus {
        let r = integrate_1d(g, lo, hi, 1e-10).unwrap();
        assert!(r.converged);
        assert!((r.value - truth).abs() <= 1e-9, "{name}: {} vs {truth}", r.value);
    }
}

#[test]
fn polynomials_up_to_cubic_need_no_subdivision() {
    for (k, truth) in [(0, 1.0), (1, 0.5), (2, 1.0 / 3.0), (3, 0.25)] {
        let r = integrate_1d(|x: f64| x.powi(k), 0.0, 1.0, 1e-10).unwrap();
        assert_eq!(r.evaluations, 5);
        assert!((r.value - truth).abs() <= 1e-12 * truth);
    }
    let c = 2.5;
    let r = integrate_1d(|_| c, -1.0, 3.0, 1e-3).unwrap();
    assert_eq!(r.value, c * 4.0);
}

#[test]
fn log_two_matches_riemann_oracle() {
    let r = integrate_1d(|x| 1.0 / x, 1.0, 2.0, 1e-10).unwrap();
    let oracle = riemann(|x| 1.0 / x, 1.0, 2.0, 10_000_000);
    assert!((r.value - oracle).abs() < 1e-11, "{} vs {oracle}", r.value);
    assert!((r.value - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn error_estimates_are_honest() {
    let mut total = 0;
    let mut covered = 0;
    for case in corpus() {
        for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
            let r = integrate_1d(&case.g, case.lo, case.hi, tol).unwrap();
            let err = (r.value - case.truth).abs();
            // truth itself carries rounding of a few ulps
            let slack = 4.0 * f64::EPSILON * case.truth.abs();
            total += 1;
            if err <= r.abs_error_estimate + slack {
                covered += 1;
            }
            assert!(
                err <= 10.0 * r.abs_error_estimate + slack,
                "{} tol {tol}: err {err:e} est {:e}",
                case.name,
                r.abs_error_estimate
            );
            if r.converged {
                assert!(r.abs_error_estimate <= 1.01 * tol * (1.0 + r.value.abs()), "{} tol {tol}", case.name);
            }
        }
    }
    assert!(covered as f64 >= 0.99 * total as f64, "{covered}/{total}");
}

#[test]
fn moment_identities() {
    let m = |g: fn(f64) -> f64| integrate_1d(g, 0.0, 1.0, 1e-12).unwrap().value;
    assert!((m(|t| t * t) - 1.0 / 3.0).abs() < 1e-12);
    assert!((m(|t| (1.0 - t) * (1.0 - t)) - 1.0 / 3.0).abs() < 1e-12);
    assert!((m(|t| t * (1.0 - t)) - 1.0 / 6.0).abs() < 1e-12);
    assert!((m(|t| t * t + (1.0 - t) * (1.0 - t)) - 2.0 / 3.0).abs() < 1e-12);
}

fn integral<const N: usize>(g: impl Fn(f64) -> [f64; N], lo: f64, hi: f64, breaks: &[f64]) -> ([f64; N], [f64; N]) {
    let r = try_integrate::<N, QuadError, _>(|x| Ok(Sample::exact(g(x))), lo, hi, breaks, 1e-10).unwrap();
    assert!(r.converged);
    (r.value, r.abs_error)
}

#[test]
fn substitution_identities_on_random_convex_inputs() {
    for i in 0..100u64 {
        let family = Family::GENERATED[(i % 5) as usize];
        let mut rng = substream(i, "subst", 0);
        let a = rng.random_range(0.1..5.0);
        let b = a + rng.random_range(0.1..5.0);
        let f = random_convex(i, family, Interval::new(a, b).unwrap()).unwrap();
        let w = b - a;
        let ev = |x: f64| f.eval(x).unwrap();
        let tbreaks: Vec<f64> = f.kinks().iter().map(|k| (b - k) / w).collect();
        let (lt, et) = integral(
            |t| {
                let v = ev(t * a + (1.0 - t) * b);
                [t * v, (1.0 - t) * v, v * v]
            },
            0.0,
            1.0,
            &tbreaks,
        );
        let (rx, ex) = integral(
            |x| {
                let v = ev(x);
                [(b - x) * v / (w * w), (x - a) * v / (w * w), v * v / w]
            },
            a,
            b,
            f.kinks(),
        );
        for k in 0..3 {
            let budget = et[k] + ex[k] + 8.0 * f64::EPSILON * lt[k].abs();
            assert!(
                (lt[k] - rx[k]).abs() <= budget,
                "{} identity {k}: {} vs {} (budget {budget:e})",
                f.spec(),
                lt[k],
                rx[k]
            );
        }
    }
}

#[test]
fn two_dimensional_examples() {
    let r = integrate_2d(|x, t| (t * x + (1.0 - t) / 2.0).powi(2), [(0.0, 1.0), (0.0, 1.0)], 1e-9).unwrap();
    assert!((r.value - 5.0 / 18.0).abs() < 1e-9);
    let oracle = {
        let n = 1000;
        let h = 1.0 / n as f64;
        (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                riemann(|t| (t * x + (1.0 - t) / 2.0).powi(2), 0.0, 1.0, n) * h
            })
            .sum::<f64>()
    };
    assert!((r.value - oracle).abs() < 1e-6);
    let c = 1.75;
    let r = integrate_2d(|_, _| c, [(2.0, 5.0), (0.0, 1.0)], 1e-9).unwrap();
    assert!((r.value - c * 3.0).abs() < 1e-13);
    let r = integrate_2d(|x, y| x * y, [(0.0, 1.0), (0.0, 1.0)], 1e-10).unwrap();
    assert!((r.value - 0.25).abs() < 1e-14);
}

#[test]
fn three_dimensional_examples() {
    let r =
        integrate_3d(|x, y, t| (t * x + (1.0 - t) * y).powi(2), [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], 1e-8).unwrap();
    assert!((r.value - 11.0 / 36.0).abs() < 1e-8);
    let n = 100;
    let h = 1.0 / n as f64;
    let mut oracle = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            oracle += riemann(|t| (t * x + (1.0 - t) * y).powi(2), 0.0, 1.0, n) * h * h;
        }
    }
    assert!((r.value - oracle).abs() < 1e-4);
    let r = integrate_3d(|_, _, _| 0.5, [(1.0, 4.0), (1.0, 4.0), (0.0, 1.0)], 1e-8).unwrap();
    assert!((r.value - 0.5 * 9.0).abs() < 1e-12);
    let r = integrate_3d(|t, x, y| t * x * y, [(0.0, 1.0); 3], 1e-10).unwrap();
    assert!((r.value - 0.125).abs() < 1e-14);
}

#[test]
fn errors_propagate_through_nesting() {
    let f = ConvexFunction::from_dsl("1/x", Interval::new(1.0, 2.0).unwrap()).unwrap();
    let r = integrate_2d(|x, t| f.eval(x).unwrap() * t, [(1.0, 2.0), (0.0, 1.0)], 1e-10).unwrap();
    assert!((r.value - 0.5 * 2f64.ln()).abs() <= r.abs_error_estimate.max(1e-15));
    assert!(r.evaluations > 5);
}
