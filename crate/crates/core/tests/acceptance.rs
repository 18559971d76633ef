//! Acceptance criteria, run in order with their stated tolerances and time
//! limits. Each criterion prints one `[PASS]` or `[FAIL]` line to standard
//! error, bypassing the test harness's output capture.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use hadamard_audit::cli::{run, EXIT_OK, EXIT_VIOLATED};
use hadamard_audit::expr::{canonical_print, differentiate, eval_expr, fold, parse_expr, Expr};
use hadamard_audit::funcs::{random_convex, ConvexFunction, Family, Interval};
use hadamard_audit::ineq::{eval_thm21, eval_thm22, eval_thm23, eval_thm24, Tolerances, Verdict};
use hadamard_audit::means::{eval_prop31, eval_prop32, Prop32Variant};
use hadamard_audit::quad::{integrate_1d, try_integrate, QuadError, Sample};
use hadamard_audit::rng::substream;
use rand::{Rng, RngCore};
use serde_json::Value;

type Check = Result<String, String>;

/// Name, integrand, range and exact integral.
type Corpus = Vec<(&'static str, Box<dyn Fn(f64) -> f64>, f64, f64, f64)>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> (i32, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("hadamard-audit").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn cli_json(args: &[&str]) -> Result<(i32, Value), String> {
    let mut full = args.to_vec();
    full.push("--json");
    let (code, text) = cli(&full);
    let v = serde_json::from_str(&text).map_err(|e| format!("{args:?}: bad JSON ({e})"))?;
    Ok((code, v))
}

fn side(doc: &Value, report: usize, k: usize) -> f64 {
    doc["reports"][report]["chain"][k]["value"].as_f64().unwrap()
}

fn ac1() -> Check {
    let (code, doc) = cli_json(&["verify", "--thm", "2.1", "--f", "x", "--a", "0", "--b", "1"])?;
    let (l, r) = (side(&doc, 0, 0), side(&doc, 0, 1));
    ensure(code == EXIT_OK, || format!("2.1 exit {code}"))?;
    ensure((l - r).abs() <= 1e-8 && (l - 2.0 / 3.0).abs() <= 1e-8, || format!("2.1: {l} vs {r}"))?;
    let (code, doc) = cli_json(&["verify", "--thm", "2.2", "--f", "x", "--a", "0", "--b", "1"])?;
    let (l2, r2) = (side(&doc, 0, 0), side(&doc, 0, 1));
    ensure(code == EXIT_OK, || format!("2.2 exit {code}"))?;
    ensure((l2 - r2).abs() <= 1e-8 && (l2 - 0.5).abs() <= 1e-8, || format!("2.2: {l2} vs {r2}"))?;
    Ok(format!("2.1 {l:.12} = {r:.12}; 2.2 {l2:.12} = {r2:.12}"))
}

fn ac2() -> Check {
    let tol = Tolerances::default();
    let mut cases = 0;
    for c in [0.5, 1.0, 3.0] {
        for (a, b) in [(0.0, 1.0), (1.0, 4.0)] {
            let f = ConvexFunction::from_dsl(&c.to_string(), Interval::new(a, b).unwrap()).unwrap();
            for r in [eval_thm21(&f, &tol), eval_thm22(&f, &tol), eval_thm23(&f, &tol)] {
                let r = r.map_err(|e| e.to_string())?;
                ensure(r.verdict == Verdict::Equality && r.slack.abs() <= 1e-8, || {
                    format!("{} c={c} [{a}, {b}]: {:?} slack {}", r.theorem, r.verdict, r.slack)
                })?;
                cases += 1;
            }
        }
        let unit = ConvexFunction::from_dsl(&c.to_string(), Interval::unit()).unwrap();
        let r = eval_thm24(&unit, &tol).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Equality, || format!("2.4 c={c} [0, 1]: {:?}", r.verdict))?;
        let wide = ConvexFunction::from_dsl(&c.to_string(), Interval::new(0.0, 2.0).unwrap()).unwrap();
        let r = eval_thm24(&wide, &tol).map_err(|e| e.to_string())?;
        let expect = c * c / 3.0;
        ensure(r.verdict == Verdict::Holds && (r.slack - expect).abs() <= 1e-7, || {
            format!("2.4 c={c} [0, 2]: {:?} slack {} vs {expect}", r.verdict, r.slack)
        })?;
        cases += 2;
    }
    Ok(format!("{cases} constant cases"))
}

const SWEEP: [&str; 13] = [
    "sweep",
    "--thms",
    "1.1,2.1,2.2,2.3",
    "--trials",
    "1000",
    "--seed",
    "42",
    "--families",
    "quadratic,exp-affine,power,recip,piecewise-linear-max",
    "--lo",
    "0.1",
    "--hi",
    "10",
];

fn sweep_json() -> (i32, String) {
    let mut args = SWEEP.to_vec();
    args.push("--json");
    cli(&args)
}

fn ac3(first: &mut Option<String>) -> Check {
    let (code, text) = sweep_json();
    let doc: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    *first = Some(text);
    let mut min_slack = f64::INFINITY;
    for t in doc["summary"]["theorems"].as_array().unwrap() {
        let tag = t["theorem"].as_str().unwrap();
        ensure(t["violated"] == 0 && t["inconclusive"] == 0, || {
            format!("{tag}: {} violated, {} inconclusive", t["violated"], t["inconclusive"])
        })?;
        let s = t["min_slack"]["slack"].as_f64().unwrap();
        ensure(s >= -1e-7, || format!("{tag}: min slack {s}"))?;
        min_slack = min_slack.min(s);
    }
    ensure(code == EXIT_OK, || format!("exit {code}"))?;
    Ok(format!("1000 trials x 4 statements, no violations, min slack {min_slack:.3e}"))
}

fn ac4() -> Check {
    let (code, doc) = cli_json(&["verify", "--thm", "2.4", "--f", "x", "--a", "0", "--b", "1"])?;
    let (l, r) = (side(&doc, 0, 0), side(&doc, 0, 1));
    ensure(code == EXIT_VIOLATED && doc["reports"][0]["verdict"] == "Violated", || format!("exit {code}"))?;
    ensure((l - 5.0 / 9.0).abs() <= 1e-8 && (r - 19.0 / 36.0).abs() <= 1e-8, || format!("{l} vs {r}"))?;
    // Midpoint rule on a 1000 × 1000 grid in (x, t); f(x) = x, m = 1/2.
    let n = 1000;
    let (mut cross, mut sq) = (0.0, 0.0);
    let h = 1.0 / n as f64;
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        for j in 0..n {
            let t = (j as f64 + 0.5) * h;
            let z = t * x + (1.0 - t) * 0.5;
            cross += z * (t * x + (1.0 - t) * 0.5);
            sq += z * z;
        }
    }
    let (cross, sq) = (cross * h * h, sq * h * h);
    let (ol, or) = (2.0 * cross, sq + 3.0 / 12.0);
    ensure((ol - l).abs() <= 1e-6 && (or - r).abs() <= 1e-6, || format!("oracle {ol} / {or}"))?;
    let (code, doc) = cli_json(&["audit", "--thm", "2.4", "--f", "x", "--a", "0", "--b", "1"])?;
    let verdicts: Vec<&str> = (0..2).map(|k| doc["reports"][k]["verdict"].as_str().unwrap()).collect();
    ensure(code == EXIT_VIOLATED && verdicts == ["Equality", "Violated"], || format!("audit {verdicts:?}"))?;
    Ok(format!("lhs {l:.10} > rhs {r:.10}; oracle {ol:.8} / {or:.8}; steps {verdicts:?}"))
}

fn ac5() -> Check {
    let tol = Tolerances::default();
    let mut rng = substream(5, "acceptance", 0);
    let mut min_slack = f64::INFINITY;
    for _ in 0..1000 {
        let b = rng.random_range(1e-3..=100.0);
        let a = rng.random_range(0.0..b);
        if a <= 0.0 || a >= b {
            continue;
        }
        let r = eval_prop31(a, b, &tol).map_err(|e| e.to_string())?;
        ensure(r.slack >= 0.0, || format!("prop 3.1 at ({a}, {b}): slack {}", r.slack))?;
        min_slack = min_slack.min(r.slack);
    }
    let p = eval_prop31(1.0, 2.0, &tol).unwrap();
    ensure((p.lhs() - 6.0 * 2f64.ln()).abs() <= 1e-12 && (p.rhs() - 25.0 / 6.0).abs() <= 1e-12, || {
        format!("(1, 2): {} vs {}", p.lhs(), p.rhs())
    })?;
    let close = |x: f64, y: f64, tol: f64| (x - y).abs() <= tol * x.abs().max(y.abs());
    let mut literal_off = 0;
    let mut pairs: Vec<(f64, f64)> = vec![(10.0, 20.0)];
    while pairs.len() < 100 {
        let a = rng.random_range(0.05..50.0);
        pairs.push((a, a * rng.random_range(1.05..20.0)));
    }
    for (a, b) in pairs {
        let f = ConvexFunction::from_dsl("1/x", Interval::new(a, b).unwrap()).map_err(|e| e.to_string())?;
        let t = eval_thm22(&f, &tol).map_err(|e| e.to_string())?;
        let c = eval_prop32(a, b, Prop32Variant::Corrected, &tol).unwrap();
        ensure(close(c.lhs(), t.lhs(), 1e-6) && close(c.rhs(), t.rhs(), 1e-6), || {
            format!("3.2 at ({a}, {b}): {} / {} vs {} / {}", c.lhs(), c.rhs(), t.lhs(), t.rhs())
        })?;
        let lit = eval_prop32(a, b, Prop32Variant::AsPrinted, &tol).unwrap();
        if !close(lit.rhs(), t.rhs(), 1e-5) {
            literal_off += 1;
        }
    }
    ensure(literal_off >= 1, || "literal variant never mismatched".into())?;
    Ok(format!("3.1 min slack {min_slack:.3e} over 1000 pairs; literal 3.2 off on {literal_off}/100 pairs"))
}

fn ac6() -> Check {
    let corpus: Corpus = vec![
        ("1", Box::new(|_| 1.0), 0.0, 1.0, 1.0),
        ("x", Box::new(|x| x), 0.0, 1.0, 0.5),
        ("x^2", Box::new(|x| x * x), 0.0, 1.0, 1.0 / 3.0),
        ("x^3", Box::new(|x| x.powi(3)), 0.0, 1.0, 0.25),
        ("x^4", Box::new(|x| x.powi(4)), 0.0, 1.0, 0.2),
        ("1/x", Box::new(|x| 1.0 / x), 1.0, 2.0, 2f64.ln()),
        ("1/x^2", Box::new(|x| 1.0 / (x * x)), 1.0, 2.0, 0.5),
        ("exp", Box::new(f64::exp), 0.0, 1.0, 1f64.exp() - 1.0),
    ];
    let mut worst: f64 = 0.0;
    for (name, g, lo, hi, truth) in corpus {
        let r = integrate_1d(g, lo, hi, 1e-10).map_err(|e| e.to_string())?;
        let err = (r.value - truth).abs();
        ensure(err <= 1e-9, || format!("{name}: {} vs {truth}", r.value))?;
        worst = worst.max(err);
    }
    for (name, g, truth) in [
        ("t^2", (|t: f64| t * t) as fn(f64) -> f64, 1.0 / 3.0),
        ("t(1-t)", |t: f64| t * (1.0 - t), 1.0 / 6.0),
        ("t^2+(1-t)^2", |t: f64| t * t + (1.0 - t) * (1.0 - t), 2.0 / 3.0),
    ] {
        let r = integrate_1d(g, 0.0, 1.0, 1e-10).unwrap();
        ensure((r.value - truth).abs() <= 1e-12, || format!("moment {name}: {}", r.value))?;
    }
    for i in 0..100u64 {
        let family = Family::GENERATED[(i % 5) as usize];
        let mut rng = substream(i, "acceptance-subst", 0);
        let a = rng.random_range(0.1..5.0);
        let b = a + rng.random_range(0.1..5.0);
        let f = random_convex(i, family, Interval::new(a, b).unwrap()).map_err(|e| e.to_string())?;
        let w = b - a;
        let ev = |x: f64| f.eval(x).unwrap();
        let tb: Vec<f64> = f.kinks().iter().map(|k| (b - k) / w).collect();
        let lhs = try_integrate::<2, QuadError, _>(
            |t| {
                let v = ev(t * a + (1.0 - t) * b);
                Ok(Sample::exact([t * v, (1.0 - t) * v]))
            },
            0.0,
            1.0,
            &tb,
            1e-10,
        )
        .map_err(|e| e.to_string())?;
        let rhs = try_integrate::<2, QuadError, _>(
            |x| {
                let v = ev(x);
                Ok(Sample::exact([(b - x) * v / (w * w), (x - a) * v / (w * w)]))
            },
            a,
            b,
            f.kinks(),
            1e-10,
        )
        .map_err(|e| e.to_string())?;
        for k in 0..2 {
            let budget = lhs.abs_error[k] + rhs.abs_error[k] + 8.0 * f64::EPSILON * lhs.value[k].abs();
            ensure((lhs.value[k] - rhs.value[k]).abs() <= budget, || {
                format!("{} identity {k}: {} vs {}", f.spec(), lhs.value[k], rhs.value[k])
            })?;
        }
    }
    Ok(format!("corpus max error {worst:.1e}; moments exact; 100 x 2 substitution identities"))
}

fn random_tree(rng: &mut impl RngCore, depth: u32) -> Expr {
    if depth == 0 || rng.random_range(0..4) == 0 {
        return match rng.random_range(0..3) {
            0 => Expr::c(rng.random_range(-40i32..=40) as f64 * 0.25),
            1 => Expr::c(rng.random_range(-1e3..1e3)),
            _ => Expr::X,
        };
    }
    macro_rules! sub {
        () => {
            random_tree(rng, depth - 1)
        };
    }
    let node = match rng.random_range(0..11) {
        0 => Expr::add(sub!(), sub!()),
        1 => Expr::sub(sub!(), sub!()),
        2 => Expr::mul(sub!(), sub!()),
        3 => Expr::div(sub!(), sub!()),
        4 => Expr::neg(sub!()),
        5 => {
            let p = [2.0, 3.0, -1.0, 0.5, 1.5, -2.5][rng.random_range(0..6)];
            Expr::pow(sub!(), p)
        }
        6 => Expr::exp(sub!()),
        7 => Expr::ln(sub!()),
        8 => Expr::abs(sub!()),
        9 => Expr::Max(vec![sub!(), sub!()]),
        _ => Expr::Min(vec![sub!(), sub!(), sub!()]),
    };
    fold(node)
}

fn ac7() -> Check {
    let mut rng = substream(7, "acceptance-ast", 0);
    for i in 0..1000 {
        let e = random_tree(&mut rng, 5);
        let text = canonical_print(&e);
        let back = parse_expr(&text).map_err(|err| format!("tree {i}: {text}: {err}"))?;
        ensure(back == e, || format!("tree {i} does not round-trip: {text}"))?;
    }
    let corpus = [
        "x",
        "x^2",
        "x^3-2*x",
        "exp(x)",
        "exp(-2*x)*x^3",
        "ln(x)",
        "1/x",
        "1/x^2",
        "x^1.5",
        "x^0.5",
        "3/(x+1)",
        "ln(x^2+1)",
        "exp(x)/(1+x^2)",
        "2*x^2-3*x+1",
        "(x-0.2)^4",
        "-(x^2)+exp(0.5*x)",
    ];
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for text in corpus {
        let e = parse_expr(text).unwrap();
        let d = differentiate(&e, 1).map_err(|err| err.to_string())?;
        for k in 0..33 {
            let x = 0.5 + k as f64 / 32.0;
            let exact = eval_expr(&d, x).unwrap();
            let fd = (eval_expr(&e, x + h).unwrap() - eval_expr(&e, x - h).unwrap()) / (2.0 * h);
            let rel = (exact - fd).abs() / (1.0 + exact.abs());
            ensure(rel <= 1e-4, || format!("{text} at {x}: {exact} vs {fd}"))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("1000 trees round-trip; 16 x 33 derivatives, worst relative gap {worst:.1e}"))
}

fn without_wall_time(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"wall_time_s\"")).collect::<Vec<_>>().join("\n")
}

fn ac8(first: &Option<String>) -> Check {
    let first = first.as_ref().ok_or("criterion 3 produced no report")?;
    let (_, second) = sweep_json();
    ensure(without_wall_time(first) == without_wall_time(&second), || "sweep reports differ".into())?;
    Ok(format!("{} bytes identical apart from wall time", without_wall_time(first).len()))
}

struct Criterion<'a> {
    id: &'static str,
    limit: Duration,
    run: Box<dyn FnOnce() -> Check + 'a>,
}

#[test]
fn acceptance_criteria() {
    let mut sweep_text = None;
    let mut results = Vec::new();
    {
        let criteria = vec![
            Criterion { id: "AC-1 equality at f(x) = x", limit: Duration::from_secs(1), run: Box::new(ac1) },
            Criterion { id: "AC-2 constant equalities", limit: Duration::from_secs(5), run: Box::new(ac2) },
            Criterion {
                id: "AC-3 soundness sweep",
                limit: Duration::from_secs(300),
                run: Box::new(|| ac3(&mut sweep_text)),
            },
        ];
        results.extend(criteria.into_iter().map(evaluate_criterion));
    }
    let tail = vec![
        Criterion { id: "AC-4 midpoint-chord falsification", limit: Duration::from_secs(10), run: Box::new(ac4) },
        Criterion { id: "AC-5 mean propositions", limit: Duration::from_secs(30), run: Box::new(ac5) },
        Criterion { id: "AC-6 quadrature oracles", limit: Duration::from_secs(30), run: Box::new(ac6) },
        Criterion { id: "AC-7 parser and derivatives", limit: Duration::from_secs(30), run: Box::new(ac7) },
        Criterion { id: "AC-8 sweep determinism", limit: Duration::from_secs(300), run: Box::new(|| ac8(&sweep_text)) },
    ];
    results.extend(tail.into_iter().map(evaluate_criterion));
    let failed: Vec<&str> = results.iter().filter(|(_, ok)| !ok).map(|(id, _)| *id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

fn evaluate_criterion(c: Criterion<'_>) -> (&'static str, bool) {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let elapsed = started.elapsed();
    let (ok, detail) = match outcome {
        Ok(_) if elapsed > c.limit => (false, format!("took {elapsed:.2?}, limit {:?}", c.limit)),
        Ok(d) => (true, d),
        Err(e) => (false, e),
    };
    let tag = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] {} ({elapsed:.2?}): {detail}", c.id);
    (c.id, ok)
}
