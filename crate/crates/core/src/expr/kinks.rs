use super::ast::Expr;

/// `(slope, intercept)` when `e` is affine in `x` by structure.
pub fn affine_form(e: &Expr) -> Option<(f64, f64)> {
    match e {
        Expr::Const(v) => Some((0.0, *v)),
        Expr::X => Some((1.0, 0.0)),
        Expr::Add(l, r) => {
            let (a, b) = affine_form(l)?;
            let (c, d) = affine_form(r)?;
            Some((a + c, b + d))
        }
        Expr::Sub(l, r) => {
            let (a, b) = affine_form(l)?;
            let (c, d) = affine_form(r)?;
            Some((a - c, b - d))
        }
        Expr::Neg(a) => affine_form(a).map(|(s, c)| (-s, -c)),
        Expr::Mul(l, r) => match (affine_form(l)?, affine_form(r)?) {
            ((0.0, k), (s, c)) | ((s, c), (0.0, k)) => Some((k * s, k * c)),
            _ => None,
        },
        Expr::Div(l, r) => match (affine_form(l)?, affine_form(r)?) {
            ((s, c), (0.0, k)) if k != 0.0 => Some((s / k, c / k)),
            _ => None,
        },
        Expr::Pow(b, p) if *p == 1.0 => affine_form(b),
        _ => None,
    }
}

/// Points in the open interval `(lo, hi)` where an `abs`/`max`/`min` node
/// with affine arguments may switch branches. Sorted and deduplicated.
///
/// Kinks hidden behind non-affine arguments are not reported.
pub fn kinks(e: &Expr, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    collect(e, &mut out);
    out.retain(|k| k.is_finite() && *k > lo && *k < hi);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn collect(e: &Expr, out: &mut Vec<f64>) {
    match e {
        Expr::Abs(a) => {
            if let Some((s, c)) = affine_form(a) {
                if s != 0.0 {
                    out.push(-c / s);
                }
            }
        }
        Expr::Max(args) | Expr::Min(args) => {
            let forms: Vec<_> = args.iter().filter_map(affine_form).collect();
            for (i, (s1, c1)) in forms.iter().enumerate() {
                for (s2, c2) in &forms[i + 1..] {
                    if s1 != s2 {
                        out.push((c2 - c1) / (s1 - s2));
                    }
                }
            }
        }
        _ => {}
    }
    for c in e.children() {
        collect(c, out);
    }
}
