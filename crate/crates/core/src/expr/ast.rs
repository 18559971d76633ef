use std::fmt;

/// Expression tree over the single variable `x`.
///
/// `Pow` carries a literal exponent; there are no variable exponents.
/// `Max`/`Min` hold at least one argument.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Abs(Box<Expr>),
    Max(Vec<Expr>),
    Min(Vec<Expr>),
}

// Two-argument constructors, not operator methods.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::Add(Box::new(l), Box::new(r))
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::Sub(Box::new(l), Box::new(r))
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::Mul(Box::new(l), Box::new(r))
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        Expr::Div(Box::new(l), Box::new(r))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        Expr::Pow(Box::new(base), exponent)
    }

    pub fn exp(e: Expr) -> Expr {
        Expr::Exp(Box::new(e))
    }

    pub fn ln(e: Expr) -> Expr {
        Expr::Ln(Box::new(e))
    }

    pub fn abs(e: Expr) -> Expr {
        Expr::Abs(Box::new(e))
    }

    /// Children in left-to-right order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::X => Vec::new(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                vec![l.as_ref(), r.as_ref()]
            }
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Exp(e) | Expr::Ln(e) | Expr::Abs(e) => {
                vec![e.as_ref()]
            }
            Expr::Max(args) | Expr::Min(args) => args.iter().collect(),
        }
    }

    /// True when the tree contains no `x` at all.
    pub fn is_literal(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::X => false,
            _ => self.children().into_iter().all(Expr::is_literal),
        }
    }

    /// True when `abs`, `max` or `min` occurs anywhere in the tree.
    pub fn is_piecewise(&self) -> bool {
        match self {
            Expr::Abs(_) | Expr::Max(_) | Expr::Min(_) => true,
            _ => self.children().into_iter().any(Expr::is_piecewise),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(Expr::node_count).sum::<usize>()
    }

    /// Replaces every occurrence of `x` with `with`.
    pub fn substitute(&self, with: &Expr) -> Expr {
        let s = |e: &Expr| Box::new(e.substitute(with));
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::X => with.clone(),
            Expr::Add(l, r) => Expr::Add(s(l), s(r)),
            Expr::Sub(l, r) => Expr::Sub(s(l), s(r)),
            Expr::Mul(l, r) => Expr::Mul(s(l), s(r)),
            Expr::Div(l, r) => Expr::Div(s(l), s(r)),
            Expr::Neg(e) => Expr::Neg(s(e)),
            Expr::Pow(e, p) => Expr::Pow(s(e), *p),
            Expr::Exp(e) => Expr::Exp(s(e)),
            Expr::Ln(e) => Expr::Ln(s(e)),
            Expr::Abs(e) => Expr::Abs(s(e)),
            Expr::Max(args) => Expr::Max(args.iter().map(|a| a.substitute(with)).collect()),
            Expr::Min(args) => Expr::Min(args.iter().map(|a| a.substitute(with)).collect()),
        }
    }

    /// Canonical DSL text. Same as the `Display` impl.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

// Binding strength of a printed node; a child needs parentheses when its
// level is below what its slot in the parent requires.
const SUM: u8 = 0;
const PRODUCT: u8 = 1;
const FACTOR: u8 = 2;
const POWER: u8 = 3;
const ATOM: u8 = 4;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => FACTOR,
        Expr::Const(v) if v.is_sign_negative() => FACTOR,
        Expr::Pow(..) => POWER,
        _ => ATOM,
    }
}

/// Decimal literal that parses back to the identical `f64`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_level: u8) -> fmt::Result {
    if level(e) < min_level {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &str, args: &[&Expr]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => f.write_str(&format_number(*v)),
            Expr::X => f.write_str("x"),
            Expr::Add(l, r) | Expr::Sub(l, r) => {
                write_child(f, l, SUM)?;
                f.write_str(if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                write_child(f, r, PRODUCT)
            }
            Expr::Mul(l, r) | Expr::Div(l, r) => {
                write_child(f, l, PRODUCT)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                write_child(f, r, FACTOR)
            }
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, POWER)
            }
            Expr::Pow(base, p) => {
                write_child(f, base, ATOM)?;
                write!(f, "^{}", format_number(*p))
            }
            Expr::Exp(e) => write_call(f, "exp", &[e]),
            Expr::Ln(e) => write_call(f, "ln", &[e]),
            Expr::Abs(e) => write_call(f, "abs", &[e]),
            Expr::Max(args) => write_call(f, "max", &args.iter().collect::<Vec<_>>()),
            Expr::Min(args) => write_call(f, "min", &args.iter().collect::<Vec<_>>()),
        }
    }
}
