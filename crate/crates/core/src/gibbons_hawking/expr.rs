use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Closed-form scalar expression in `x₁, x₂, x₃` (indices 0, 1, 2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Expr {
    Const { value: f64 },
    Var { index: usize },
    Add { args: Vec<Expr> },
    Mul { args: Vec<Expr> },
    Div { num: Box<Expr>, den: Box<Expr> },
    Powi { base: Box<Expr>, exp: i32 },
    Sqrt { arg: Box<Expr> },
    Neg { arg: Box<Expr> },
}

impl Expr {
    pub fn c(value: f64) -> Expr {
        Expr::Const { value }
    }

    pub fn x(index: usize) -> Expr {
        assert!(index < 3, "coordinate index {index} out of range");
        Expr::Var { index }
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const { value } => Some(*value),
            _ => None,
        }
    }

    pub fn add(args: Vec<Expr>) -> Expr {
        let mut konst = 0.0;
        let mut rest = Vec::new();
        for a in args {
            match a {
                Expr::Const { value } => konst += value,
                Expr::Add { args } => rest.extend(args),
                other => rest.push(other),
            }
        }
        if konst != 0.0 || rest.is_empty() {
            rest.push(Expr::c(konst));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            Expr::Add { args: rest }
        }
    }

    pub fn mul(args: Vec<Expr>) -> Expr {
        let mut konst = 1.0;
        let mut rest = Vec::new();
        for a in args {
            match a {
                Expr::Const { value } => konst *= value,
                Expr::Mul { args } => rest.extend(args),
                other => rest.push(other),
            }
        }
        if konst == 0.0 {
            return Expr::c(0.0);
        }
        if konst != 1.0 || rest.is_empty() {
            rest.insert(0, Expr::c(konst));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            Expr::Mul { args: rest }
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, Expr::neg(b)])
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const { value } => Expr::c(-value),
            Expr::Neg { arg } => *arg,
            other => Expr::Neg { arg: Box::new(other) },
        }
    }

    pub fn div(num: Expr, den: Expr) -> Expr {
        if num.as_const() == Some(0.0) {
            return Expr::c(0.0);
        }
        if den.as_const() == Some(1.0) {
            return num;
        }
        Expr::Div { num: Box::new(num), den: Box::new(den) }
    }

    pub fn powi(base: Expr, exp: i32) -> Expr {
        match exp {
            0 => Expr::c(1.0),
            1 => base,
            _ => match base.as_const() {
                Some(c) => Expr::c(c.powi(exp)),
                None => Expr::Powi { base: Box::new(base), exp },
            },
        }
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::Sqrt { arg: Box::new(arg) }
    }

    /// `|x − p|`.
    pub fn distance_to(p: [f64; 3]) -> Expr {
        Expr::sqrt(Expr::add((0..3).map(|i| Expr::powi(Expr::sub(Expr::x(i), Expr::c(p[i])), 2)).collect()))
    }

    pub fn eval<T: Real>(&self, p: &[T; 3]) -> T {
        match self {
            Expr::Const { value } => T::lit(*value),
            Expr::Var { index } => p[*index],
            Expr::Add { args } => args.iter().fold(T::zero(), |acc, a| acc + a.eval(p)),
            Expr::Mul { args } => args.iter().fold(T::one(), |acc, a| acc * a.eval(p)),
            Expr::Div { num, den } => num.eval(p) / den.eval(p),
            Expr::Powi { base, exp } => base.eval(p).powi(*exp),
            Expr::Sqrt { arg } => arg.eval(p).sqrt(),
            Expr::Neg { arg } => -arg.eval(p),
        }
    }

    /// `∂/∂xᵢ`.
    pub fn diff(&self, i: usize) -> Expr {
        match self {
            Expr::Const { .. } => Expr::c(0.0),
            Expr::Var { index } => Expr::c(if *index == i { 1.0 } else { 0.0 }),
            Expr::Add { args } => Expr::add(args.iter().map(|a| a.diff(i)).collect()),
            Expr::Mul { args } => {
                let mut terms = Vec::new();
                for k in 0..args.len() {
                    let d = args[k].diff(i);
                    if d.as_const() == Some(0.0) {
                        continue;
                    }
                    let mut factors: Vec<Expr> = args.clone();
                    factors[k] = d;
                    terms.push(Expr::mul(factors));
                }
                Expr::add(terms)
            }
            Expr::Div { num, den } => {
                let a = Expr::mul(vec![num.diff(i), (**den).clone()]);
                let b = Expr::mul(vec![(**num).clone(), den.diff(i)]);
                Expr::div(Expr::sub(a, b), Expr::powi((**den).clone(), 2))
            }
            Expr::Powi { base, exp } => {
                Expr::mul(vec![Expr::c(*exp as f64), Expr::powi((**base).clone(), exp - 1), base.diff(i)])
            }
            Expr::Sqrt { arg } => Expr::div(arg.diff(i), Expr::mul(vec![Expr::c(2.0), self.clone()])),
            Expr::Neg { arg } => Expr::neg(arg.diff(i)),
        }
    }

    pub fn gradient(&self) -> [Expr; 3] {
        [self.diff(0), self.diff(1), self.diff(2)]
    }

    /// `Σ ∂ᵢ∂ᵢ`.
    pub fn flat_laplacian(&self) -> Expr {
        Expr::add((0..3).map(|i| self.diff(i).diff(i)).collect())
    }
}
