use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::expr::Expr;

/// Uniform grid `origin + spacing·(i, j, k)`, `0 ≤ i < dims[0]` etc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: [f64; 3],
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl Grid {
    /// Grid covering the box `[lo, hi]` with step `h` (box edges are rounded
    /// to whole cells).
    pub fn covering(lo: [f64; 3], hi: [f64; 3], h: f64) -> Self {
        let dims = [0, 1, 2].map(|i| ((hi[i] - lo[i]) / h).round() as usize + 1);
        Grid { origin: lo, spacing: h, dims }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing;
        [self.origin[0] + h * i as f64, self.origin[1] + h * j as f64, self.origin[2] + h * k as f64]
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    /// Nodes at least one cell away from the boundary, in index order.
    pub fn interior_points(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::new();
        let [a, b, c] = self.dims;
        for i in 1..a.saturating_sub(1) {
            for j in 1..b.saturating_sub(1) {
                for k in 1..c.saturating_sub(1) {
                    out.push(self.point(i, j, k));
                }
            }
        }
        out
    }

    pub fn hi(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.origin[i] + self.spacing * (self.dims[i].max(1) - 1) as f64)
    }
}

/// Node values on a grid, trilinearly interpolated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn from_fn<F: Fn([f64; 3]) -> f64>(grid: Grid, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.dims[0] {
            for j in 0..grid.dims[1] {
                for k in 0..grid.dims[2] {
                    values.push(f(grid.point(i, j, k)));
                }
            }
        }
        SampledField { grid, values }
    }

    /// Reads `x,y,z,value` rows (an optional header line is skipped) on the
    /// given grid; every node must appear exactly once.
    pub fn from_csv<R: Read>(grid: Grid, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut values = vec![f64::NAN; grid.len()];
        let h = grid.spacing;
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("csv line {}: {e}", line + 1)))?;
            let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.parse::<f64>()).collect();
            let nums = match nums {
                Ok(n) if n.len() == 4 => n,
                Ok(n) => return Err(Error::Parse(format!("csv line {}: {} columns, expected 4", line + 1, n.len()))),
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("csv line {}: {e}", line + 1))),
            };
            let mut idx = [0usize; 3];
            for a in 0..3 {
                let f = (nums[a] - grid.origin[a]) / h;
                let r = f.round();
                if (f - r).abs() > 1e-6 || r < 0.0 || r as usize >= grid.dims[a] {
                    return Err(Error::Parse(format!("csv line {}: point is not a grid node", line + 1)));
                }
                idx[a] = r as usize;
            }
            values[grid.index(idx[0], idx[1], idx[2])] = nums[3];
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse("csv does not cover every grid node".into()));
        }
        Ok(SampledField { grid, values })
    }

    pub fn eval<T: Real>(&self, p: &[T; 3]) -> T {
        let g = &self.grid;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let x = (p[a].to_f64().unwrap_or(f64::NAN) - g.origin[a]) / g.spacing;
            let n = g.dims[a];
            if n < 2 {
                base[a] = 0;
                frac[a] = 0.0;
                continue;
            }
            let f = x.floor().clamp(0.0, (n - 2) as f64);
            base[a] = f as usize;
            frac[a] = x - f;
        }
        let mut acc = 0.0;
        for corner in 0..8usize {
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for a in 0..3 {
                let bit = (corner >> a) & 1;
                let step = if g.dims[a] < 2 { 0 } else { bit };
                idx[a] = base[a] + step;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            acc += w * self.values[g.index(idx[0], idx[1], idx[2])];
        }
        T::lit(acc)
    }
}

/// The function `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField3 {
    Expr { expr: Expr },
    Sampled { field: SampledField },
}

impl ScalarField3 {
    pub fn eval<T: Real>(&self, p: &[T; 3]) -> T {
        match self {
            ScalarField3::Expr { expr } => expr.eval(p),
            ScalarField3::Sampled { field } => field.eval(p),
        }
    }

    pub fn expr(&self) -> Option<&Expr> {
        match self {
            ScalarField3::Expr { expr } => Some(expr),
            ScalarField3::Sampled { .. } => None,
        }
    }
}

/// The one-form `A = Aᵢ dxⁱ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OneForm3 {
    Expr {
        components: [Expr; 3],
    },
    Sampled {
        components: [SampledField; 3],
    },
    /// Best effort: `A` solving `dA = *dv` by the homotopy formula along
    /// segments from `base`, integrated with composite Simpson. Valid when
    /// every such segment avoids the singularities of `v`.
    RadialGauge {
        v: Expr,
        base: [f64; 3],
        intervals: usize,
    },
}

impl OneForm3 {
    pub fn zero() -> Self {
        OneForm3::Expr { components: [Expr::c(0.0), Expr::c(0.0), Expr::c(0.0)] }
    }

    pub fn eval<T: Real>(&self, p: &[T; 3]) -> [T; 3] {
        match self {
            OneForm3::Expr { components } => [0, 1, 2].map(|i| components[i].eval(p)),
            OneForm3::Sampled { components } => [0, 1, 2].map(|i| components[i].eval(p)),
            OneForm3::RadialGauge { v, base, intervals } => radial_gauge(v, base, *intervals, p),
        }
    }

    pub fn exprs(&self) -> Option<&[Expr; 3]> {
        match self {
            OneForm3::Expr { components } => Some(components),
            _ => None,
        }
    }
}

fn radial_gauge<T: Real>(v: &Expr, base: &[f64; 3], intervals: usize, p: &[T; 3]) -> [T; 3] {
    let grad = v.gradient();
    let b = base.map(T::lit);
    let y = [p[0] - b[0], p[1] - b[1], p[2] - b[2]];
    let n = intervals.max(2) + intervals % 2;
    let step = T::one() / T::lit(n as f64);
    let mut acc = [T::zero(); 3];
    for s in 0..=n {
        let t = step * T::lit(s as f64);
        let w = T::lit(if s == 0 || s == n {
            1.0
        } else if s % 2 == 1 {
            4.0
        } else {
            2.0
        });
        let q = [b[0] + t * y[0], b[1] + t * y[1], b[2] + t * y[2]];
        let g = [grad[0].eval(&q), grad[1].eval(&q), grad[2].eval(&q)];
        // F_{jk} = ε_{jki} ∂ᵢv; A_k = ∫ t F_{jk} yʲ dt.
        let f = |j: usize, k: usize| -> T {
            match (j, k) {
                (0, 1) => g[2],
                (1, 0) => -g[2],
                (1, 2) => g[0],
                (2, 1) => -g[0],
                (2, 0) => g[1],
                (0, 2) => -g[1],
                _ => T::zero(),
            }
        };
        for (k, a) in acc.iter_mut().enumerate() {
            let mut s_k = T::zero();
            for (j, yj) in y.iter().enumerate() {
                s_k = s_k + f(j, k) * *yj;
            }
            *a = *a + w * t * s_k;
        }
    }
    acc.map(|a| a * step / T::lit(3.0))
}

/// A pair `(v, A)` with the locus where either is singular.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonopoleData {
    pub v: ScalarField3,
    pub a: OneForm3,
    #[serde(default)]
    pub singular_points: Vec<[f64; 3]>,
    /// Lines `(point, direction)`, e.g. Dirac strings.
    #[serde(default)]
    pub singular_lines: Vec<([f64; 3], [f64; 3])>,
}

impl MonopoleData {
    /// `v = c + Σ 1/(2|x − pᵢ|)` with `A = Σ ½·cos θᵢ dφᵢ`, the string of each
    /// centre along the vertical line through it.
    pub fn gibbons_hawking(constant: f64, centres: &[[f64; 3]]) -> Self {
        let mut v_terms = vec![Expr::c(constant)];
        let mut a: [Vec<Expr>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for p in centres {
            let r = Expr::distance_to(*p);
            v_terms.push(Expr::div(Expr::c(0.5), r.clone()));
            let (x, y, z) = (
                Expr::sub(Expr::x(0), Expr::c(p[0])),
                Expr::sub(Expr::x(1), Expr::c(p[1])),
                Expr::sub(Expr::x(2), Expr::c(p[2])),
            );
            let rho2 = Expr::add(vec![Expr::powi(x.clone(), 2), Expr::powi(y.clone(), 2)]);
            let pref = Expr::div(Expr::mul(vec![Expr::c(0.5), z]), Expr::mul(vec![r, rho2]));
            a[0].push(Expr::neg(Expr::mul(vec![pref.clone(), y])));
            a[1].push(Expr::mul(vec![pref, x]));
        }
        let components = a.map(Expr::add);
        MonopoleData {
            v: ScalarField3::Expr { expr: Expr::add(v_terms) },
            a: OneForm3::Expr { components },
            singular_points: centres.to_vec(),
            singular_lines: centres.iter().map(|p| (*p, [0.0, 0.0, 1.0])).collect(),
        }
    }

    /// `v = c`, `A = 0`.
    pub fn flat(constant: f64) -> Self {
        MonopoleData {
            v: ScalarField3::Expr { expr: Expr::c(constant) },
            a: OneForm3::zero(),
            singular_points: Vec::new(),
            singular_lines: Vec::new(),
        }
    }

    /// Closed-form `v` with `A` from the radial gauge.
    pub fn radial_gauge(v: Expr, base: [f64; 3], intervals: usize, singular_points: Vec<[f64; 3]>) -> Self {
        MonopoleData {
            v: ScalarField3::Expr { expr: v.clone() },
            a: OneForm3::RadialGauge { v, base, intervals },
            singular_points,
            singular_lines: Vec::new(),
        }
    }

    /// Samples both fields on `grid`.
    pub fn sampled(&self, grid: Grid) -> Self {
        let v = SampledField::from_fn(grid, |p| self.v.eval(&p));
        let comps = [0, 1, 2].map(|i| SampledField::from_fn(grid, |p| self.a.eval(&p)[i]));
        MonopoleData {
            v: ScalarField3::Sampled { field: v },
            a: OneForm3::Sampled { components: comps },
            singular_points: self.singular_points.clone(),
            singular_lines: self.singular_lines.clone(),
        }
    }

    /// Distance from `p` to the singular set.
    pub fn singular_distance(&self, p: &[f64; 3]) -> f64 {
        let mut d = f64::INFINITY;
        for c in &self.singular_points {
            d = d.min(norm(&sub(p, c)));
        }
        for (c, dir) in &self.singular_lines {
            let u = sub(p, c);
            let n = norm(dir);
            let t = dot(&u, dir) / (n * n);
            let perp = [u[0] - t * dir[0], u[1] - t * dir[1], u[2] - t * dir[2]];
            d = d.min(norm(&perp));
        }
        d
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
