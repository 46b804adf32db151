//! Gibbons–Hawking checks on a box `D ⊂ R³`: the monopole equation
//! `dv = *dA`, anti-self-duality of `d(v dt − A)`, closedness of the Kähler
//! forms of `g = v h + v⁻¹(dt + A)²`, and the harmonic morphism
//! `(x, t) ↦ x`. Real slices only.

mod expr;
mod field;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat_models::TwoFormOnE;
use crate::laurent_linalg::Mat;
use crate::report::Check;
use crate::scalar::Real;

pub use expr::Expr;
pub use field::{Grid, MonopoleData, OneForm3, SampledField, ScalarField3};

type P3 = [f64; 3];
type M4<T> = [[T; 4]; 4];

/// How first derivatives of `v` and `A` are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Symbolic derivatives of closed-form fields.
    Analytic,
    /// Second-order central differences with the grid step.
    Grid,
}

/// Identification `R⁴ → E = C²⊗C²` used by the isotropy test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `(x, t) ↦ [[t + i x³, x² + i x¹], [−x² + i x¹, t − i x³]]`.
    Standard,
    /// The transpose of the standard matrix, i.e. the opposite orientation.
    Reversed,
}

/// Frame in which anti-self-duality is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsdConvention {
    /// Flat coframe `(dx¹, dx², dx³, dt)`.
    Flat,
    /// Orthonormal coframe `(v^{1/2}dxⁱ, v^{−1/2}(dt + A))` of `g`.
    Metric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhOptions {
    pub mode: DerivativeMode,
    pub orientation: Orientation,
    pub convention: AsdConvention,
    /// Exclusion radius around the singular set, in grid cells.
    pub margin_cells: f64,
    /// Largest monopole residual accepted before assembling Kähler forms.
    pub monopole_threshold: f64,
}

impl Default for GhOptions {
    fn default() -> Self {
        GhOptions {
            mode: DerivativeMode::Grid,
            orientation: Orientation::Standard,
            convention: AsdConvention::Flat,
            margin_cells: 5.0,
            monopole_threshold: 1e-3,
        }
    }
}

/// Pointwise residual summary; `l2` uses the cell volume `h³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub sup: f64,
    pub l2: f64,
    pub points: usize,
}

impl Residual {
    fn from_values(values: &[f64], h: f64) -> Self {
        let sup = values.iter().cloned().fold(0.0, f64::max);
        let l2 = (values.iter().map(|v| v * v).sum::<f64>() * h * h * h).sqrt();
        Residual { sup, l2, points: values.len() }
    }
}

struct Derivatives {
    v_grad: Option<[Expr; 3]>,
    a_jac: Option<[[Expr; 3]; 3]>,
}

fn derivatives(data: &MonopoleData, mode: DerivativeMode) -> Result<Derivatives> {
    match mode {
        DerivativeMode::Grid => Ok(Derivatives { v_grad: None, a_jac: None }),
        DerivativeMode::Analytic => {
            let v = data
                .v
                .expr()
                .ok_or_else(|| Error::Invariant("analytic derivatives need a closed-form v".into()))?;
            let a = data
                .a
                .exprs()
                .ok_or_else(|| Error::Invariant("analytic derivatives need a closed-form A".into()))?;
            // a_jac[i][j] = ∂ᵢAⱼ
            let a_jac = [0, 1, 2].map(|i| [0, 1, 2].map(|j| a[j].diff(i)));
            Ok(Derivatives { v_grad: Some(v.gradient()), a_jac: Some(a_jac) })
        }
    }
}

fn to_t<T: Real>(p: &P3) -> [T; 3] {
    p.map(T::lit)
}

fn shifted<T: Real>(p: &[T; 3], axis: usize, by: T) -> [T; 3] {
    let mut q = *p;
    q[axis] = q[axis] + by;
    q
}

fn grad_v<T: Real>(data: &MonopoleData, d: &Derivatives, p: &[T; 3], h: T) -> [T; 3] {
    match &d.v_grad {
        Some(g) => [0, 1, 2].map(|i| g[i].eval(p)),
        None => [0, 1, 2].map(|i| {
            (data.v.eval(&shifted(p, i, h)) - data.v.eval(&shifted(p, i, -h))) / (h + h)
        }),
    }
}

/// `J[i][j] = ∂ᵢAⱼ`.
fn jac_a<T: Real>(data: &MonopoleData, d: &Derivatives, p: &[T; 3], h: T) -> [[T; 3]; 3] {
    match &d.a_jac {
        Some(j) => [0, 1, 2].map(|i| [0, 1, 2].map(|k| j[i][k].eval(p))),
        None => [0, 1, 2].map(|i| {
            let a = data.a.eval(&shifted(p, i, h));
            let b = data.a.eval(&shifted(p, i, -h));
            [0, 1, 2].map(|k| (a[k] - b[k]) / (h + h))
        }),
    }
}

fn curl<T: Real>(j: &[[T; 3]; 3]) -> [T; 3] {
    [j[1][2] - j[2][1], j[2][0] - j[0][2], j[0][1] - j[1][0]]
}

/// Rejects evaluation points within `margin_cells·h` of the singular set.
pub fn check_margin(data: &MonopoleData, points: &[P3], h: f64, margin_cells: f64) -> Result<()> {
    let r = margin_cells * h;
    for p in points {
        if data.singular_distance(p) < r {
            return Err(Error::SingularityTooClose { point: *p, margin: margin_cells });
        }
    }
    Ok(())
}

fn check_positive(data: &MonopoleData, points: &[P3]) -> Result<()> {
    for p in points {
        let v: f64 = data.v.eval(p);
        if !(v > 0.0) {
            return Err(Error::Invariant(format!("v = {v} is not positive at {p:?}")));
        }
    }
    Ok(())
}

fn pointwise<F>(points: &[P3], f: F) -> Vec<f64>
where
    F: Fn(&P3) -> f64 + Sync + Send,
{
    points.par_iter().map(f).collect()
}

/// `|∇v − curl A|` over the points.
pub fn monopole_residual<T: Real>(data: &MonopoleData, points: &[P3], h: f64, opts: &GhOptions) -> Result<Residual> {
    check_margin(data, points, h, opts.margin_cells)?;
    let d = derivatives(data, opts.mode)?;
    let ht = T::lit(h);
    let vals = pointwise(points, |p| {
        let q = to_t::<T>(p);
        let g = grad_v(data, &d, &q, ht);
        let c = curl(&jac_a(data, &d, &q, ht));
        let r = [g[0] - c[0], g[1] - c[1], g[2] - c[2]];
        (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt().to_f64().unwrap_or(f64::NAN)
    });
    Ok(Residual::from_values(&vals, h))
}

/// `ω = d(v dt − A)` in coordinates `(x¹, x², x³, t)`.
fn monopole_two_form<T: Real>(g: &[T; 3], j: &[[T; 3]; 3]) -> M4<T> {
    let mut w = [[T::zero(); 4]; 4];
    for i in 0..3 {
        w[i][3] = g[i];
        w[3][i] = -g[i];
        for k in 0..3 {
            w[i][k] = -(j[i][k] - j[k][i]);
        }
    }
    w
}

fn identification(o: Orientation) -> Mat<Complex<f64>> {
    let c = |re: f64, im: f64| Complex::new(re, im);
    let z = c(0.0, 0.0);
    // rows: E-coordinates (a, j) ↦ a·2 + j; columns: (x¹, x², x³, t)
    let mut rows = vec![
        vec![z, z, c(0.0, 1.0), c(1.0, 0.0)],
        vec![c(0.0, 1.0), c(1.0, 0.0), z, z],
        vec![c(0.0, 1.0), c(-1.0, 0.0), z, z],
        vec![z, z, c(0.0, -1.0), c(1.0, 0.0)],
    ];
    if o == Orientation::Reversed {
        rows.swap(1, 2);
    }
    Mat::from_rows(rows)
}

/// Coframe matrix `C` with `Eᵃ = C^a_μ dx^μ`.
fn metric_coframe<T: Real>(v: T, a: &[T; 3]) -> M4<T> {
    let s = v.sqrt();
    let mut c = [[T::zero(); 4]; 4];
    for i in 0..3 {
        c[i][i] = s;
        c[3][i] = a[i] / s;
    }
    c[3][3] = T::one() / s;
    c
}

fn to_mat<T: Real>(m: &M4<T>) -> Mat<f64> {
    Mat::from_fn(4, 4, |i, j| m[i][j].to_f64().unwrap_or(f64::NAN))
}

/// Largest isotropy defect of a real two-form on `R⁴` under the
/// identification with `E = C²⊗C²`.
pub fn asd_defect(omega: &Mat<f64>, orientation: Orientation) -> f64 {
    let l = identification(orientation);
    let li = l.inverse().expect("identification is invertible");
    let w = omega.map(|x| Complex::new(*x, 0.0));
    let we = li.transpose().mul(&w).mul(&li);
    TwoFormOnE::new(we, 2).expect("antisymmetric").isotropy_defect()
}

/// Isotropy defect of `d(v dt − A)` over the points.
pub fn asd_residual<T: Real>(data: &MonopoleData, points: &[P3], h: f64, opts: &GhOptions) -> Result<Residual> {
    check_margin(data, points, h, opts.margin_cells)?;
    let d = derivatives(data, opts.mode)?;
    let ht = T::lit(h);
    let vals = pointwise(points, |p| {
        let q = to_t::<T>(p);
        let w = monopole_two_form(&grad_v(data, &d, &q, ht), &jac_a(data, &d, &q, ht));
        let w = match opts.convention {
            AsdConvention::Flat => to_mat(&w),
            AsdConvention::Metric => {
                let c = to_mat(&metric_coframe(data.v.eval(&q), &data.a.eval(&q)));
                let ci = c.inverse().expect("coframe is invertible");
                ci.transpose().mul(&to_mat(&w)).mul(&ci)
            }
        };
        asd_defect(&w, opts.orientation)
    });
    Ok(Residual::from_values(&vals, h))
}

/// `g = v h + v⁻¹(dt + A)²` in coordinates `(x¹, x², x³, t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric4 {
    pub g: Mat<f64>,
}

pub fn metric_assemble<T: Real>(v: T, a: &[T; 3]) -> M4<T> {
    let vi = T::one() / v;
    let mut g = [[T::zero(); 4]; 4];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = vi * a[i] * a[j];
        }
        g[i][i] = g[i][i] + v;
        g[i][3] = vi * a[i];
        g[3][i] = vi * a[i];
    }
    g[3][3] = vi;
    g
}

impl Metric4 {
    pub fn at(data: &MonopoleData, p: &P3) -> Self {
        Metric4 { g: to_mat(&metric_assemble::<f64>(data.v.eval(p), &data.a.eval(p))) }
    }

    pub fn det(&self) -> f64 {
        self.g.det()
    }

    /// All leading principal minors positive.
    pub fn is_positive_definite(&self) -> bool {
        (1..=4).all(|k| self.g.block(0, 0, k, k).det() > 0.0)
    }
}

/// Largest `|det g − v²|` relative to `v²`, and whether `g` is positive
/// definite at every point.
pub fn metric_check(data: &MonopoleData, points: &[P3]) -> (f64, bool) {
    let vals: Vec<(f64, bool)> = points
        .par_iter()
        .map(|p| {
            let m = Metric4::at(data, p);
            let v: f64 = data.v.eval(p);
            (((m.det() - v * v) / (v * v)).abs(), m.is_positive_definite())
        })
        .collect();
    (vals.iter().map(|x| x.0).fold(0.0, f64::max), vals.iter().all(|x| x.1))
}

/// `ωᵢ = (dt + A)∧dxⁱ − v dxʲ∧dxᵏ` for cyclic `(i, j, k)`; the constant
/// `dt∧dxⁱ` part is included when `with_dt`.
fn kahler_forms<T: Real>(v: T, a: &[T; 3], with_dt: bool) -> [M4<T>; 3] {
    [0usize, 1, 2].map(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let mut w = [[T::zero(); 4]; 4];
        if with_dt {
            w[3][i] = T::one();
            w[i][3] = -T::one();
        }
        for m in 0..3 {
            if m != i {
                w[m][i] = w[m][i] + a[m];
                w[i][m] = w[i][m] - a[m];
            }
        }
        w[j][k] = w[j][k] - v;
        w[k][j] = w[k][j] + v;
        w
    })
}

/// Monopole screen for closed-form data.
pub const ANALYTIC_MONOPOLE_THRESHOLD: f64 = 1e-6;

/// Largest component of `dω₁, dω₂, dω₃`.
pub fn hyperkahler_residual<T: Real>(data: &MonopoleData, points: &[P3], h: f64, opts: &GhOptions) -> Result<Residual> {
    // Closed-form data is screened with exact derivatives, so coarse grids
    // are not mistaken for non-monopoles.
    let closed_form = data.v.expr().is_some() && data.a.exprs().is_some();
    let (screen, threshold) = if closed_form {
        (GhOptions { mode: DerivativeMode::Analytic, ..*opts }, ANALYTIC_MONOPOLE_THRESHOLD)
    } else {
        (*opts, opts.monopole_threshold)
    };
    let mono = monopole_residual::<T>(data, points, h, &screen)?;
    if mono.sup > threshold {
        return Err(Error::NotAMonopole { residual: mono.sup, threshold });
    }
    let d = derivatives(data, opts.mode)?;
    let ht = T::lit(h);
    let vals = pointwise(points, |p| {
        let q = to_t::<T>(p);
        // dw[a] = ∂ₐω for a spatial, ∂_t ω = 0.
        let dw: [[M4<T>; 3]; 3] = match opts.mode {
            DerivativeMode::Analytic => {
                let g = grad_v(data, &d, &q, ht);
                let j = jac_a(data, &d, &q, ht);
                [0, 1, 2].map(|a| kahler_forms(g[a], &j[a], false))
            }
            DerivativeMode::Grid => [0, 1, 2].map(|a| {
                let (qp, qm) = (shifted(&q, a, ht), shifted(&q, a, -ht));
                let wp = kahler_forms(data.v.eval(&qp), &data.a.eval(&qp), true);
                let wm = kahler_forms(data.v.eval(&qm), &data.a.eval(&qm), true);
                [0, 1, 2].map(|f| {
                    let mut out = [[T::zero(); 4]; 4];
                    for r in 0..4 {
                        for c in 0..4 {
                            out[r][c] = (wp[f][r][c] - wm[f][r][c]) / (ht + ht);
                        }
                    }
                    out
                })
            }),
        };
        let partial = |a: usize, f: usize, r: usize, c: usize| -> T {
            if a == 3 {
                T::zero()
            } else {
                dw[a][f][r][c]
            }
        };
        let mut worst = 0.0f64;
        for f in 0..3 {
            for a in 0..4 {
                for b in a + 1..4 {
                    for c in b + 1..4 {
                        let val = partial(a, f, b, c) - partial(b, f, a, c) + partial(c, f, a, b);
                        worst = worst.max(val.abs().to_f64().unwrap_or(f64::NAN));
                    }
                }
            }
        }
        worst
    });
    Ok(Residual::from_values(&vals, h))
}

/// `Δ_g(f∘φ)` by the flux form `|g|^{−1/2} ∂ₐ(|g|^{1/2} g^{ab} ∂_b F)` with
/// step `h`; `f` and the fields do not depend on `t`.
pub fn laplace_beltrami<T: Real>(data: &MonopoleData, f: &Expr, p: &[T; 3], h: T) -> T {
    let two = T::lit(2.0);
    let half = h / two;
    let flux = |q: &[T; 3], a: usize, da: T| -> T {
        let g = metric_assemble(data.v.eval(q), &data.a.eval(q));
        let gm = to_mat(&g);
        let gi = gm.inverse().expect("metric is nondegenerate");
        let sqrt_det = T::lit(gm.det().sqrt());
        let mut s = T::zero();
        for b in 0..3 {
            let db = if b == a {
                da
            } else {
                (f.eval(&shifted(q, b, h)) - f.eval(&shifted(q, b, -h))) / (two * h)
            };
            s = s + T::lit(gi[(a, b)]) * db;
        }
        sqrt_det * s
    };
    let mut acc = T::zero();
    for a in 0..3 {
        let qp = shifted(p, a, half);
        let qm = shifted(p, a, -half);
        let fp = (f.eval(&shifted(p, a, h)) - f.eval(p)) / h;
        let fm = (f.eval(p) - f.eval(&shifted(p, a, -h))) / h;
        acc = acc + (flux(&qp, a, fp) - flux(&qm, a, fm)) / h;
    }
    let det_p = to_mat(&metric_assemble(data.v.eval(p), &data.a.eval(p))).det();
    acc / T::lit(det_p.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicMorphismReport {
    /// `sup |Δ_h f|` (symbolic) over the points.
    pub flat_laplacian: f64,
    /// `|Δ_g(f∘φ)|`.
    pub pullback: Residual,
    /// `|Δ_g(f∘φ) − v⁻¹(Δ_h f)∘φ|`.
    pub dilation: Residual,
}

/// With `require_harmonic`, `f` must satisfy `Δ_h f = 0` to `1e−8`.
pub fn harmonic_morphism_residual<T: Real>(
    data: &MonopoleData,
    f: &Expr,
    points: &[P3],
    h: f64,
    opts: &GhOptions,
    require_harmonic: bool,
) -> Result<HarmonicMorphismReport> {
    check_margin(data, points, h, opts.margin_cells)?;
    check_positive(data, points)?;
    let lap = f.flat_laplacian();
    let flat = pointwise(points, |p| lap.eval(p).abs());
    let flat_sup = flat.iter().cloned().fold(0.0, f64::max);
    if require_harmonic && flat_sup > 1e-8 {
        return Err(Error::NotHarmonicInput { residual: flat_sup });
    }
    let ht = T::lit(h);
    let pairs: Vec<(f64, f64)> = points
        .par_iter()
        .map(|p| {
            let q = to_t::<T>(p);
            let lg = laplace_beltrami(data, f, &q, ht);
            let dil = lg - lap.eval(&q) / data.v.eval(&q);
            (lg.abs().to_f64().unwrap_or(f64::NAN), dil.abs().to_f64().unwrap_or(f64::NAN))
        })
        .collect();
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(HarmonicMorphismReport {
        flat_laplacian: flat_sup,
        pullback: Residual::from_values(&a, h),
        dilation: Residual::from_values(&b, h),
    })
}

/// Quantity tracked in a refinement study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    Monopole,
    Asd,
    Kahler,
    Pullback { f: Expr },
    Dilation { f: Expr },
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Monopole => "monopole",
            Quantity::Asd => "asd",
            Quantity::Kahler => "kahler",
            Quantity::Pullback { .. } => "pullback",
            Quantity::Dilation { .. } => "dilation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementRow {
    pub h: f64,
    pub sup: f64,
    pub l2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementTable {
    pub quantity: Quantity,
    pub rows: Vec<RefinementRow>,
    /// `log(rᵢ/rᵢ₊₁)/log(hᵢ/hᵢ₊₁)` for consecutive rows.
    pub slopes: Vec<f64>,
    /// Least-squares slope of `log r` against `log h`.
    pub fitted_slope: f64,
}

/// Evaluates `quantity` with grid derivatives of step `h ∈ hs` on the fixed
/// point set `points`.
pub fn refinement_study<T: Real>(
    data: &MonopoleData,
    quantity: &Quantity,
    points: &[P3],
    hs: &[f64],
    opts: &GhOptions,
) -> Result<RefinementTable> {
    let opts = GhOptions { mode: DerivativeMode::Grid, ..*opts };
    let mut rows = Vec::with_capacity(hs.len());
    for &h in hs {
        let r = match quantity {
            Quantity::Monopole => monopole_residual::<T>(data, points, h, &opts)?,
            Quantity::Asd => asd_residual::<T>(data, points, h, &opts)?,
            Quantity::Kahler => hyperkahler_residual::<T>(data, points, h, &opts)?,
            Quantity::Pullback { f } => harmonic_morphism_residual::<T>(data, f, points, h, &opts, false)?.pullback,
            Quantity::Dilation { f } => harmonic_morphism_residual::<T>(data, f, points, h, &opts, false)?.dilation,
        };
        rows.push(RefinementRow { h, sup: r.sup, l2: r.l2 });
    }
    let slopes = rows.windows(2).map(|w| (w[0].sup / w[1].sup).ln() / (w[0].h / w[1].h).ln()).collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.sup.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(RefinementTable { quantity: quantity.clone(), rows, slopes, fitted_slope: sxy / sxx })
}

/// `quantity,h,sup,l2` rows for plotting residual against `h`.
pub fn refinement_csv(tables: &[RefinementTable]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "h", "sup", "l2"]).expect("in-memory write");
    for t in tables {
        let name = t.quantity.name();
        for r in &t.rows {
            w.write_record([name.to_string(), format!("{:e}", r.h), format!("{:e}", r.sup), format!("{:e}", r.l2)])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv is utf-8")
}

/// Test functions on `R³` with their names.
pub fn harmonic_test_functions(centre: P3) -> Vec<(String, Expr)> {
    vec![
        ("x1".into(), Expr::x(0)),
        ("x2".into(), Expr::x(1)),
        ("x3".into(), Expr::x(2)),
        ("1/r".into(), Expr::div(Expr::c(1.0), Expr::distance_to(centre))),
    ]
}

/// Configuration of the full suite on a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub lo: P3,
    pub hi: P3,
    /// Final grid step.
    pub h: f64,
    /// Steps of the refinement study, coarsest first.
    pub refinement: Vec<f64>,
    pub options: GhOptions,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            lo: [0.6, 0.6, 0.6],
            hi: [1.0, 1.0, 1.0],
            h: 0.01,
            refinement: vec![0.08, 0.04, 0.02, 0.01],
            options: GhOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedResidual {
    pub name: String,
    pub residual: Residual,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub analytic_monopole: Option<Residual>,
    pub analytic_asd: Option<Residual>,
    pub grid_monopole: Residual,
    pub grid_asd: Residual,
    pub kahler: Residual,
    pub det_relative_error: f64,
    pub positive_definite: bool,
    pub pullbacks: Vec<NamedResidual>,
    /// Dilation relation for the non-harmonic `(x¹)²`, with its pullback
    /// Laplacian for contrast.
    pub dilation: HarmonicMorphismReport,
    pub refinement: Vec<RefinementTable>,
}

/// Acceptance thresholds for [`SuiteReport::checks`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteThresholds {
    pub analytic: f64,
    pub grid: f64,
    pub slope: f64,
    pub slope_tol: f64,
}

impl Default for SuiteThresholds {
    fn default() -> Self {
        SuiteThresholds { analytic: 1e-6, grid: 1e-3, slope: 2.0, slope_tol: 0.2 }
    }
}

impl SuiteReport {
    pub fn checks(&self, t: &SuiteThresholds) -> Vec<Check> {
        let mut out = Vec::new();
        if let Some(r) = &self.analytic_monopole {
            out.push(Check::below("monopole_analytic", r.sup, t.analytic));
        }
        if let Some(r) = &self.analytic_asd {
            out.push(Check::below("asd_analytic", r.sup, t.analytic));
        }
        out.push(Check::below("monopole_grid", self.grid_monopole.sup, t.grid));
        out.push(Check::below("asd_grid", self.grid_asd.sup, t.grid));
        out.push(Check::below("kahler_closed", self.kahler.sup, t.grid));
        out.push(Check::flag("metric_positive_definite", self.positive_definite));
        for p in &self.pullbacks {
            out.push(Check::below(format!("pullback_{}", p.name), p.residual.sup, t.grid));
        }
        out.push(Check::below("dilation_relation", self.dilation.dilation.sup, t.grid));
        for table in &self.refinement {
            let name = table.quantity.name();
            for (i, s) in table.slopes.iter().enumerate() {
                out.push(Check::near(format!("slope_{name}_{i}"), *s, t.slope, t.slope_tol));
            }
        }
        out
    }
}

/// Runs every check. Grid quantities use the nodes at least one cell inside
/// the box; refinement uses the interior nodes of the coarsest grid, which
/// are nodes of every finer grid.
pub fn verify_suite(data: &MonopoleData, centre: P3, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let grid = Grid::covering(cfg.lo, cfg.hi, cfg.h);
    let points = grid.interior_points();
    check_margin(data, &points, cfg.h, cfg.options.margin_cells)?;
    check_positive(data, &points)?;
    let grid_opts = GhOptions { mode: DerivativeMode::Grid, ..cfg.options };
    let analytic_opts = GhOptions { mode: DerivativeMode::Analytic, ..cfg.options };
    let closed_form = data.v.expr().is_some() && data.a.exprs().is_some();
    let (analytic_monopole, analytic_asd) = if closed_form {
        (
            Some(monopole_residual::<f64>(data, &points, cfg.h, &analytic_opts)?),
            Some(asd_residual::<f64>(data, &points, cfg.h, &analytic_opts)?),
        )
    } else {
        (None, None)
    };
    let grid_monopole = monopole_residual::<f64>(data, &points, cfg.h, &grid_opts)?;
    let grid_asd = asd_residual::<f64>(data, &points, cfg.h, &grid_opts)?;
    let kahler = hyperkahler_residual::<f64>(data, &points, cfg.h, &grid_opts)?;
    let (det_relative_error, positive_definite) = metric_check(data, &points);
    let mut pullbacks = Vec::new();
    for (name, f) in harmonic_test_functions(centre) {
        let r = harmonic_morphism_residual::<f64>(data, &f, &points, cfg.h, &grid_opts, true)?;
        pullbacks.push(NamedResidual { name, residual: r.pullback });
    }
    let square = Expr::powi(Expr::x(0), 2);
    let dilation = harmonic_morphism_residual::<f64>(data, &square, &points, cfg.h, &grid_opts, false)?;
    let mut refinement = Vec::new();
    if let Some(&coarse) = cfg.refinement.first() {
        let rpoints = Grid::covering(cfg.lo, cfg.hi, coarse).interior_points();
        let smallest = cfg.refinement.iter().cloned().fold(f64::INFINITY, f64::min);
        check_margin(data, &rpoints, smallest.max(coarse), cfg.options.margin_cells)?;
        let inv_r = Expr::div(Expr::c(1.0), Expr::distance_to(centre));
        for q in [Quantity::Monopole, Quantity::Asd, Quantity::Kahler, Quantity::Pullback { f: inv_r }] {
            refinement.push(refinement_study::<f64>(data, &q, &rpoints, &cfg.refinement, &grid_opts)?);
        }
    }
    Ok(SuiteReport {
        config: cfg.clone(),
        analytic_monopole,
        analytic_asd,
        grid_monopole,
        grid_asd,
        kahler,
        det_relative_error,
        positive_definite,
        pullbacks,
        dilation,
        refinement,
    })
}
