//! Infinitesimal Ward transform: extensions `0 → O⊗W → 𝒰′ → 𝒰 → 0` of a
//! nonnegative bundle by a trivial one, their classes in `H¹(𝒰*⊗W)`, and the
//! identity relating the class to `ρ′` restricted to `ker ρ`.

mod cech;

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cp1_bundles::{Bundle, H0Space, SplittingType};
use crate::error::{Error, Result};
use crate::laurent_linalg::{LaurentMatrix, LaurentPoly, Mat};
use crate::rho_quat::SectionModel;
use crate::scalar::{Field, QI};

pub use cech::{cauchy_alpha, cech_split, trapezoid_mean, CechSplit, PolesKernelReport, PolesProjection};

/// Default quadrature size for the Cauchy evaluator.
pub const DEFAULT_NODES: usize = 512;
/// Default agreement tolerance between quadrature and exact extraction.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Čech cocycle `B` (`W × rank 𝒰`) for `𝒰*⊗W`, read as the off-diagonal
/// block of the transition `[[I_W, B], [0, T]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionClass {
    pub base: Bundle<QI>,
    pub w_dim: usize,
    pub cocycle: LaurentMatrix<QI>,
}

/// Total space of an extension with its block structure.
#[derive(Clone, Debug)]
pub struct ExtensionBundle {
    pub total: Bundle<QI>,
    pub w_dim: usize,
    pub base_rank: usize,
}

impl ExtensionClass {
    pub fn new(base: Bundle<QI>, cocycle: LaurentMatrix<QI>) -> Result<Self> {
        if cocycle.cols() != base.rank() || cocycle.rows() == 0 {
            return Err(Error::Dimension(format!(
                "cocycle is {:?}, expected W x {} with W > 0",
                cocycle.shape(),
                base.rank()
            )));
        }
        Ok(ExtensionClass { w_dim: cocycle.rows(), base, cocycle })
    }

    /// Chart-0 form `h = B·T⁻¹` of the class as a `Hom(𝒰, W)`-valued cochain.
    pub fn chart0_form(&self) -> LaurentMatrix<QI> {
        self.cocycle.mul(&self.base.transition().inverse().expect("base transition is a unit"))
    }

    /// Random class with entries supported on exponents `lo..=hi`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, base: Bundle<QI>, w_dim: usize, lo: i64, hi: i64) -> Self {
        let r = base.rank();
        let cocycle = LaurentMatrix::from_fn(w_dim, r, |_, _| LaurentPoly::random(rng, lo, hi, 3, 0.5));
        ExtensionClass { base, w_dim, cocycle }
    }
}

/// Random classes over `base` with entries on exponents `lo..=hi`; about
/// one in five has proportional rows, so its extension cannot be all-ones
/// when `W ≥ 2`.
pub fn random_classes<R: Rng + ?Sized>(
    rng: &mut R,
    base: &Bundle<QI>,
    w_dim: usize,
    count: usize,
    lo: i64,
    hi: i64,
) -> Vec<ExtensionClass> {
    (0..count)
        .map(|_| {
            let mut c = ExtensionClass::random(rng, base.clone(), w_dim, lo, hi);
            if w_dim >= 2 && rng.gen_ratio(1, 5) {
                let factor = QI::random_nonzero(rng, 3, false);
                for j in 0..c.cocycle.cols() {
                    let p = c.cocycle[(0, j)].scale(&factor);
                    c.cocycle[(w_dim - 1, j)] = p;
                }
            }
            c
        })
        .collect()
}

/// Transition `[[I_W, B], [0, T]]`; asserts the result is nonnegative when
/// the base is.
pub fn extension_bundle(c: &ExtensionClass) -> Result<ExtensionBundle> {
    let w = c.w_dim;
    let r = c.base.rank();
    let top = LaurentMatrix::identity(w).hstack(&c.cocycle);
    let bottom = LaurentMatrix::zeros(r, w).hstack(c.base.transition());
    let total = Bundle::new(top.vstack(&bottom))?;
    if c.base.splitting_type().is_nonnegative() && !total.splitting_type().is_nonnegative() {
        return Err(Error::Invariant(format!(
            "extension of nonnegative {:?} has splitting {:?}",
            c.base.splitting_type().degrees,
            total.splitting_type().degrees
        )));
    }
    Ok(ExtensionBundle { total, w_dim: w, base_rank: r })
}

/// Canonical representative: in the split frame of the base, column `i` of
/// the cocycle keeps only the exponents `1..aᵢ−1`; everything else is a
/// coboundary `a₀(z)·z^{aᵢ} + a_∞(1/z)`.
pub fn class_normal_form(c: &ExtensionClass) -> ExtensionClass {
    let report = c.base.split_report();
    let a_inf_z = report.gauge.a_inf.reflect();
    let split = c.cocycle.mul(&a_inf_z);
    let degrees = &report.splitting.degrees;
    let nf = LaurentMatrix::from_fn(c.w_dim, c.base.rank(), |i, j| split[(i, j)].truncate(1, degrees[j] - 1));
    let back = nf.mul(&a_inf_z.inverse().expect("gauge factor is a unit"));
    ExtensionClass { base: c.base.clone(), w_dim: c.w_dim, cocycle: back }
}

/// Normal-form basis of `H¹(𝒰*)` (classes with `W = C`), in the base's own
/// frame.
pub fn h1_dual_basis(base: &Bundle<QI>) -> Vec<ExtensionClass> {
    let report = base.split_report();
    let inv = report.gauge.a_inf.reflect().inverse().expect("gauge factor is a unit");
    let r = base.rank();
    let mut out = Vec::new();
    for (j, &a) in report.splitting.degrees.iter().enumerate() {
        for e in 1..a {
            let b = LaurentMatrix::from_fn(1, r, |_, jj| if jj == j { LaurentPoly::z(e) } else { LaurentPoly::zero() });
            out.push(ExtensionClass { base: base.clone(), w_dim: 1, cocycle: b.mul(&inv) });
        }
    }
    out
}

/// Output of the Ward identity check for one class.
#[derive(Clone, Debug, Serialize)]
pub struct WardReport {
    pub base_splitting: SplittingType,
    pub extension_splitting: SplittingType,
    pub extension_nonnegative: bool,
    pub kernel_subbundle_trivial: bool,
    /// `ρ′|_{ker ρ}` as a `W × dim ker ρ` matrix.
    pub rho_prime_restriction: Mat<QI>,
    /// `p∘α`: the class through the Cauchy evaluator and the poles projection.
    pub class_matrix: Mat<QI>,
    pub scalar: QI,
    pub identity_holds: bool,
    pub restriction_invertible: bool,
    pub all_ones: bool,
    pub criterion_consistent: bool,
    pub quadrature_deviation: f64,
}

impl WardReport {
    pub fn passed(&self) -> bool {
        self.extension_nonnegative && self.kernel_subbundle_trivial && self.identity_holds && self.criterion_consistent
    }
}

/// Options for the quadrature cross-check inside the pipeline.
#[derive(Clone, Copy, Debug)]
pub struct WardOptions {
    pub nodes: usize,
    pub quad_tol: f64,
}

impl Default for WardOptions {
    fn default() -> Self {
        WardOptions { nodes: DEFAULT_NODES, quad_tol: DEFAULT_QUAD_TOL }
    }
}

/// The two sides of the identity before the scalar is applied.
#[derive(Clone, Debug)]
struct Sides {
    ext: ExtensionBundle,
    kernel_trivial: bool,
    restriction: Mat<QI>,
    class_matrix: Mat<QI>,
    deviation: f64,
}

/// `α`: Cauchy means of `ι∘h` against the `U` basis (`W × dim U`), with the
/// worst trapezoid deviation.
pub fn class_alpha(c: &ExtensionClass, base: &SectionModel<QI>, opts: WardOptions) -> Result<(Mat<QI>, f64)> {
    let h = c.chart0_form();
    let u0 = LaurentMatrix::from_fn(base.bundle.rank(), base.u.dim(), |i, k| base.u.sections[k].s0[i].clone());
    let iota = h.mul(&u0);
    let mut alpha = Mat::zeros(c.w_dim, base.u.dim());
    let mut worst = 0.0f64;
    for w in 0..c.w_dim {
        let row: Vec<LaurentPoly<QI>> = (0..base.u.dim()).map(|k| iota[(w, k)].clone()).collect();
        let exact = cauchy_alpha(&row, opts.nodes, opts.quad_tol)?;
        for (k, (p, e)) in row.iter().zip(&exact).enumerate() {
            worst = worst.max((trapezoid_mean(p, opts.nodes) - e.to_c64()).norm());
            alpha[(w, k)] = e.clone();
        }
    }
    Ok((alpha, worst))
}

fn compute_sides(c: &ExtensionClass, base: &SectionModel<QI>, opts: WardOptions) -> Result<Sides> {
    if c.base != base.bundle {
        return Err(Error::Invariant("section model belongs to a different base bundle".into()));
    }
    let st = base.bundle.splitting_type();
    if !st.is_positive() {
        return Err(Error::NotPositive(format!("base splitting {:?}", st.degrees)));
    }
    let poles = PolesProjection::new(&base.space)?;
    let (alpha, deviation) = class_alpha(c, base, opts)?;
    let class_matrix = poles.apply_rows(&alpha);

    let ext = extension_bundle(c)?;
    let (w, r) = (ext.w_dim, ext.base_rank);
    let model = SectionModel::canonical(&ext.total)?;
    let lower = |s0: &[LaurentPoly<QI>]| -> Vec<LaurentPoly<QI>> { s0[w..].to_vec() };

    // φ: H⁰(𝒰′) → H⁰(𝒰) and its kernel, which must be the constant sections of O⊗W.
    let mut phi_cols = Vec::with_capacity(model.u.dim());
    for s in &model.u.sections {
        phi_cols.push(
            base.coords(&lower(&s.s0))
                .ok_or_else(|| Error::Invariant("projected section is not a base section".into()))?,
        );
    }
    let phi = Mat::from_columns(&phi_cols, base.u.dim());
    let ker_phi = phi.nullspace();
    let mut w_frame = Vec::new();
    let mut kernel_trivial = ker_phi.len() == w && phi.rank() == base.u.dim();
    for v in &ker_phi {
        let s = model.u.combine(v);
        let constant = s.s0.iter().all(|p| p.min_exp().is_none_or(|e| e == 0) && p.max_exp().is_none_or(|e| e == 0));
        kernel_trivial &= constant && s.s0[w..].iter().all(|p| p.is_zero());
        w_frame.push(s.s0[..w].iter().map(|p| p.coeff(0)).collect::<Vec<_>>());
    }
    kernel_trivial &= w_frame.is_empty() && w == 0 || Mat::from_columns(&w_frame, w).rank() == w;

    // φ̃: F′ = H⁰(𝒰′(−1)) → F = H⁰(𝒰(−1)).
    let f_space = H0Space::from_sections(base.f.clone(), r);
    let mut tilde_cols = Vec::with_capacity(model.f.len());
    for t in &model.f {
        tilde_cols.push(
            f_space
                .coords(&lower(&t.s0))
                .ok_or_else(|| Error::Invariant("projected F' section is not in F".into()))?,
        );
    }
    let phi_tilde = Mat::from_columns(&tilde_cols, base.space.dim_f);
    let phi_tilde_inv = phi_tilde
        .inverse()
        .ok_or_else(|| Error::Invariant("F' -> F is not an isomorphism".into()))?;

    // ρ′ on (I₂ ⊗ φ̃⁻¹)κ, read in W.
    let lift = Mat::<QI>::identity(2).kron(&phi_tilde_inv);
    let image = model.space.rho.mul(&lift).mul(&poles.kernel);
    let mut restriction = Mat::zeros(w, poles.kernel.cols());
    for j in 0..image.cols() {
        let s = model.u.combine(&image.col(j));
        if s.s0[w..].iter().any(|p| !p.is_zero()) {
            return Err(Error::Invariant("rho' does not map ker rho into W".into()));
        }
        for i in 0..w {
            if s.s0[i].num_terms() > 1 || s.s0[i].min_exp().is_some_and(|e| e != 0) {
                return Err(Error::Invariant("rho'(ker rho) is not a constant section of W".into()));
            }
            restriction[(i, j)] = s.s0[i].coeff(0);
        }
    }
    Ok(Sides { ext, kernel_trivial, restriction, class_matrix, deviation })
}

static WARD_SCALAR: OnceLock<QI> = OnceLock::new();

/// The canonical class: `𝒰 = O(2)`, `W = C`, `B = z`.
pub fn canonical_class() -> ExtensionClass {
    ExtensionClass::new(Bundle::line(2), LaurentMatrix::from_rows(vec![vec![LaurentPoly::z(1)]])).unwrap()
}

/// Global scalar `s` with `ρ′|_{ker ρ} = −s·(p∘α)`, fixed once from the
/// canonical class and immutable afterwards.
pub fn ward_scalar() -> &'static QI {
    WARD_SCALAR.get_or_init(|| {
        let c = canonical_class();
        let base = SectionModel::canonical(&c.base).expect("O(2) is positive");
        let sides = compute_sides(&c, &base, WardOptions::default()).expect("canonical class is valid");
        -(sides.restriction[(0, 0)].clone() / sides.class_matrix[(0, 0)].clone())
    })
}

/// `ρ′|_{ker ρ}` for the class, over the canonical section model of the base.
pub fn rho_prime_restriction(c: &ExtensionClass) -> Result<Mat<QI>> {
    let base = SectionModel::canonical(&c.base)?;
    Ok(compute_sides(c, &base, WardOptions::default())?.restriction)
}

/// Full check against the canonical section model of the base.
pub fn ward_identity_check(c: &ExtensionClass, opts: WardOptions) -> Result<WardReport> {
    let base = SectionModel::canonical(&c.base)?;
    ward_identity_check_with(c, &base, opts)
}

/// Full check with the `U`, `F` coordinates of a given model of the base.
pub fn ward_identity_check_with(c: &ExtensionClass, base: &SectionModel<QI>, opts: WardOptions) -> Result<WardReport> {
    let s = ward_scalar().clone();
    let sides = compute_sides(c, base, opts)?;
    let rhs = sides.class_matrix.scale(&-s.clone());
    let identity_holds = sides.restriction == rhs;
    let ext_st = sides.ext.total.splitting_type().clone();
    let invertible = sides.restriction.rows() == sides.restriction.cols()
        && sides.restriction.rows() > 0
        && sides.restriction.inverse().is_some();
    let all_ones = ext_st.is_all_ones();
    Ok(WardReport {
        base_splitting: c.base.splitting_type().clone(),
        extension_nonnegative: ext_st.is_nonnegative(),
        extension_splitting: ext_st,
        kernel_subbundle_trivial: sides.kernel_trivial,
        rho_prime_restriction: sides.restriction,
        class_matrix: sides.class_matrix,
        scalar: s,
        identity_holds,
        restriction_invertible: invertible,
        all_ones,
        criterion_consistent: invertible == all_ones,
        quadrature_deviation: sides.deviation,
    })
}

/// Check that fails with [`Error::IdentityViolation`] instead of reporting.
pub fn ward_identity_assert(c: &ExtensionClass, opts: WardOptions) -> Result<WardReport> {
    let r = ward_identity_check(c, opts)?;
    if !r.identity_holds {
        return Err(Error::IdentityViolation {
            lhs: format!("{:?}", r.rho_prime_restriction),
            rhs: format!("-({}) * {:?}", r.scalar, r.class_matrix),
        });
    }
    Ok(r)
}

/// `(ker ρ)* ≅ H¹(𝒰*)` made explicit: rows are `p∘α` of the normal-form
/// basis of `H¹(𝒰*)`.
#[derive(Clone, Debug, Serialize)]
pub struct KerRhoPairing {
    pub kernel_basis: Mat<QI>,
    pub pairing: Mat<QI>,
    pub dim_ker_rho: usize,
    pub h1_dual: usize,
    pub invertible: bool,
}

pub fn ker_rho_h1_pairing(base: &SectionModel<QI>) -> Result<KerRhoPairing> {
    let poles = PolesProjection::new(&base.space)?;
    let h1_dual = base.bundle.dual().h1_dim()?;
    let classes = h1_dual_basis(&base.bundle);
    let mut rows = Vec::with_capacity(classes.len());
    for c in &classes {
        let (alpha, _) = class_alpha(c, base, WardOptions::default())?;
        rows.push(poles.apply_rows(&alpha).row(0).to_vec());
    }
    let d = poles.kernel.cols();
    let pairing = if rows.is_empty() { Mat::zeros(0, d) } else { Mat::from_rows(rows) };
    let invertible = pairing.rows() == d && (d == 0 || pairing.inverse().is_some());
    Ok(KerRhoPairing { kernel_basis: poles.kernel, pairing, dim_ker_rho: d, h1_dual, invertible })
}

impl Serialize for ExtensionClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            base: &'a Bundle<QI>,
            #[serde(rename = "W")]
            w: usize,
            cocycle: &'a LaurentMatrix<QI>,
        }
        Repr { base: &self.base, w: self.w_dim, cocycle: &self.cocycle }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtensionClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            base: Bundle<QI>,
            #[serde(rename = "W")]
            w: usize,
            cocycle: LaurentMatrix<QI>,
        }
        let r = Repr::deserialize(d)?;
        if r.cocycle.rows() != r.w {
            return Err(serde::de::Error::custom(format!("W = {} but cocycle has {} rows", r.w, r.cocycle.rows())));
        }
        ExtensionClass::new(r.base, r.cocycle).map_err(serde::de::Error::custom)
    }
}
