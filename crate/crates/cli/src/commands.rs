use std::path::Path;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use twistorlab_core::cp1_bundles::Bundle;
use twistorlab_core::flat_models::{
    clebsch_projections, horizontal_conformality, invariant_form, invariant_symmetric_forms, laplacian_hk, IrrepUk,
};
use twistorlab_core::gibbons_hawking::{refinement_csv, verify_suite, MonopoleData, SuiteConfig, SuiteThresholds};
use twistorlab_core::penrose::{hypercomplex_certificate, prop52_identity, Germ, PenroseModel};
use twistorlab_core::report::Check;
use twistorlab_core::rho_quat::{space_from_bundle, RhoQuatSpace};
use twistorlab_core::scalar::{parse_rational, Field, QI};
use twistorlab_core::ward::{
    extension_bundle, random_classes, ward_identity_check, ExtensionClass, PolesProjection, WardOptions,
};
use twistorlab_core::Error;

/// Failure of a command before a report exists.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) => Failure::Input(m),
            e => Failure::Core(e),
        }
    }
}

/// What a command produced, and the exit code used if any check fails.
pub struct Outcome {
    pub checks: Vec<Check>,
    pub result: Value,
    pub fail_code: i32,
    pub plot: Option<String>,
    pub seeded: bool,
}

pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_IDENTITY: i32 = 4;

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

/// `re` or `re:im` entries separated by commas.
pub fn parse_point(s: &str) -> Result<Vec<QI>, Failure> {
    s.split(',')
        .map(|e| {
            let (re, im) = e.split_once(':').unwrap_or((e, "0"));
            let re = parse_rational(re).map_err(Failure::Input)?;
            let im = parse_rational(im).map_err(Failure::Input)?;
            Ok(QI::new(re, im))
        })
        .collect()
}

pub fn bundle_split(b: &Bundle<QI>) -> Outcome {
    let report = b.split_report();
    let st = &report.splitting;
    let checks = vec![
        Check::flag("certificate_multiplies_out", report.verify(b.transition())),
        Check::flag("degree_sum_is_first_chern_number", st.degree() == b.degree()),
    ];
    let result = json!({
        "rank": b.rank(),
        "degree": b.degree(),
        "degrees": st.degrees,
        "gauge": to_value(report)["gauge"].clone(),
        "nonnegative": st.is_nonnegative(),
        "h0": st.h0(),
        "h1": st.h1(),
    });
    Outcome { checks, result, fail_code: EXIT_INVARIANT, plot: None, seeded: false }
}

pub fn bundle_cohomology(b: &Bundle<QI>) -> Outcome {
    let st = b.splitting_type();
    let (d0, d1) = (b.h0_dim_direct(), b.h1_dim_direct());
    let rr = b.degree() + b.rank() as i64;
    let checks = vec![
        Check::flag("h0_direct_matches_splitting", d0 == st.h0()),
        Check::flag("h1_direct_matches_splitting", d1 == st.h1()),
        Check::flag("riemann_roch", d0 as i64 - d1 as i64 == rr),
    ];
    let result = json!({
        "degrees": st.degrees,
        "h0": st.h0(),
        "h1": st.h1(),
        "h0_direct": d0,
        "h1_direct": d1,
        "h0_degree_bound": b.h0_degree_bound(),
    });
    Outcome { checks, result, fail_code: EXIT_INVARIANT, plot: None, seeded: false }
}

pub fn ward_extend(c: &ExtensionClass) -> Result<Outcome, Failure> {
    let ext = extension_bundle(c)?;
    let base = c.base.splitting_type();
    let st = ext.total.splitting_type();
    let mut checks = vec![Check::flag("certificate_multiplies_out", ext.total.split_report().verify(ext.total.transition()))];
    if base.is_nonnegative() {
        checks.push(Check::flag("extension_nonnegative", st.is_nonnegative()));
    }
    let result = json!({
        "base_splitting": base.degrees,
        "W": c.w_dim,
        "extension_splitting": st.degrees,
        "all_ones": st.is_all_ones(),
        "transition": to_value(ext.total.transition()),
    });
    Ok(Outcome { checks, result, fail_code: EXIT_INVARIANT, plot: None, seeded: false })
}

pub fn ward_identity(c: &ExtensionClass, random: Option<usize>, seed: u64, opts: WardOptions) -> Result<Outcome, Failure> {
    let classes = match random {
        None => vec![c.clone()],
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let top = c.base.splitting_type().degrees.first().copied().unwrap_or(0);
            random_classes(&mut rng, &c.base, c.w_dim, n, -3, top + 2)
        }
    };
    let mut reports = Vec::with_capacity(classes.len());
    for class in &classes {
        reports.push(ward_identity_check(class, opts)?);
    }
    let count = |f: &dyn Fn(&twistorlab_core::ward::WardReport) -> bool| reports.iter().filter(|r| f(r)).count();
    let n = reports.len();
    let worst = reports.iter().map(|r| r.quadrature_deviation).fold(0.0, f64::max);
    let checks = vec![
        Check::flag("extension_nonnegative", count(&|r| r.extension_nonnegative) == n),
        Check::flag("kernel_subbundle_trivial", count(&|r| r.kernel_subbundle_trivial) == n),
        Check::flag("identity", count(&|r| r.identity_holds) == n),
        Check::flag("all_ones_iff_invertible", count(&|r| r.criterion_consistent) == n),
        Check::within("quadrature_deviation", worst, opts.quad_tol),
    ];
    let result = json!({
        "classes": n,
        "invertible": count(&|r| r.restriction_invertible),
        "scalar": to_value(&reports.first().map(|r| r.scalar.clone())),
        "reports": to_value(&reports),
        "inputs": if random.is_some() { to_value(&classes) } else { Value::Null },
    });
    Ok(Outcome { checks, result, fail_code: EXIT_IDENTITY, plot: None, seeded: random.is_some() })
}

fn at_or_origin(at: Option<&str>, n: usize) -> Result<Vec<QI>, Failure> {
    let x = match at {
        Some(s) => parse_point(s)?,
        None => vec![QI::int(0); n],
    };
    if x.len() != n {
        return Err(Failure::Input(format!("--at has {} coordinates, dim U = {n}", x.len())));
    }
    Ok(x)
}

/// `Some(k)` when `space` is the polynomial model of `O(k)`, `k` even, so
/// its coordinates are those of `U_k`.
fn flat_model_degree(space: &RhoQuatSpace<QI>, model: &PenroseModel) -> Option<u32> {
    let st = model.splitting();
    if st.rank() != 1 || st.degrees[0] % 2 != 0 {
        return None;
    }
    let std = space_from_bundle::<QI>(st).ok()?;
    (std.rho == space.rho).then_some(st.degrees[0] as u32)
}

pub fn penrose_eval(g: &Germ, space: &RhoQuatSpace<QI>, at: Option<&str>, nodes: usize, tol: f64) -> Result<Outcome, Failure> {
    let model = PenroseModel::from_space(space)?;
    let x = at_or_origin(at, model.dim_u())?;
    let polys = model.pluriharmonic_poly(g)?;
    let exact: Vec<QI> = polys.iter().map(|p| p.eval(&x)).collect();
    let xc: Vec<Complex<f64>> = x.iter().map(|v| v.to_c64()).collect();
    let quad = model.quadrature_eval(g, &xc, nodes)?;
    let dev = exact.iter().zip(&quad).map(|(e, q)| (e.to_c64() - q).norm()).fold(0.0, f64::max);
    let mut checks = vec![Check::within("quadrature_matches_exact", dev, tol)];
    if let Some(k) = flat_model_degree(space, &model) {
        let harmonic = polys.iter().map(|p| laplacian_hk(p, k)).collect::<Result<Vec<_>, _>>()?;
        checks.push(Check::flag("laplacian_vanishes", harmonic.iter().all(|p| p.is_zero())));
    }
    let result = json!({
        "splitting": model.splitting().degrees,
        "at": to_value(&x),
        "u": to_value(&exact),
        "u_quadrature": quad.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "polynomial": to_value(&polys),
        "max_abs_exponent": model.max_abs_exponent(g),
    });
    Ok(Outcome { checks, result, fail_code: EXIT_IDENTITY, plot: None, seeded: false })
}

pub fn penrose_certify(g: &Germ, space: &RhoQuatSpace<QI>, at: Option<&str>, nodes: usize, tol: f64) -> Result<Outcome, Failure> {
    let model = PenroseModel::from_space(space)?;
    let x = at_or_origin(at, model.dim_u())?;
    let grad = prop52_identity(&model, g, &x, nodes, tol)?;
    let mut checks = vec![
        Check::flag("identity_exact", grad.exact_holds),
        Check::within("identity_quadrature", grad.quadrature_deviation, tol.max(1e-8)),
    ];
    let dim_ker = PolesProjection::new(space)?.kernel.cols();
    let certificate = if g.m == dim_ker {
        let c = hypercomplex_certificate(&model, g, &x)?;
        checks.push(Check::flag("criterion_consistent", c.consistent));
        checks.push(Check::flag("hypercomplex", c.status == "PASS"));
        to_value(&c)
    } else {
        Value::Null
    };
    let result = json!({
        "splitting": model.splitting().degrees,
        "at": to_value(&x),
        "extension_splitting": grad.extension_splitting.degrees,
        "identity": to_value(&grad),
        "certificate": certificate,
    });
    Ok(Outcome { checks, result, fail_code: EXIT_IDENTITY, plot: None, seeded: false })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhPreset {
    pub constant: f64,
    pub centres: Vec<[f64; 3]>,
}

/// Input of `gh verify`: explicit fields or the Gibbons–Hawking preset.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhInput {
    #[serde(default)]
    pub fields: Option<MonopoleData>,
    #[serde(default)]
    pub gibbons_hawking: Option<GhPreset>,
    /// Pole of the test function `1/r`.
    #[serde(default)]
    pub centre: Option<[f64; 3]>,
    #[serde(default)]
    pub suite: Option<SuiteConfig>,
    #[serde(default)]
    pub thresholds: Option<SuiteThresholds>,
}

pub fn gh_verify(input: &GhInput, plot: bool) -> Result<Outcome, Failure> {
    let data = match (&input.fields, &input.gibbons_hawking) {
        (Some(f), None) => f.clone(),
        (None, Some(p)) => MonopoleData::gibbons_hawking(p.constant, &p.centres),
        _ => return Err(Failure::Input("exactly one of \"fields\" and \"gibbons_hawking\" is required".into())),
    };
    let centre = input.centre.or_else(|| data.singular_points.first().copied()).unwrap_or([0.0; 3]);
    let cfg = input.suite.clone().unwrap_or_default();
    let thresholds = input.thresholds.unwrap_or_default();
    let report = verify_suite(&data, centre, &cfg)?;
    let checks = report.checks(&thresholds);
    let plot = plot.then(|| refinement_csv(&report.refinement));
    let result = json!({ "centre": centre, "thresholds": to_value(&thresholds), "suite": to_value(&report) });
    Ok(Outcome { checks, result, fail_code: EXIT_IDENTITY, plot, seeded: false })
}

pub fn rep_clebsch(k: u32) -> Result<Outcome, Failure> {
    let cg = clebsch_projections::<QI>(k)?;
    let mut checks = Vec::new();
    for m in [k - 2, k - 1, k, 1] {
        checks.push(Check::flag(format!("sl2_relations_U{m}"), IrrepUk::<QI>::new(m).commutation_holds()));
    }
    checks.push(Check::flag("clebsch_gordan", cg.verify()));
    let conformality = if k.is_multiple_of(2) {
        let c = horizontal_conformality::<QI>(k)?;
        checks.push(Check::flag("horizontally_conformal", c.conformal));
        checks.push(Check::flag("negative_control_fails", c.negative_control_fails));
        to_value(&c)
    } else {
        Value::Null
    };
    let result = json!({ "k": k, "clebsch": to_value(&cg), "conformality": conformality });
    Ok(Outcome { checks, result, fail_code: EXIT_INVARIANT, plot: None, seeded: false })
}

pub fn rep_form(k: u32) -> Result<Outcome, Failure> {
    let dim = invariant_symmetric_forms::<QI>(k).len();
    let form = invariant_form::<QI>(k)?;
    let checks = vec![
        Check::flag("solution_space_one_dimensional", dim == 1),
        Check::flag("invariant", form.is_invariant()),
    ];
    let result = json!({ "k": k, "solution_dim": dim, "form": to_value(&form) });
    Ok(Outcome { checks, result, fail_code: EXIT_INVARIANT, plot: None, seeded: false })
}
