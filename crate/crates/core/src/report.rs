//! Conventions block and per-check records shared by machine-readable reports.

use serde::Serialize;

use crate::ward::ward_scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Conventions {
    pub chart: &'static str,
    pub transition: &'static str,
    pub splitting: &'static str,
    pub contour: &'static str,
    pub normalization: &'static str,
    pub poles_projection: &'static str,
    pub ward_scalar: String,
    pub scalars: &'static str,
    pub orientation: &'static str,
    pub monopole: &'static str,
}

impl Conventions {
    pub fn current() -> Self {
        Conventions {
            chart: "z on the finite chart, w = 1/z at infinity",
            transition: "s0(z) = T(z) s_inf(1/z); T = z^k is O(k)",
            splitting: "degrees weakly decreasing; gauge A0 T A_inf(1/z) = diag(z^a)",
            contour: "unit circle z = e^{it}, t in [0, 2pi)",
            normalization: "u = (1/2pi) int h dt; N-node trapezoid rule",
            poles_projection: "p(l) = xi_l restricted to ker rho, xi_l = l.rho on e1 (x) F and 0 on e0 (x) F",
            ward_scalar: format!("rho'|ker rho = -s * p(alpha), s = {}", ward_scalar()),
            scalars: "exact Gaussian rationals {re, im} as p/q strings; floats in IEEE double",
            orientation: "(x, t) -> [[t + i x3, x2 + i x1], [-x2 + i x1, t - i x3]] in C2 (x) C2; anti-self-dual = vanishing on every l_z (x) F, flat coframe",
            monopole: "dv = *dA on R^3, g = v h + (dt + A)^2 / v",
        }
    }
}

/// One named check with an optional measured value and threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Check {
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), status: status(ok), value: None, threshold: None }
    }

    /// Passes when `value < threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), status: status(value < threshold), value: Some(value), threshold: Some(threshold) }
    }

    /// Passes when `value ≤ tol`.
    pub fn within(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check { name: name.into(), status: status(value <= tol), value: Some(value), threshold: Some(tol) }
    }

    /// Passes when `|value − target| ≤ tol`; the threshold field records `tol`.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let ok = (value - target).abs() <= tol;
        Check { name: name.into(), status: status(ok), value: Some(value), threshold: Some(tol) }
    }

    pub fn passed(&self) -> bool {
        self.status == "PASS"
    }
}

pub fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}
