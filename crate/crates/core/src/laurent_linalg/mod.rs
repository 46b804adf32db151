//! Exact Laurent-polynomial linear algebra over the chart overlap `C*`.

mod dense;
mod matrix;
mod poly;

pub use dense::Mat;
pub use matrix::LaurentMatrix;
pub use poly::LaurentPoly;
