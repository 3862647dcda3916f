//! Statistical kernels behind the play-value models.
//!
//! Everything is generic over the floating-point type through [`Scalar`];
//! the aliases at the crate root fix it to `f64` (and `f32` where useful).

mod scalar;

pub mod design;
pub mod error;
pub mod gam;
pub mod linalg;
pub mod mixed;
pub mod multinomial;
pub mod spline;
pub mod wls;

pub use error::{NumericsError, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::Matrix<f64>;
pub type DesignMatrix = design::DesignMatrix<f64>;
pub type MultinomialFit = multinomial::MultinomialFit<f64>;
pub type MultinomialOptions = multinomial::MultinomialOptions<f64>;
pub type BSplineBasis = spline::BSplineBasis<f64>;
pub type SplineSmoother = spline::SplineSmoother<f64>;
pub type GamTerm = gam::GamTerm<f64>;
pub type GamFit = gam::GamFit<f64>;
pub type VaryingInterceptFit = mixed::VaryingInterceptFit<f64>;
pub type WlsFit = wls::WlsFit<f64>;

pub type MatrixF32 = linalg::Matrix<f32>;
pub type DesignMatrixF32 = design::DesignMatrix<f32>;
pub type MultinomialFitF32 = multinomial::MultinomialFit<f32>;

pub use gam::{fit_gam_logit, logistic, FactorCodes, GamOptions};
pub use mixed::{fit_varying_intercepts, GroupFactor, MixedOptions};
pub use multinomial::fit_multinomial;
pub use wls::fit_wls;
