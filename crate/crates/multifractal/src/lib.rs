//! Thermodynamic pressure functions and multifractal spectra for symbolic
//! and piecewise-conformal dynamics.
//!
//! The library computes the pressure function `T(q) = P*(q φ)` of a
//! subshift of finite type (exactly, through weighted transfer matrices, or
//! with certified two-sided brackets from cylinder enumeration) and derives
//! multifractal spectra from it by Legendre transforms:
//!
//! * the Birkhoff spectrum of a potential, `B(α) = htop {x : avg φ → α}`,
//! * the entropy spectrum of a weak Gibbs measure,
//! * Lyapunov spectra `L_E` and `L_D = L_E/α` of conformal interval maps,
//! * the pointwise-dimension spectrum through the implicit `T_D(q)` solving
//!   `P*(q φ1 - T_D(q) log a) = 0`; the `q = 0` value doubles as the
//!   Hausdorff dimension of the repeller (the Bowen-equation root).
//!
//! Every reported spectrum point carries a validity status (proved equal /
//! concave-hull bound / out of domain / ...), and the Legendre route is
//! cross-checked by a direct level-set counting oracle built from certified
//! Birkhoff-average brackets on cylinders.
//!
//! Core numerics are generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the aliases below fix `f64`, which is what the CLI and
//! the fixtures use.

pub mod error;
pub mod expr;
pub mod fixtures;
pub mod legendre;
mod linalg;
pub mod potentials;
pub mod scalar;
pub mod spectra;
pub mod systems;
pub mod thermo;

pub use error::{Error, Result};
pub use scalar::{Bracket, Real};

/// `f64` aliases for the generic core types.
pub type Bracket64 = scalar::Bracket<f64>;
pub type Map64 = systems::PiecewiseConformalMap<f64>;
pub type Branch64 = systems::Branch<f64>;
pub type Potential64 = potentials::Potential<f64>;
pub type RegularityClass64 = potentials::RegularityClass<f64>;
pub type PressureCurve64 = thermo::PressureCurve<f64>;
pub type MarkovMeasure64 = thermo::MarkovMeasure<f64>;
pub type SampledConvexFunction64 = legendre::SampledConvexFunction<f64>;
pub type SubdifferentialMap64 = legendre::SubdifferentialMap<f64>;
pub type SpectrumCurve64 = spectra::SpectrumCurve<f64>;
pub type SpectrumOptions64 = spectra::SpectrumOptions<f64>;
pub type OracleEstimate64 = spectra::OracleEstimate<f64>;
