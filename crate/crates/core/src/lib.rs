//! Stability of the nilpotent origin of
//! `x' = y^(2l-1) - x^(2k+1)`, `y' = -x + m y^(2s+1)`.
//!
//! The crate computes generalized Lyapunov constants exactly (as rational
//! multiples of positive Gamma-function bases), classifies the origin as an
//! attractor or repeller, emits re-checkable rational certificates for the
//! positivity arguments behind the critical case `s = kl`, `m = m*`, and
//! cross-checks everything with a numerical return map.

pub mod bounds;
pub mod certificate;
pub mod certify;
pub mod error;
pub mod gtrig;
pub mod lyapunov;
pub mod moments;
pub mod ode;
pub mod quad;
pub mod rational;
pub mod simulate;
pub mod special;
pub mod trigpoly;

pub use certificate::{Certificate, Status};
pub use error::{Error, Result};
pub use lyapunov::{classify, LyapunovReport, MValue, Params, Regime, Stability};
pub use moments::{ExactMoment, MomentBase};
pub use rational::Rational;
pub use trigpoly::TrigPolynomial;
