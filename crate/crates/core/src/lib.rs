//! Particular solutions of linear ODEs with constant coefficients.
//!
//! `p(D) y = q` is factored over the characteristic roots into first-order
//! operators `(D - r)`, and each factor is inverted with an integrating
//! factor inside a closed algebra of terms `c t^k ln^m(t) e^{λt}`. Exact
//! Gaussian-rational arithmetic is used whenever the inputs and roots allow
//! it. [`varcoef`] handles `y'' - a^2 x^{2n} y = q` numerically.

pub mod cascade;
pub mod expr;
pub mod format;
pub mod func;
pub mod json;
pub mod ode;
pub mod parse;
pub mod real;
pub mod roots;
pub mod scalar;
pub mod testing;
pub mod varcoef;
pub mod verify;
