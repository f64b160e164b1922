use std::fmt;

use thiserror::Error;

use crate::expr::Expr;
use crate::scalar::Scalar;

/// Name of the independent variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variable {
    #[default]
    T,
    X,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::T => "t",
            Variable::X => "x",
        }
    }

    pub fn from_name(s: &str) -> Option<Variable> {
        match s {
            "t" => Some(Variable::T),
            "x" => Some(Variable::X),
            _ => None,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("an ODE needs order at least 1")]
    OrderTooLow,
    #[error("leading coefficient must be nonzero")]
    ZeroLeading,
    #[error("coefficient a_{index} = {value} is not a finite real constant")]
    BadCoefficient { index: usize, value: String },
}

/// `a_n y^(n) + … + a_1 y' + a_0 y = q(t)` with real constant coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearODE {
    coeffs: Vec<Scalar>,
    forcing: Expr,
    var: Variable,
}

impl LinearODE {
    /// `coeffs[k]` multiplies the k-th derivative.
    pub fn new(coeffs: Vec<Scalar>, forcing: Expr, var: Variable) -> Result<Self, OdeError> {
        if coeffs.len() < 2 {
            return Err(OdeError::OrderTooLow);
        }
        for (index, c) in coeffs.iter().enumerate() {
            let z = c.to_c64();
            if !c.is_real() || !z.re.is_finite() {
                return Err(OdeError::BadCoefficient { index, value: c.to_string() });
            }
        }
        if coeffs.last().is_some_and(|c| c.is_zero()) {
            return Err(OdeError::ZeroLeading);
        }
        Ok(LinearODE { coeffs, forcing, var })
    }

    pub fn from_ints(coeffs: &[i64], forcing: Expr) -> Result<Self, OdeError> {
        LinearODE::new(coeffs.iter().map(|&c| Scalar::from_int(c)).collect(), forcing, Variable::T)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn leading(&self) -> &Scalar {
        self.coeffs.last().expect("order >= 1")
    }

    pub fn forcing(&self) -> &Expr {
        &self.forcing
    }

    pub fn var(&self) -> Variable {
        self.var
    }

    pub fn with_forcing(&self, forcing: Expr) -> LinearODE {
        LinearODE { coeffs: self.coeffs.clone(), forcing, var: self.var }
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_exact) && self.forcing.is_exact()
    }

    /// Same equation with every scalar moved to the approximate backend.
    pub fn to_approx(&self) -> LinearODE {
        LinearODE {
            coeffs: self.coeffs.iter().map(Scalar::to_approx).collect(),
            forcing: self.forcing.to_approx(),
            var: self.var,
        }
    }
}
