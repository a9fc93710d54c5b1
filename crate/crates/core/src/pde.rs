//! The PDE problems known to the certifier.
//!
//! Coordinate 0 is time and coordinate 1 the spatial variable. For the
//! Schrödinger problem output 0 is the real part and output 1 the imaginary
//! part of the complex field.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::linear::{BoundError, InputBox};
use crate::relax::{
    neg_sin_pi, relax_neg_sin_pi, relax_two_sech, relax_x2_cos_pi, two_sech, x2_cos_pi, LinRelax,
    Line, RelaxError,
};
use crate::residual::{d2u, du, u, Monomial, ResidualExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeName {
    Burgers,
    Schrodinger,
    AllenCahn,
    DiffusionSorption,
}

impl PdeName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PdeName::Burgers => "burgers",
            PdeName::Schrodinger => "schrodinger",
            PdeName::AllenCahn => "allen-cahn",
            PdeName::DiffusionSorption => "diffusion-sorption",
        }
    }
}

impl fmt::Display for PdeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("unknown PDE `{0}` (expected burgers, schrodinger, allen-cahn or diffusion-sorption)")]
pub struct UnknownPde(pub String);

impl FromStr for PdeName {
    type Err = UnknownPde;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "burgers" => Ok(PdeName::Burgers),
            "schrodinger" => Ok(PdeName::Schrodinger),
            "allen-cahn" => Ok(PdeName::AllenCahn),
            "diffusion-sorption" => Ok(PdeName::DiffusionSorption),
            other => Err(UnknownPde(other.to_string())),
        }
    }
}

/// Initial-condition targets `u₀(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetFn {
    NegSinPi,
    TwoSech,
    Zero,
    X2CosPi,
}

impl TargetFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TargetFn::NegSinPi => neg_sin_pi(x),
            TargetFn::TwoSech => two_sech(x),
            TargetFn::Zero => 0.0,
            TargetFn::X2CosPi => x2_cos_pi(x),
        }
    }

    pub fn relax(&self, l: f64, h: f64) -> Result<LinRelax, RelaxError> {
        match self {
            TargetFn::NegSinPi => relax_neg_sin_pi(l, h),
            TargetFn::TwoSech => relax_two_sech(l, h),
            TargetFn::Zero => Ok(LinRelax {
                upper: Line::new(0.0, 0.0),
                lower: Line::new(0.0, 0.0),
            }),
            TargetFn::X2CosPi => relax_x2_cos_pi(l, h),
        }
    }
}

/// `u_j(t₀, x) = target_j(x)` for each output `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub time: f64,
    pub coord: usize,
    pub targets: Vec<TargetFn>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    /// `value_coef·u + deriv_coef·∂u/∂x_coord − target = 0` on `x_coord = at`.
    Robin {
        coord: usize,
        at: f64,
        output: usize,
        value_coef: f64,
        deriv_coef: f64,
        target: f64,
    },
    /// `u(x_coord = hi) = u(x_coord = lo)` (or the same for `∂u/∂x_coord`) for each listed output.
    Periodic {
        coord: usize,
        lo: f64,
        hi: f64,
        derivative: bool,
        outputs: Vec<usize>,
    },
}

impl BoundaryCondition {
    /// Face of the domain the condition is branched over.
    pub fn face(&self, domain: &InputBox) -> Result<InputBox, BoundError> {
        match *self {
            BoundaryCondition::Robin { coord, at, .. } => domain.with_coordinate(coord, at, at),
            BoundaryCondition::Periodic { coord, lo, .. } => domain.with_coordinate(coord, lo, lo),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeProblem {
    pub name: PdeName,
    pub outputs: usize,
    pub domain: InputBox,
    /// One expression per real residual component; empty when not certified.
    pub residuals: Vec<ResidualExpr>,
    pub initial: Option<InitialCondition>,
    pub boundaries: Vec<BoundaryCondition>,
}

impl PdeProblem {
    /// Initial slice `t = t₀` of the domain.
    pub fn initial_face(&self) -> Option<Result<InputBox, BoundError>> {
        self.initial
            .as_ref()
            .map(|ic| self.domain.with_coordinate(0, ic.time, ic.time))
    }
}

/// Left boundary value for diffusion-sorption: the stated condition is
/// `u(t, 0) = 0`, while the reported check uses `u(t, 0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SorptionLeft {
    #[default]
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PdeOptions {
    pub sorption_left: SorptionLeft,
}

pub const BURGERS_VISCOSITY: f64 = 0.01 / PI;
pub const ALLEN_CAHN_RHO: f64 = 5.0;
pub const ALLEN_CAHN_NU: f64 = 1e-4;
pub const SORPTION_D: f64 = 5e-4;

pub fn build_pde(name: PdeName) -> PdeProblem {
    build_pde_with(name, PdeOptions::default())
}

pub fn build_pde_with(name: PdeName, opts: PdeOptions) -> PdeProblem {
    let domain = |t1: f64, x0: f64, x1: f64| {
        InputBox::new(vec![0.0, x0], vec![t1, x1]).expect("static domain")
    };
    let expr = |terms: Vec<Monomial>| ResidualExpr::new(terms).expect("static coefficients");
    let m = Monomial::new;
    match name {
        PdeName::Burgers => PdeProblem {
            name,
            outputs: 1,
            domain: domain(1.0, -1.0, 1.0),
            residuals: vec![expr(vec![
                m(1.0, vec![du(0, 0)]),
                m(1.0, vec![u(0), du(0, 1)]),
                m(-BURGERS_VISCOSITY, vec![d2u(0, 1)]),
            ])],
            initial: Some(InitialCondition {
                time: 0.0,
                coord: 1,
                targets: vec![TargetFn::NegSinPi],
            }),
            boundaries: [-1.0, 1.0]
                .into_iter()
                .map(|at| BoundaryCondition::Robin {
                    coord: 1,
                    at,
                    output: 0,
                    value_coef: 1.0,
                    deriv_coef: 0.0,
                    target: 0.0,
                })
                .collect(),
        },
        PdeName::Schrodinger => {
            // i ∂t h + 0.5 ∂xx h + |h|² h with h = p + i q
            let real = expr(vec![
                m(-1.0, vec![du(1, 0)]),
                m(0.5, vec![d2u(0, 1)]),
                m(1.0, vec![u(0), u(0), u(0)]),
                m(1.0, vec![u(1), u(1), u(0)]),
            ]);
            let imag = expr(vec![
                m(1.0, vec![du(0, 0)]),
                m(0.5, vec![d2u(1, 1)]),
                m(1.0, vec![u(0), u(0), u(1)]),
                m(1.0, vec![u(1), u(1), u(1)]),
            ]);
            PdeProblem {
                name,
                outputs: 2,
                domain: domain(PI / 2.0, -5.0, 5.0),
                residuals: vec![real, imag],
                initial: Some(InitialCondition {
                    time: 0.0,
                    coord: 1,
                    targets: vec![TargetFn::TwoSech, TargetFn::Zero],
                }),
                boundaries: [false, true]
                    .into_iter()
                    .map(|derivative| BoundaryCondition::Periodic {
                        coord: 1,
                        lo: -5.0,
                        hi: 5.0,
                        derivative,
                        outputs: vec![0, 1],
                    })
                    .collect(),
            }
        }
        PdeName::AllenCahn => PdeProblem {
            name,
            outputs: 1,
            domain: domain(1.0, -1.0, 1.0),
            residuals: vec![expr(vec![
                m(1.0, vec![du(0, 0)]),
                m(ALLEN_CAHN_RHO, vec![u(0), u(0), u(0)]),
                m(-ALLEN_CAHN_RHO, vec![u(0)]),
                m(-ALLEN_CAHN_NU, vec![d2u(0, 1)]),
            ])],
            initial: Some(InitialCondition {
                time: 0.0,
                coord: 1,
                targets: vec![TargetFn::X2CosPi],
            }),
            boundaries: vec![BoundaryCondition::Periodic {
                coord: 1,
                lo: -1.0,
                hi: 1.0,
                derivative: false,
                outputs: vec![0],
            }],
        },
        PdeName::DiffusionSorption => PdeProblem {
            name,
            outputs: 1,
            domain: domain(500.0, 0.0, 1.0),
            residuals: Vec::new(),
            initial: Some(InitialCondition {
                time: 0.0,
                coord: 1,
                targets: vec![TargetFn::Zero],
            }),
            boundaries: vec![
                BoundaryCondition::Robin {
                    coord: 1,
                    at: 0.0,
                    output: 0,
                    value_coef: 1.0,
                    deriv_coef: 0.0,
                    target: match opts.sorption_left {
                        SorptionLeft::Zero => 0.0,
                        SorptionLeft::One => 1.0,
                    },
                },
                BoundaryCondition::Robin {
                    coord: 1,
                    at: 1.0,
                    output: 0,
                    value_coef: 1.0,
                    deriv_coef: -SORPTION_D,
                    target: 0.0,
                },
            ],
        },
    }
}
