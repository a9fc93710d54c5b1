//! Polynomial residual expressions over network outputs and their derivatives.
//!
//! A residual is a sum of monomials in atoms (`u_j`, `∂ᵢu_j`, `∂ᵢ²u_j`).
//! Each monomial is reduced left to right with McCormick planes into an
//! affine function of the atoms; the atoms are then replaced by their
//! affine bounds in `x` according to the sign of their coefficient and the
//! result is concretized over the box.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ndarray::Array1;

use crate::derivative::BoundConfig;
use crate::linear::{
    affine_max, affine_min, mccormick_split, AffineBounds, BoundError, InputBox, Interval,
};
use crate::network::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Value { output: usize },
    First { output: usize, coord: usize },
    Second { output: usize, coord: usize },
}

impl Atom {
    pub fn output(&self) -> usize {
        match *self {
            Atom::Value { output } | Atom::First { output, .. } | Atom::Second { output, .. } => {
                output
            }
        }
    }

    pub fn coord(&self) -> Option<usize> {
        match *self {
            Atom::Value { .. } => None,
            Atom::First { coord, .. } | Atom::Second { coord, .. } => Some(coord),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Atom::Value { output } => write!(f, "u{output}"),
            Atom::First { output, coord } => write!(f, "d{coord} u{output}"),
            Atom::Second { output, coord } => write!(f, "d{coord}{coord} u{output}"),
        }
    }
}

pub fn u(output: usize) -> Atom {
    Atom::Value { output }
}

pub fn du(output: usize, coord: usize) -> Atom {
    Atom::First { output, coord }
}

pub fn d2u(output: usize, coord: usize) -> Atom {
    Atom::Second { output, coord }
}

/// `coeff · Π atoms`; an empty product is the constant `coeff`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub atoms: Vec<Atom>,
}

impl Monomial {
    pub fn new(coeff: f64, atoms: Vec<Atom>) -> Self {
        Monomial { coeff, atoms }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualExpr {
    pub terms: Vec<Monomial>,
}

impl ResidualExpr {
    pub fn new(terms: Vec<Monomial>) -> Result<Self, BoundError> {
        if let Some(t) = terms.iter().find(|t| !t.coeff.is_finite()) {
            return Err(BoundError::Interval {
                lo: t.coeff,
                hi: t.coeff,
            });
        }
        Ok(ResidualExpr { terms })
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms
            .iter()
            .flat_map(|t| t.atoms.iter().copied())
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.atoms.len()).max().unwrap_or(0)
    }

    pub fn eval(&self, value: impl Fn(Atom) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.atoms.iter().map(|&a| value(a)).product::<f64>())
            .sum()
    }

    /// Evaluates with one jet per coordinate (`jets[i]` holds derivatives along `i`).
    pub fn eval_jets(&self, jets: &[Option<Jet>]) -> f64 {
        self.eval(|a| match a {
            Atom::Value { output } => {
                jets.iter()
                    .flatten()
                    .next()
                    .expect("at least one jet")
                    .value[output]
            }
            Atom::First { output, coord } => {
                jets[coord].as_ref().expect("jet for coordinate").first[output]
            }
            Atom::Second { output, coord } => {
                jets[coord].as_ref().expect("jet for coordinate").second[output]
            }
        })
    }
}

/// Affine sandwich of one atom plus its concrete range.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomBound {
    pub lower: Array1<f64>,
    pub lower_offset: f64,
    pub upper: Array1<f64>,
    pub upper_offset: f64,
    pub interval: Interval,
}

impl AtomBound {
    pub fn from_bounds(b: &AffineBounds, row: usize) -> Self {
        AtomBound {
            lower: b.lower.coeffs.row(row).to_owned(),
            lower_offset: b.lower.offset[row],
            upper: b.upper.coeffs.row(row).to_owned(),
            upper_offset: b.upper.offset[row],
            interval: b.interval(row),
        }
    }

    /// Constant bounds, exact when the atom is known to lie in `iv`.
    pub fn constant(iv: Interval, d0: usize) -> Self {
        AtomBound {
            lower: Array1::zeros(d0),
            lower_offset: iv.lo,
            upper: Array1::zeros(d0),
            upper_offset: iv.hi,
            interval: iv,
        }
    }
}

pub type AtomBounds = BTreeMap<Atom, AtomBound>;

/// `Σ coef[k]·atom[k] + constant`
#[derive(Debug, Clone)]
struct AtomLinear {
    coef: Vec<f64>,
    constant: f64,
}

impl AtomLinear {
    fn zeros(n: usize) -> Self {
        AtomLinear {
            coef: vec![0.0; n],
            constant: 0.0,
        }
    }

    fn unit(n: usize, k: usize) -> Self {
        let mut s = Self::zeros(n);
        s.coef[k] = 1.0;
        s
    }

    fn add_scaled(&mut self, other: &AtomLinear, c: f64) {
        for (a, b) in self.coef.iter_mut().zip(&other.coef) {
            *a += c * b;
        }
        self.constant += c * other.constant;
    }
}

/// Encloses `expr(x)` for every `x` in the box.
pub fn bound_residual(
    expr: &ResidualExpr,
    atoms: &AtomBounds,
    b: &InputBox,
    cfg: &BoundConfig,
) -> Result<Interval, BoundError> {
    cfg.validate()?;
    let list: Vec<Atom> = expr.atoms().into_iter().collect();
    let mut bounds = Vec::with_capacity(list.len());
    for a in &list {
        let ab = atoms
            .get(a)
            .ok_or_else(|| BoundError::MissingAtom(a.to_string()))?;
        b.check_dim(ab.lower.len())?;
        b.check_dim(ab.upper.len())?;
        bounds.push(ab);
    }
    let index = |a: &Atom| list.binary_search(a).expect("atom listed");
    let n = list.len();
    let mut upper = AtomLinear::zeros(n);
    let mut lower = AtomLinear::zeros(n);
    for term in &expr.terms {
        let Some((first, rest)) = term.atoms.split_first() else {
            upper.constant += term.coeff;
            lower.constant += term.coeff;
            continue;
        };
        let k0 = index(first);
        let (mut pu, mut pl) = (AtomLinear::unit(n, k0), AtomLinear::unit(n, k0));
        let mut range = bounds[k0].interval;
        for a in rest {
            let k = index(a);
            let ai = bounds[k].interval;
            let mc = mccormick_split(range, ai, cfg.product_upper, cfg.product_lower)?;
            let mut nu = AtomLinear::zeros(n);
            nu.add_scaled(
                if mc.upper.coef_a >= 0.0 { &pu } else { &pl },
                mc.upper.coef_a,
            );
            nu.coef[k] += mc.upper.coef_b;
            nu.constant += mc.upper.constant;
            let mut nl = AtomLinear::zeros(n);
            nl.add_scaled(
                if mc.lower.coef_a >= 0.0 { &pl } else { &pu },
                mc.lower.coef_a,
            );
            nl.coef[k] += mc.lower.coef_b;
            nl.constant += mc.lower.constant;
            pu = nu;
            pl = nl;
            range = range.mul(&ai);
        }
        if term.coeff >= 0.0 {
            upper.add_scaled(&pu, term.coeff);
            lower.add_scaled(&pl, term.coeff);
        } else {
            upper.add_scaled(&pl, term.coeff);
            lower.add_scaled(&pu, term.coeff);
        }
    }
    let d0 = b.dim();
    let (mut uc, mut uo) = (Array1::<f64>::zeros(d0), upper.constant);
    let (mut lc, mut lo) = (Array1::<f64>::zeros(d0), lower.constant);
    for (k, ab) in bounds.iter().enumerate() {
        let mu = upper.coef[k];
        if mu >= 0.0 {
            uc.scaled_add(mu, &ab.upper);
            uo += mu * ab.upper_offset;
        } else {
            uc.scaled_add(mu, &ab.lower);
            uo += mu * ab.lower_offset;
        }
        let ml = lower.coef[k];
        if ml >= 0.0 {
            lc.scaled_add(ml, &ab.lower);
            lo += ml * ab.lower_offset;
        } else {
            lc.scaled_add(ml, &ab.upper);
            lo += ml * ab.upper_offset;
        }
    }
    let hi = affine_max(uc.view(), uo, b);
    let lo = affine_min(lc.view(), lo, b);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(BoundError::NonFinite {
            layer: 0,
            what: "residual bound".into(),
        });
    }
    Ok(Interval { lo, hi })
}
