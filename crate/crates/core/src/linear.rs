//! Intervals, input boxes, affine bound containers, CROWN propagation of
//! pre-activation bounds, and the McCormick envelope of a product.

use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{DenseNetwork, NetworkError};
use crate::relax::{relax_tanh, LinRelax, RelaxError};

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid interval [{lo}, {hi}]")]
    Interval { lo: f64, hi: f64 },
    #[error("invalid box: {0}")]
    Box(String),
    #[error("layer {layer}: non-finite {what}")]
    NonFinite { layer: usize, what: String },
    #[error("convex coefficient {0} outside [0, 1]")]
    Coefficient(f64),
    #[error("no bounds supplied for {0}")]
    MissingAtom(String),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, BoundError> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(BoundError::Interval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Containment up to `tol·(1 + |v|)`.
    pub fn contains_approx(&self, v: f64, tol: f64) -> bool {
        let slack = tol * (1.0 + v.abs());
        self.lo - slack <= v && v <= self.hi + slack
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Intersection of two enclosures of the same quantity. If rounding made
    /// them disjoint the gap between them is returned.
    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, hi) = (self.lo.max(other.lo), self.hi.min(other.hi));
        if lo <= hi {
            Interval { lo, hi }
        } else {
            Interval { lo: hi, hi: lo }
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo - other.hi,
            hi: self.hi - other.lo,
        }
    }

    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval {
                lo: c * self.lo,
                hi: c * self.hi,
            }
        } else {
            Interval {
                lo: c * self.hi,
                hi: c * self.lo,
            }
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        Interval {
            lo: p.iter().copied().fold(f64::INFINITY, f64::min),
            hi: p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Range of `e²` for `e` in the interval.
    pub fn square(&self) -> Interval {
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        let lo = if self.lo <= 0.0 && self.hi >= 0.0 {
            0.0
        } else {
            a.min(b)
        };
        Interval { lo, hi: a.max(b) }
    }
}

/// Axis-aligned input box; coordinates with `lo == hi` are fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl InputBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, BoundError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(BoundError::Box(format!(
                "corner lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l <= h) {
                return Err(BoundError::Box(format!("coordinate {i}: [{l}, {h}]")));
            }
        }
        Ok(InputBox { lo, hi })
    }

    pub fn from_intervals(iv: &[Interval]) -> Result<Self, BoundError> {
        Self::new(
            iv.iter().map(|i| i.lo).collect(),
            iv.iter().map(|i| i.hi).collect(),
        )
    }

    pub fn point(x: &[f64]) -> Result<Self, BoundError> {
        Self::new(x.to_vec(), x.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn interval(&self, i: usize) -> Interval {
        Interval {
            lo: self.lo[i],
            hi: self.hi[i],
        }
    }

    pub fn is_degenerate(&self, i: usize) -> bool {
        self.lo[i] == self.hi[i]
    }

    pub fn free_coordinates(&self) -> usize {
        (0..self.dim()).filter(|&i| !self.is_degenerate(i)).count()
    }

    /// Copy with coordinate `i` replaced.
    pub fn with_coordinate(&self, i: usize, lo: f64, hi: f64) -> Result<Self, BoundError> {
        let (mut l, mut h) = (self.lo.clone(), self.hi.clone());
        l[i] = lo;
        h[i] = hi;
        Self::new(l, h)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| l <= v && v <= h)
    }

    /// Product of the widths of the free coordinates.
    pub fn volume(&self) -> f64 {
        (0..self.dim())
            .filter(|&i| !self.is_degenerate(i))
            .map(|i| self.hi[i] - self.lo[i])
            .product()
    }

    pub fn check_dim(&self, d: usize) -> Result<(), BoundError> {
        if self.dim() != d {
            return Err(BoundError::Dimension {
                expected: d,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// Maximum of `coeffs·x + offset` over the box.
pub fn affine_max(coeffs: ArrayView1<f64>, offset: f64, b: &InputBox) -> f64 {
    coeffs
        .iter()
        .zip(b.lo.iter().zip(&b.hi))
        .map(|(&c, (&l, &h))| if c >= 0.0 { c * h } else { c * l })
        .sum::<f64>()
        + offset
}

/// Minimum of `coeffs·x + offset` over the box.
pub fn affine_min(coeffs: ArrayView1<f64>, offset: f64, b: &InputBox) -> f64 {
    coeffs
        .iter()
        .zip(b.lo.iter().zip(&b.hi))
        .map(|(&c, (&l, &h))| if c >= 0.0 { c * l } else { c * h })
        .sum::<f64>()
        + offset
}

/// Exact range enclosure of a quantity sandwiched between two affine rows.
pub fn concretize(
    lower: (ArrayView1<f64>, f64),
    upper: (ArrayView1<f64>, f64),
    b: &InputBox,
) -> Result<Interval, BoundError> {
    b.check_dim(lower.0.len())?;
    b.check_dim(upper.0.len())?;
    let lo = affine_min(lower.0, lower.1, b);
    let hi = affine_max(upper.0, upper.1, b);
    Ok(Interval { lo, hi })
}

/// Rows of `A x + a`, one per bounded quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub coeffs: Array2<f64>,
    pub offset: Array1<f64>,
}

impl AffineForm {
    pub fn zeros(rows: usize, d0: usize) -> Self {
        AffineForm {
            coeffs: Array2::zeros((rows, d0)),
            offset: Array1::zeros(rows),
        }
    }

    pub fn constant(values: Array1<f64>, d0: usize) -> Self {
        AffineForm {
            coeffs: Array2::zeros((values.len(), d0)),
            offset: values,
        }
    }

    pub fn rows(&self) -> usize {
        self.offset.len()
    }

    pub fn row(&self, j: usize) -> (ArrayView1<'_, f64>, f64) {
        (self.coeffs.row(j), self.offset[j])
    }

    pub fn eval(&self, x: &[f64]) -> Array1<f64> {
        self.coeffs.dot(&ArrayView1::from(x)) + &self.offset
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .chain(self.offset.iter())
            .all(|v| v.is_finite())
    }
}

/// Lower and upper affine forms of a vector quantity plus their concretization.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineBounds {
    pub lower: AffineForm,
    pub upper: AffineForm,
    pub lo: Array1<f64>,
    pub hi: Array1<f64>,
}

impl AffineBounds {
    pub fn from_forms(lower: AffineForm, upper: AffineForm, b: &InputBox) -> Self {
        let n = lower.rows();
        let lo = Array1::from_shape_fn(n, |j| affine_min(lower.coeffs.row(j), lower.offset[j], b));
        let hi = Array1::from_shape_fn(n, |j| affine_max(upper.coeffs.row(j), upper.offset[j], b));
        AffineBounds {
            lower,
            upper,
            lo,
            hi,
        }
    }

    /// A quantity known exactly, independent of the input.
    pub fn exact(values: Array1<f64>, d0: usize) -> Self {
        let form = AffineForm::constant(values.clone(), d0);
        AffineBounds {
            lower: form.clone(),
            upper: form,
            lo: values.clone(),
            hi: values,
        }
    }

    pub fn rows(&self) -> usize {
        self.lo.len()
    }

    pub fn interval(&self, j: usize) -> Interval {
        Interval {
            lo: self.lo[j],
            hi: self.hi[j],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite()
            && self.upper.is_finite()
            && self.lo.iter().chain(self.hi.iter()).all(|v| v.is_finite())
    }

    /// `acc += c·q_j`, bounded from above.
    pub fn add_upper(&self, j: usize, c: f64, coeffs: &mut ArrayViewMut1<f64>, offset: &mut f64) {
        let form = if c >= 0.0 { &self.upper } else { &self.lower };
        coeffs.scaled_add(c, &form.coeffs.row(j));
        *offset += c * form.offset[j];
    }

    /// `acc += c·q_j`, bounded from below.
    pub fn add_lower(&self, j: usize, c: f64, coeffs: &mut ArrayViewMut1<f64>, offset: &mut f64) {
        let form = if c >= 0.0 { &self.lower } else { &self.upper };
        coeffs.scaled_add(c, &form.coeffs.row(j));
        *offset += c * form.offset[j];
    }
}

/// Bounds on every pre-activation `yᵏ` over one input box.
#[derive(Debug, Clone)]
pub struct LayerBounds {
    pub input: InputBox,
    /// One entry per layer, output layer last.
    pub layers: Vec<AffineBounds>,
}

impl LayerBounds {
    pub fn output(&self) -> &AffineBounds {
        &self.layers[self.layers.len() - 1]
    }

    pub fn layer(&self, k: usize) -> &AffineBounds {
        &self.layers[k]
    }
}

/// Back-substitutes each layer through the tanh relaxations of all earlier
/// layers down to the input, then concretizes over the box.
pub fn crown_propagate(net: &DenseNetwork, b: &InputBox) -> Result<LayerBounds, BoundError> {
    b.check_dim(net.input_dim())?;
    let d0 = net.input_dim();
    let mut layers: Vec<AffineBounds> = Vec::with_capacity(net.num_layers());
    let mut relax: Vec<Vec<LinRelax>> = Vec::with_capacity(net.num_layers());
    for (k, layer) in net.layers().iter().enumerate() {
        let mut lam_u = layer.weight.clone();
        let mut lam_l = layer.weight.clone();
        let mut off_u = layer.bias.clone();
        let mut off_l = layer.bias.clone();
        for m in (0..k).rev() {
            let rel = &relax[m];
            for (lam, off, upper) in [
                (&mut lam_u, &mut off_u, true),
                (&mut lam_l, &mut off_l, false),
            ] {
                for (mut row, o) in lam.rows_mut().into_iter().zip(off.iter_mut()) {
                    for (c, r) in row.iter_mut().zip(rel) {
                        let line = if (*c >= 0.0) == upper {
                            r.upper
                        } else {
                            r.lower
                        };
                        *o += *c * line.intercept;
                        *c *= line.slope;
                    }
                }
                let w = &net.layer(m).weight;
                *off += &lam.dot(&net.layer(m).bias);
                *lam = lam.dot(w);
            }
        }
        let bounds = AffineBounds::from_forms(
            AffineForm {
                coeffs: lam_l,
                offset: off_l,
            },
            AffineForm {
                coeffs: lam_u,
                offset: off_u,
            },
            b,
        );
        if !bounds.is_finite() {
            return Err(BoundError::NonFinite {
                layer: k + 1,
                what: "pre-activation bound".into(),
            });
        }
        debug_assert_eq!(bounds.lower.coeffs.ncols(), d0);
        if k + 1 < net.num_layers() {
            let rel = (0..bounds.rows())
                .map(|j| relax_tanh(bounds.lo[j], bounds.hi[j]))
                .collect::<Result<Vec<_>, _>>()?;
            relax.push(rel);
        }
        layers.push(bounds);
    }
    Ok(LayerBounds {
        input: b.clone(),
        layers,
    })
}

/// `coef_a·a + coef_b·b + constant`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bilinear {
    pub coef_a: f64,
    pub coef_b: f64,
    pub constant: f64,
}

impl Bilinear {
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        self.coef_a * a + self.coef_b * b + self.constant
    }
}

/// Planes with `lower(a, b) ≤ a·b ≤ upper(a, b)` on a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCormick {
    pub upper: Bilinear,
    pub lower: Bilinear,
}

/// Convex combination of the two McCormick over-estimators (weight `eta`
/// on `aᵁb + abᴸ − aᵁbᴸ`) and of the two under-estimators (weight `eta` on
/// `aᴸb + abᴸ − aᴸbᴸ`).
pub fn mccormick(a: Interval, b: Interval, eta: f64) -> Result<McCormick, BoundError> {
    mccormick_split(a, b, eta, eta)
}

/// As [`mccormick`] with separate weights for the upper and lower plane.
pub fn mccormick_split(
    a: Interval,
    b: Interval,
    eta_upper: f64,
    eta_lower: f64,
) -> Result<McCormick, BoundError> {
    for e in [eta_upper, eta_lower] {
        if !(0.0..=1.0).contains(&e) {
            return Err(BoundError::Coefficient(e));
        }
    }
    let (h, z) = (eta_upper, eta_lower);
    let upper = Bilinear {
        coef_a: h * b.lo + (1.0 - h) * b.hi,
        coef_b: h * a.hi + (1.0 - h) * a.lo,
        constant: -h * a.hi * b.lo - (1.0 - h) * a.lo * b.hi,
    };
    let lower = Bilinear {
        coef_a: z * b.lo + (1.0 - z) * b.hi,
        coef_b: z * a.lo + (1.0 - z) * a.hi,
        constant: -z * a.lo * b.lo - (1.0 - z) * a.hi * b.hi,
    };
    Ok(McCormick { upper, lower })
}
