//! Linear and concrete bounds on `∂ᵢu` and `∂ᵢ²u` over an input box.
//!
//! With `cₕ = ∂ᵢzₕ` (`c₀ = eᵢ`) and `Dₕ = diag σ′(yₕ) Wₕ`, each hidden layer
//! satisfies `cₕ₊₁ = Dₕ cₕ`. Every product `Dₕ[j,n]·cₕ[n]` is replaced by
//! McCormick planes: the factor `Dₕ[j,n]` is substituted by its affine
//! bounds in `x`, while the `cₕ[n]` coefficient is carried to the next layer
//! down. Composing these layer relaxations from the output back to `c₀`
//! gives affine bounds in `x`, which are then concretized over the box.
//!
//! Second derivatives `sₕ = ∂ᵢ²zₕ` (`s₀ = 0`) follow
//! `sₕ₊₁[j] = Σₙ Pₕ[j,n] cₕ[n] + Dₕ[j,n] sₕ[n]` with
//! `Pₕ[j,n] = σ″(yₕ[j]) (Wₕ[j,:]·cₕ) Wₕ[j,n]`; here the `cₕ` factor is
//! substituted by its first-derivative bounds and the `sₕ` coefficient is
//! carried down.

use ndarray::{Array1, Array2};

use crate::activation::{tanh_d1_range, tanh_d2_range};
use crate::linear::{
    mccormick_split, AffineBounds, AffineForm, BoundError, InputBox, Interval, LayerBounds,
};
use crate::network::DenseNetwork;
use crate::relax::{relax_tanh_prime_blend, relax_tanh_second_blend, LinRelax, DEFAULT_BLEND};

/// Convex weights used by the relaxations. All default to 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConfig {
    /// Upper/lower McCormick weights for `Jacobian × first derivative` products.
    pub product_upper: f64,
    pub product_lower: f64,
    /// Upper/lower weights for `Jacobian × second derivative` products.
    pub second_upper: f64,
    pub second_lower: f64,
    /// Upper/lower weights for `σ″ × (W·∂z)`.
    pub curvature_upper: f64,
    pub curvature_lower: f64,
    /// Weight of the left tangent where a relaxation blends two tangents.
    pub blend: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig::uniform(0.5)
    }
}

impl BoundConfig {
    pub fn uniform(eta: f64) -> Self {
        BoundConfig {
            product_upper: eta,
            product_lower: eta,
            second_upper: eta,
            second_lower: eta,
            curvature_upper: eta,
            curvature_lower: eta,
            blend: DEFAULT_BLEND,
        }
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        for v in [
            self.product_upper,
            self.product_lower,
            self.second_upper,
            self.second_lower,
            self.curvature_upper,
            self.curvature_lower,
            self.blend,
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(BoundError::Coefficient(v));
            }
        }
        Ok(())
    }
}

/// `q[j] ≤ Σₙ coef[j,n]·p[n] + affine[j]·x + constant[j]` (or `≥` for the lower side).
#[derive(Debug, Clone)]
struct RelaxRows {
    coef: Array2<f64>,
    affine: Array2<f64>,
    constant: Array1<f64>,
}

impl RelaxRows {
    fn zeros(out: usize, inp: usize, d0: usize) -> Self {
        RelaxRows {
            coef: Array2::zeros((out, inp)),
            affine: Array2::zeros((out, d0)),
            constant: Array1::zeros(out),
        }
    }
}

/// Linear relaxation of one layer's derivative map.
#[derive(Debug, Clone)]
struct LayerRelax {
    upper: RelaxRows,
    lower: RelaxRows,
}

/// Affine bounds on the entries of `Dₕ = diag σ′(yₕ) Wₕ` for every hidden
/// layer, flattened row-major (`j·inₕ + n`).
#[derive(Debug, Clone)]
pub struct JacobianBounds {
    pub layers: Vec<AffineBounds>,
}

impl JacobianBounds {
    pub fn new(
        net: &DenseNetwork,
        lb: &LayerBounds,
        cfg: &BoundConfig,
    ) -> Result<Self, BoundError> {
        cfg.validate()?;
        let layers = (0..net.num_layers() - 1)
            .map(|h| bound_sigma_prime_rows(net, lb, h, cfg))
            .collect::<Result<_, _>>()?;
        Ok(JacobianBounds { layers })
    }
}

/// Affine bounds in `x` of `f(yₕ[j])` from a linear relaxation of `f` and the
/// CROWN bounds of `yₕ[j]`.
fn substitute_relaxation(y: &AffineBounds, rel: &[LinRelax], b: &InputBox) -> AffineBounds {
    let (n, d0) = (y.rows(), b.dim());
    let mut lower = AffineForm::zeros(n, d0);
    let mut upper = AffineForm::zeros(n, d0);
    for (j, r) in rel.iter().enumerate().take(n) {
        let (mut ur, mut lr) = (upper.coeffs.row_mut(j), lower.coeffs.row_mut(j));
        let (mut uo, mut lo) = (r.upper.intercept, r.lower.intercept);
        y.add_upper(j, r.upper.slope, &mut ur, &mut uo);
        y.add_lower(j, r.lower.slope, &mut lr, &mut lo);
        upper.offset[j] = uo;
        lower.offset[j] = lo;
    }
    AffineBounds::from_forms(lower, upper, b)
}

fn tighten(bounds: &mut AffineBounds, j: usize, iv: Interval) {
    let t = bounds.interval(j).intersect(&iv);
    bounds.lo[j] = t.lo;
    bounds.hi[j] = t.hi;
}

fn check_finite(bounds: &AffineBounds, layer: usize, what: &str) -> Result<(), BoundError> {
    for j in 0..bounds.rows() {
        let ok = bounds.lower.coeffs.row(j).iter().all(|v| v.is_finite())
            && bounds.upper.coeffs.row(j).iter().all(|v| v.is_finite())
            && [
                bounds.lower.offset[j],
                bounds.upper.offset[j],
                bounds.lo[j],
                bounds.hi[j],
            ]
            .iter()
            .all(|v| v.is_finite());
        if !ok {
            return Err(BoundError::NonFinite {
                layer,
                what: format!("{what} (row {j})"),
            });
        }
    }
    Ok(())
}

/// Affine bounds on `σ′(yₕ[j])·Wₕ[j,n]` for hidden layer `h` (0-based).
pub fn bound_sigma_prime_rows(
    net: &DenseNetwork,
    lb: &LayerBounds,
    h: usize,
    cfg: &BoundConfig,
) -> Result<AffineBounds, BoundError> {
    if h + 1 >= net.num_layers() || h >= lb.layers.len() {
        return Err(BoundError::Dimension {
            expected: net.num_layers() - 1,
            found: h,
        });
    }
    let y = &lb.layers[h];
    let w = &net.layer(h).weight;
    let (out, inp, d0) = (w.nrows(), w.ncols(), lb.input.dim());
    let rel = (0..out)
        .map(|j| relax_tanh_prime_blend(y.lo[j], y.hi[j], cfg.blend))
        .collect::<Result<Vec<_>, _>>()?;
    let s = substitute_relaxation(y, &rel, &lb.input);
    let mut lower = AffineForm::zeros(out * inp, d0);
    let mut upper = AffineForm::zeros(out * inp, d0);
    let mut range = Vec::with_capacity(out);
    for j in 0..out {
        let (gl, gu) = tanh_d1_range(y.lo[j], y.hi[j]);
        range.push(s.interval(j).intersect(&Interval { lo: gl, hi: gu }));
        for n in 0..inp {
            let r = j * inp + n;
            let c = w[[j, n]];
            let (mut ur, mut lr) = (upper.coeffs.row_mut(r), lower.coeffs.row_mut(r));
            let (mut uo, mut lo) = (0.0, 0.0);
            s.add_upper(j, c, &mut ur, &mut uo);
            s.add_lower(j, c, &mut lr, &mut lo);
            upper.offset[r] = uo;
            lower.offset[r] = lo;
        }
    }
    let mut d = AffineBounds::from_forms(lower, upper, &lb.input);
    for j in 0..out {
        for n in 0..inp {
            tighten(&mut d, j * inp + n, range[j].scale(w[[j, n]]));
        }
    }
    check_finite(&d, h + 1, "Jacobian bound")?;
    Ok(d)
}

/// Composes `start·p_m` down through `relax[m-1], …, relax[0]` and finally
/// substitutes the bounds of `p₀`.
fn compose(
    relax: &[LayerRelax],
    start: &Array2<f64>,
    m: usize,
    base: &AffineBounds,
    b: &InputBox,
) -> AffineBounds {
    let (rows, d0) = (start.nrows(), b.dim());
    let mut sides = Vec::with_capacity(2);
    for upper in [true, false] {
        let mut lam = start.clone();
        let mut aff = Array2::<f64>::zeros((rows, d0));
        let mut cst = Array1::<f64>::zeros(rows);
        for layer in relax[..m].iter().rev() {
            let pos = lam.mapv(|v| v.max(0.0));
            let neg = lam.mapv(|v| v.min(0.0));
            let (p, q) = if upper {
                (&layer.upper, &layer.lower)
            } else {
                (&layer.lower, &layer.upper)
            };
            aff = aff + pos.dot(&p.affine) + neg.dot(&q.affine);
            cst = cst + pos.dot(&p.constant) + neg.dot(&q.constant);
            lam = pos.dot(&p.coef) + neg.dot(&q.coef);
        }
        let pos = lam.mapv(|v| v.max(0.0));
        let neg = lam.mapv(|v| v.min(0.0));
        let (p, q) = if upper {
            (&base.upper, &base.lower)
        } else {
            (&base.lower, &base.upper)
        };
        aff = aff + pos.dot(&p.coeffs) + neg.dot(&q.coeffs);
        cst = cst + pos.dot(&p.offset) + neg.dot(&q.offset);
        sides.push(AffineForm {
            coeffs: aff,
            offset: cst,
        });
    }
    let lower = sides.pop().expect("two sides");
    let upper = sides.pop().expect("two sides");
    AffineBounds::from_forms(lower, upper, b)
}

/// Interval enclosure of `Σₙ a[j,n]·p[n]` given entrywise intervals.
fn interval_matvec(
    a: impl Fn(usize, usize) -> Interval,
    p: &AffineBounds,
    out: usize,
) -> Vec<Interval> {
    (0..out)
        .map(|j| {
            (0..p.rows()).fold(Interval::point(0.0), |acc, n| {
                acc.add(&a(j, n).mul(&p.interval(n)))
            })
        })
        .collect()
}

/// Bounds on `∂ᵢu` and the intermediate `∂ᵢzₕ`.
#[derive(Debug, Clone)]
pub struct FirstDerivBounds {
    pub coord: usize,
    /// `∂ᵢzₕ` for `h = 0 … L−1`; entry 0 is the exact unit vector.
    pub inner: Vec<AffineBounds>,
    pub output: AffineBounds,
}

impl FirstDerivBounds {
    pub fn interval(&self, j: usize) -> Interval {
        self.output.interval(j)
    }
}

pub fn bound_first(
    net: &DenseNetwork,
    lb: &LayerBounds,
    i: usize,
    cfg: &BoundConfig,
) -> Result<FirstDerivBounds, BoundError> {
    let jac = JacobianBounds::new(net, lb, cfg)?;
    bound_first_with(net, lb, &jac, i, cfg)
}

/// As [`bound_first`] with precomputed Jacobian bounds, shared across coordinates.
pub fn bound_first_with(
    net: &DenseNetwork,
    lb: &LayerBounds,
    jac: &JacobianBounds,
    i: usize,
    cfg: &BoundConfig,
) -> Result<FirstDerivBounds, BoundError> {
    cfg.validate()?;
    net.check_coordinate(i)?;
    let b = &lb.input;
    let d0 = b.dim();
    let mut unit = Array1::zeros(d0);
    unit[i] = 1.0;
    let mut inner = vec![AffineBounds::exact(unit, d0)];
    let mut relax: Vec<LayerRelax> = Vec::with_capacity(net.num_layers() - 1);
    for h in 0..net.num_layers() - 1 {
        let d = &jac.layers[h];
        let c = &inner[h];
        let (out, inp) = (net.layer(h).out_dim(), net.layer(h).in_dim());
        let mut up = RelaxRows::zeros(out, inp, d0);
        let mut lo = RelaxRows::zeros(out, inp, d0);
        for j in 0..out {
            for n in 0..inp {
                let r = j * inp + n;
                let mc = mccormick_split(
                    d.interval(r),
                    c.interval(n),
                    cfg.product_upper,
                    cfg.product_lower,
                )?;
                up.coef[[j, n]] = mc.upper.coef_b;
                up.constant[j] += mc.upper.constant;
                d.add_upper(
                    r,
                    mc.upper.coef_a,
                    &mut up.affine.row_mut(j),
                    &mut up.constant[j],
                );
                lo.coef[[j, n]] = mc.lower.coef_b;
                lo.constant[j] += mc.lower.constant;
                d.add_lower(
                    r,
                    mc.lower.coef_a,
                    &mut lo.affine.row_mut(j),
                    &mut lo.constant[j],
                );
            }
        }
        relax.push(LayerRelax {
            upper: up,
            lower: lo,
        });
        let mut next = compose(&relax, &Array2::eye(out), h + 1, &inner[0], b);
        let direct = interval_matvec(|j, n| d.interval(j * inp + n), &inner[h], out);
        for (j, iv) in direct.into_iter().enumerate() {
            tighten(&mut next, j, iv);
        }
        check_finite(&next, h + 1, "first-derivative bound")?;
        inner.push(next);
    }
    let last = net.layer(net.num_layers() - 1);
    let mut output = compose(&relax, &last.weight, relax.len(), &inner[0], b);
    let direct = interval_matvec(
        |j, n| Interval::point(last.weight[[j, n]]),
        &inner[relax.len()],
        last.out_dim(),
    );
    for (j, iv) in direct.into_iter().enumerate() {
        tighten(&mut output, j, iv);
    }
    check_finite(&output, net.num_layers(), "first-derivative bound")?;
    Ok(FirstDerivBounds {
        coord: i,
        inner,
        output,
    })
}

/// Bounds on `∂ᵢ²u` and the intermediate `∂ᵢ²zₕ`.
#[derive(Debug, Clone)]
pub struct SecondDerivBounds {
    pub coord: usize,
    /// `∂ᵢ²zₕ` for `h = 0 … L−1`; entry 0 is exactly zero.
    pub inner: Vec<AffineBounds>,
    pub output: AffineBounds,
}

impl SecondDerivBounds {
    pub fn interval(&self, j: usize) -> Interval {
        self.output.interval(j)
    }
}

pub fn bound_second(
    net: &DenseNetwork,
    lb: &LayerBounds,
    first: &FirstDerivBounds,
    cfg: &BoundConfig,
) -> Result<SecondDerivBounds, BoundError> {
    let jac = JacobianBounds::new(net, lb, cfg)?;
    bound_second_with(net, lb, &jac, first, cfg)
}

pub fn bound_second_with(
    net: &DenseNetwork,
    lb: &LayerBounds,
    jac: &JacobianBounds,
    first: &FirstDerivBounds,
    cfg: &BoundConfig,
) -> Result<SecondDerivBounds, BoundError> {
    cfg.validate()?;
    let b = &lb.input;
    let d0 = b.dim();
    let mut inner = vec![AffineBounds::exact(Array1::zeros(d0), d0)];
    let mut relax: Vec<LayerRelax> = Vec::with_capacity(net.num_layers() - 1);
    for h in 0..net.num_layers() - 1 {
        let w = &net.layer(h).weight;
        let (out, inp) = (w.nrows(), w.ncols());
        let y = &lb.layers[h];
        let c = &first.inner[h];
        let d = &jac.layers[h];
        let s = &inner[h];

        // v[j] = W[j,:]·c
        let mut v = {
            let mut lower = AffineForm::zeros(out, d0);
            let mut upper = AffineForm::zeros(out, d0);
            for j in 0..out {
                for n in 0..inp {
                    c.add_upper(
                        n,
                        w[[j, n]],
                        &mut upper.coeffs.row_mut(j),
                        &mut upper.offset[j],
                    );
                    c.add_lower(
                        n,
                        w[[j, n]],
                        &mut lower.coeffs.row_mut(j),
                        &mut lower.offset[j],
                    );
                }
            }
            AffineBounds::from_forms(lower, upper, b)
        };
        let direct = interval_matvec(|j, n| Interval::point(w[[j, n]]), c, out);
        for (j, iv) in direct.into_iter().enumerate() {
            tighten(&mut v, j, iv);
        }

        // g[j] = σ″(y[j])
        let rel = (0..out)
            .map(|j| relax_tanh_second_blend(y.lo[j], y.hi[j], cfg.blend))
            .collect::<Result<Vec<_>, _>>()?;
        let mut g = substitute_relaxation(y, &rel, b);
        for j in 0..out {
            let (lo, hi) = tanh_d2_range(y.lo[j], y.hi[j]);
            tighten(&mut g, j, Interval { lo, hi });
        }

        // q[j] = g[j]·v[j]
        let mut q = {
            let mut lower = AffineForm::zeros(out, d0);
            let mut upper = AffineForm::zeros(out, d0);
            for j in 0..out {
                let mc = mccormick_split(
                    g.interval(j),
                    v.interval(j),
                    cfg.curvature_upper,
                    cfg.curvature_lower,
                )?;
                upper.offset[j] = mc.upper.constant;
                g.add_upper(
                    j,
                    mc.upper.coef_a,
                    &mut upper.coeffs.row_mut(j),
                    &mut upper.offset[j],
                );
                v.add_upper(
                    j,
                    mc.upper.coef_b,
                    &mut upper.coeffs.row_mut(j),
                    &mut upper.offset[j],
                );
                lower.offset[j] = mc.lower.constant;
                g.add_lower(
                    j,
                    mc.lower.coef_a,
                    &mut lower.coeffs.row_mut(j),
                    &mut lower.offset[j],
                );
                v.add_lower(
                    j,
                    mc.lower.coef_b,
                    &mut lower.coeffs.row_mut(j),
                    &mut lower.offset[j],
                );
            }
            AffineBounds::from_forms(lower, upper, b)
        };
        for j in 0..out {
            tighten(&mut q, j, g.interval(j).mul(&v.interval(j)));
        }
        check_finite(&q, h + 1, "curvature product bound")?;

        // P[j,n] = q[j]·W[j,n]; relax P·c (c substituted) and D·s (s carried)
        let mut up = RelaxRows::zeros(out, inp, d0);
        let mut lo = RelaxRows::zeros(out, inp, d0);
        for j in 0..out {
            let qj = q.interval(j);
            for n in 0..inp {
                let wjn = w[[j, n]];
                let p = qj.scale(wjn);
                let mc = mccormick_split(p, c.interval(n), cfg.product_upper, cfg.product_lower)?;
                up.constant[j] += mc.upper.constant;
                q.add_upper(
                    j,
                    mc.upper.coef_a * wjn,
                    &mut up.affine.row_mut(j),
                    &mut up.constant[j],
                );
                c.add_upper(
                    n,
                    mc.upper.coef_b,
                    &mut up.affine.row_mut(j),
                    &mut up.constant[j],
                );
                lo.constant[j] += mc.lower.constant;
                q.add_lower(
                    j,
                    mc.lower.coef_a * wjn,
                    &mut lo.affine.row_mut(j),
                    &mut lo.constant[j],
                );
                c.add_lower(
                    n,
                    mc.lower.coef_b,
                    &mut lo.affine.row_mut(j),
                    &mut lo.constant[j],
                );

                let r = j * inp + n;
                let mc = mccormick_split(
                    d.interval(r),
                    s.interval(n),
                    cfg.second_upper,
                    cfg.second_lower,
                )?;
                up.coef[[j, n]] = mc.upper.coef_b;
                up.constant[j] += mc.upper.constant;
                d.add_upper(
                    r,
                    mc.upper.coef_a,
                    &mut up.affine.row_mut(j),
                    &mut up.constant[j],
                );
                lo.coef[[j, n]] = mc.lower.coef_b;
                lo.constant[j] += mc.lower.constant;
                d.add_lower(
                    r,
                    mc.lower.coef_a,
                    &mut lo.affine.row_mut(j),
                    &mut lo.constant[j],
                );
            }
        }
        relax.push(LayerRelax {
            upper: up,
            lower: lo,
        });
        let mut next = compose(&relax, &Array2::eye(out), h + 1, &inner[0], b);
        for j in 0..out {
            let iv = (0..inp).fold(Interval::point(0.0), |acc, n| {
                let p = q.interval(j).scale(w[[j, n]]).mul(&c.interval(n));
                let ds = d.interval(j * inp + n).mul(&s.interval(n));
                acc.add(&p).add(&ds)
            });
            tighten(&mut next, j, iv);
        }
        check_finite(&next, h + 1, "second-derivative bound")?;
        inner.push(next);
    }
    let last = net.layer(net.num_layers() - 1);
    let mut output = compose(&relax, &last.weight, relax.len(), &inner[0], b);
    let direct = interval_matvec(
        |j, n| Interval::point(last.weight[[j, n]]),
        &inner[relax.len()],
        last.out_dim(),
    );
    for (j, iv) in direct.into_iter().enumerate() {
        tighten(&mut output, j, iv);
    }
    check_finite(&output, net.num_layers(), "second-derivative bound")?;
    Ok(SecondDerivBounds {
        coord: first.coord,
        inner,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::crown_propagate;
    use crate::network::{Activation, DenseLayer};
    use ndarray::{arr1, arr2};

    fn unit_box(d: usize) -> InputBox {
        InputBox::new(vec![-1.0; d], vec![1.0; d]).unwrap()
    }

    #[test]
    fn zero_network_gives_zero() {
        let net = DenseNetwork::new(
            vec![
                DenseLayer::new(Array2::zeros((3, 2)), Array1::zeros(3)),
                DenseLayer::new(Array2::zeros((1, 3)), arr1(&[0.4])),
            ],
            Activation::Tanh,
        )
        .unwrap();
        let cfg = BoundConfig::default();
        let lb = crown_propagate(&net, &unit_box(2)).unwrap();
        let jac = JacobianBounds::new(&net, &lb, &cfg).unwrap();
        assert!(jac.layers[0]
            .lo
            .iter()
            .chain(jac.layers[0].hi.iter())
            .all(|&v| v == 0.0));
        for i in 0..2 {
            let f = bound_first(&net, &lb, i, &cfg).unwrap();
            assert_eq!(f.interval(0), Interval::point(0.0));
            let s = bound_second(&net, &lb, &f, &cfg).unwrap();
            assert_eq!(s.interval(0), Interval::point(0.0));
        }
    }

    #[test]
    fn point_box_collapses_to_exact_values() {
        let net = DenseNetwork::random(&[2, 7, 5, 2], 1.5, 3);
        let x = [0.3, -0.6];
        let cfg = BoundConfig::default();
        let lb = crown_propagate(&net, &InputBox::point(&x).unwrap()).unwrap();
        let jac = JacobianBounds::new(&net, &lb, &cfg).unwrap();
        // D entries are σ′(y)·W
        let y0 = net.layer(0).weight.dot(&arr1(&x)) + &net.layer(0).bias;
        for j in 0..7 {
            for n in 0..2 {
                let exact = crate::activation::tanh_d1(y0[j]) * net.layer(0).weight[[j, n]];
                let iv = jac.layers[0].interval(j * 2 + n);
                assert!((iv.lo - exact).abs() <= 1e-10 && (iv.hi - exact).abs() <= 1e-10);
            }
        }
        for i in 0..2 {
            let f = bound_first(&net, &lb, i, &cfg).unwrap();
            let s = bound_second(&net, &lb, &f, &cfg).unwrap();
            let jet = net.jet(&x, i).unwrap();
            for j in 0..2 {
                let (a, e) = (f.interval(j), jet.first[j]);
                assert!(
                    (a.lo - e).abs() <= 1e-8 * (1.0 + e.abs())
                        && (a.hi - e).abs() <= 1e-8 * (1.0 + e.abs())
                );
                let (a, e) = (s.interval(j), jet.second[j]);
                assert!(
                    (a.lo - e).abs() <= 1e-6 * (1.0 + e.abs())
                        && (a.hi - e).abs() <= 1e-6 * (1.0 + e.abs())
                );
            }
        }
    }

    #[test]
    fn scalar_identity_slope() {
        // u(x) = tanh(x) on [-0.5, 0.5]: derivative in [sech²(0.5), 1]
        let net = DenseNetwork::new(
            vec![
                DenseLayer::new(arr2(&[[1.0]]), arr1(&[0.0])),
                DenseLayer::new(arr2(&[[1.0]]), arr1(&[0.0])),
            ],
            Activation::Tanh,
        )
        .unwrap();
        let b = InputBox::new(vec![-0.5], vec![0.5]).unwrap();
        let cfg = BoundConfig::default();
        let lb = crown_propagate(&net, &b).unwrap();
        let f = bound_first(&net, &lb, 0, &cfg).unwrap();
        let iv = f.interval(0);
        assert!(iv.lo <= crate::activation::tanh_d1(0.5) + 1e-12 && iv.hi >= 1.0 - 1e-12);
        assert!(iv.hi <= 1.0 + 1e-12, "σ′ never exceeds 1: {iv:?}");
        let s = bound_second(&net, &lb, &f, &cfg).unwrap();
        let iv = s.interval(0);
        let m = crate::activation::tanh_d2(-0.5);
        assert!(iv.lo <= -m && iv.hi >= m);
    }

    #[test]
    fn rejects_bad_coordinate_and_coefficients() {
        let net = DenseNetwork::random(&[2, 3, 1], 1.0, 1);
        let lb = crown_propagate(&net, &unit_box(2)).unwrap();
        assert!(bound_first(&net, &lb, 2, &BoundConfig::default()).is_err());
        let cfg = BoundConfig {
            curvature_lower: -0.1,
            ..BoundConfig::default()
        };
        assert!(matches!(
            bound_first(&net, &lb, 0, &cfg),
            Err(BoundError::Coefficient(_))
        ));
    }
}
