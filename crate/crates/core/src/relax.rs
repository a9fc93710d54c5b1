//! Linear upper/lower bounds for scalar functions over an interval.
//!
//! Covered: tanh, σ′ = sech², σ″ = −2 tanh·sech², −sin(πx), 2·sech(x) and
//! x²·cos(πx). Each function is split into convex/concave pieces at its
//! inflection points and the lines are chosen per piece combination (chords,
//! midpoint tangents, tangents through an endpoint, and blends of two
//! tangents where the interval spans a hump).
//!
//! After a line is chosen its intercept is checked against the exact
//! extremum of `f − line` on every piece and shifted if needed, so an
//! inexact tangent point can only cost tightness, never soundness.

use std::sync::OnceLock;

use thiserror::Error;

use crate::activation::{tanh, tanh_d1, tanh_d2, tanh_d3, tanh_d4};

/// Stopping tolerance on the tangent residual `τ`.
pub const TANGENT_TOL: f64 = 1e-10;
pub const TANGENT_MAX_ITER: usize = 200;
/// Interval ends closer than this to a region boundary are treated as on it.
pub const SNAP_TOL: f64 = 1e-12;
pub const DEFAULT_BLEND: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelaxError {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("interval [{lo}, {hi}] leaves the supported domain [{min}, {max}]")]
    OutOfDomain {
        lo: f64,
        hi: f64,
        min: f64,
        max: f64,
    },
    #[error("tangent residual has no sign change on [{lo}, {hi}] for p = {p}")]
    NoSignChange { p: f64, lo: f64, hi: f64 },
    #[error("tangent search did not converge for p = {p}")]
    NoConvergence { p: f64 },
    #[error("blend coefficient {0} outside [0, 1]")]
    Blend(f64),
}

/// `y ↦ slope·y + intercept`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Line { slope, intercept }
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        self.slope * y + self.intercept
    }

    fn through(y: f64, fy: f64, slope: f64) -> Self {
        Line::new(slope, fy - slope * y)
    }

    fn blend(a: Line, b: Line, w: f64) -> Self {
        Line::new(
            w * a.slope + (1.0 - w) * b.slope,
            w * a.intercept + (1.0 - w) * b.intercept,
        )
    }
}

/// `lower(y) ≤ f(y) ≤ upper(y)` on the interval it was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinRelax {
    pub upper: Line,
    pub lower: Line,
}

impl LinRelax {
    /// Exact tangent at a point, used for degenerate intervals.
    fn tangent(f: &Curve, y: f64) -> Self {
        let t = f.tangent_at(y);
        LinRelax { upper: t, lower: t }
    }
}

/// A scalar function with its derivative and convexity split.
#[derive(Debug, Clone)]
pub struct Curve {
    pub f: fn(f64) -> f64,
    pub df: fn(f64) -> f64,
    /// Sorted inflection points.
    pub breaks: Vec<f64>,
    /// Convexity of the leftmost piece; pieces alternate.
    pub first_convex: bool,
}

impl Curve {
    fn tangent_at(&self, d: f64) -> Line {
        Line::through(d, (self.f)(d), (self.df)(d))
    }

    fn chord(&self, a: f64, b: f64) -> Line {
        if a == b {
            return self.tangent_at(a);
        }
        let (fa, fb) = ((self.f)(a), (self.f)(b));
        Line::through(a, fa, (fb - fa) / (b - a))
    }

    /// Index of the piece containing `v`, pieces being `(-∞, b₀], (b₀, b₁], …`.
    fn region(&self, v: f64) -> usize {
        self.breaks.iter().filter(|&&b| v > b).count()
    }

    fn region_convex(&self, r: usize) -> bool {
        self.first_convex == r.is_multiple_of(2)
    }

    /// Region of each end after snapping ends that overshoot a boundary by less than [`SNAP_TOL`].
    fn regions(&self, l: f64, u: f64) -> (usize, usize) {
        let rl = self.region(l + SNAP_TOL);
        let ru = self.region(u - SNAP_TOL).max(rl);
        (rl, ru)
    }

    fn pieces(&self, l: f64, u: f64) -> Vec<(f64, f64, bool)> {
        let mut out = Vec::new();
        let mut a = l;
        let mut r = self.region(l);
        for &b in self.breaks.iter().filter(|&&b| b >= l && b < u) {
            out.push((a, b, self.region_convex(r)));
            a = b;
            r += 1;
        }
        out.push((a, u, self.region_convex(r)));
        out
    }

    /// `sup (f − line)` over [l, u] if `upper`, else `inf`.
    fn extreme_gap(&self, line: Line, l: f64, u: f64, upper: bool) -> f64 {
        let gap = |y: f64| (self.f)(y) - line.eval(y);
        let pick = |a: f64, b: f64| if upper { a.max(b) } else { a.min(b) };
        let mut best = gap(l);
        for (a, b, _) in self.pieces(l, u) {
            best = pick(best, gap(b));
            // f′ is monotone on a piece, so f − line has at most one stationary point there
            let (ga, gb) = ((self.df)(a) - line.slope, (self.df)(b) - line.slope);
            if ga != 0.0 && gb != 0.0 && ga.signum() != gb.signum() {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let gm = (self.df)(mid) - line.slope;
                    if gm.signum() == ga.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                best = pick(best, gap(lo));
                best = pick(best, gap(hi));
            }
        }
        best
    }

    fn secure(&self, mut rel: LinRelax, l: f64, u: f64) -> LinRelax {
        let over = self.extreme_gap(rel.upper, l, u, true);
        if over > 0.0 {
            rel.upper.intercept += over;
        }
        let under = self.extreme_gap(rel.lower, l, u, false);
        if under < 0.0 {
            rel.lower.intercept += under;
        }
        rel
    }

    /// Tangent at some `d ∈ [lo, hi]` whose line passes through `(p, f(p))`.
    /// Falls back to the chord from `p` to the end of the bracket farther from `p`.
    fn tangent_from(&self, p: f64, lo: f64, hi: f64) -> Line {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        match tangent_point(self.f, self.df, p, lo, hi) {
            Ok(d) => self.tangent_at(d),
            Err(_) => {
                let far = if (p - lo).abs() > (p - hi).abs() {
                    lo
                } else {
                    hi
                };
                self.chord(p, far)
            }
        }
    }

    fn convex_case(&self, l: f64, u: f64) -> LinRelax {
        LinRelax {
            upper: self.chord(l, u),
            lower: self.tangent_at(0.5 * (l + u)),
        }
    }

    fn concave_case(&self, l: f64, u: f64) -> LinRelax {
        LinRelax {
            upper: self.tangent_at(0.5 * (l + u)),
            lower: self.chord(l, u),
        }
    }

    /// `l` convex side, `u` concave side of inflection `c`.
    fn convex_concave(&self, l: f64, c: f64, u: f64) -> LinRelax {
        LinRelax {
            upper: self.tangent_from(l, c, u),
            lower: self.tangent_from(u, l, c),
        }
    }

    fn concave_convex(&self, l: f64, c: f64, u: f64) -> LinRelax {
        LinRelax {
            upper: self.tangent_from(u, l, c),
            lower: self.tangent_from(l, c, u),
        }
    }

    /// Rules for a function whose pieces never span more than one inflection.
    fn adjacent(&self, l: f64, u: f64, rl: usize, ru: usize) -> LinRelax {
        if rl == ru {
            if self.region_convex(rl) {
                self.convex_case(l, u)
            } else {
                self.concave_case(l, u)
            }
        } else {
            debug_assert_eq!(ru, rl + 1);
            let c = self.breaks[rl];
            if self.region_convex(rl) {
                self.convex_concave(l, c, u)
            } else {
                self.concave_convex(l, c, u)
            }
        }
    }
}

/// Finds `d ∈ [d_lo, d_hi]` with `|τ(f, p, d)| ≤ 1e-10`, where
/// `τ(f, p, d) = (f(p) − f(d))/(p − d) − f′(d)` vanishes when the tangent
/// at `d` passes through `(p, f(p))`. Bisection on a sign-changing bracket.
pub fn tangent_point(
    f: fn(f64) -> f64,
    df: fn(f64) -> f64,
    p: f64,
    d_lo: f64,
    d_hi: f64,
) -> Result<f64, RelaxError> {
    let tau = |d: f64| {
        if p == d {
            0.0
        } else {
            (f(p) - f(d)) / (p - d) - df(d)
        }
    };
    // also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(d_lo <= d_hi) {
        return Err(RelaxError::InvalidInterval { lo: d_lo, hi: d_hi });
    }
    let (t_lo, t_hi) = (tau(d_lo), tau(d_hi));
    if t_lo.abs() <= TANGENT_TOL {
        return Ok(d_lo);
    }
    if t_hi.abs() <= TANGENT_TOL {
        return Ok(d_hi);
    }
    if t_lo.signum() == t_hi.signum() || !t_lo.is_finite() || !t_hi.is_finite() {
        return Err(RelaxError::NoSignChange {
            p,
            lo: d_lo,
            hi: d_hi,
        });
    }
    let (mut lo, mut hi) = (d_lo, d_hi);
    for _ in 0..TANGENT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let t = tau(mid);
        if t.abs() <= TANGENT_TOL {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if t.signum() == t_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(RelaxError::NoConvergence { p })
}

/// Inflection and extremum abscissas, found once by bisection on the
/// analytic derivative expressions.
#[derive(Debug, Clone)]
pub struct InflectionTable {
    /// Inflections of σ′ (extrema of σ″): `[y₁, y₂]`, `y₂ = −y₁`.
    pub tanh_prime: [f64; 2],
    /// Inflections of σ″: `[y₁, 0, y₃]`, `y₃ = −y₁`.
    pub tanh_second: [f64; 3],
    /// Maximiser of σ″ on y ≤ 0 and minimiser on y ≥ 0.
    pub tanh_second_max: f64,
    pub tanh_second_min: f64,
    /// Inflections of 2·sech: `[x₁, x₂]`, `x₂ = −x₁`.
    pub two_sech: [f64; 2],
    /// Inflections of x²·cos(πx) inside [−1, 1].
    pub x2_cos_pi: Vec<f64>,
}

/// Root of `g` in `[lo, hi]` where `g` changes sign; runs to full precision.
pub fn bisect_root(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let s_lo = g(lo).signum();
    assert_ne!(
        s_lo,
        g(hi).signum(),
        "bracket [{lo}, {hi}] has no sign change"
    );
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

pub fn inflections() -> &'static InflectionTable {
    static TABLE: OnceLock<InflectionTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let p1 = bisect_root(tanh_d3, -3.0, -0.01);
        let s1 = bisect_root(tanh_d4, -3.0, -0.01);
        let x1 = bisect_root(two_sech_d2, -3.0, -0.01);
        let mut pos = Vec::new();
        let n = 2000;
        for k in 0..n {
            let (a, b) = (k as f64 / n as f64, (k + 1) as f64 / n as f64);
            if x2_cos_pi_d2(a).signum() != x2_cos_pi_d2(b).signum() {
                pos.push(bisect_root(x2_cos_pi_d2, a, b));
            }
        }
        let mut x2c: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
        x2c.extend(pos);
        InflectionTable {
            tanh_prime: [p1, -p1],
            tanh_second: [s1, 0.0, -s1],
            tanh_second_max: p1,
            tanh_second_min: -p1,
            two_sech: [x1, -x1],
            x2_cos_pi: x2c,
        }
    })
}

pub fn neg_sin_pi(x: f64) -> f64 {
    -(std::f64::consts::PI * x).sin()
}

pub fn neg_sin_pi_d1(x: f64) -> f64 {
    -std::f64::consts::PI * (std::f64::consts::PI * x).cos()
}

pub fn two_sech(x: f64) -> f64 {
    2.0 / x.cosh()
}

pub fn two_sech_d1(x: f64) -> f64 {
    -2.0 * x.tanh() / x.cosh()
}

fn two_sech_d2(x: f64) -> f64 {
    let t = x.tanh();
    2.0 / x.cosh() * (2.0 * t * t - 1.0)
}

pub fn x2_cos_pi(x: f64) -> f64 {
    x * x * (std::f64::consts::PI * x).cos()
}

pub fn x2_cos_pi_d1(x: f64) -> f64 {
    use std::f64::consts::PI;
    2.0 * x * (PI * x).cos() - PI * x * x * (PI * x).sin()
}

fn x2_cos_pi_d2(x: f64) -> f64 {
    use std::f64::consts::PI;
    (2.0 - PI * PI * x * x) * (PI * x).cos() - 4.0 * PI * x * (PI * x).sin()
}

pub fn tanh_curve() -> Curve {
    Curve {
        f: tanh,
        df: tanh_d1,
        breaks: vec![0.0],
        first_convex: true,
    }
}

pub fn tanh_prime_curve() -> Curve {
    Curve {
        f: tanh_d1,
        df: tanh_d2,
        breaks: inflections().tanh_prime.to_vec(),
        first_convex: true,
    }
}

pub fn tanh_second_curve() -> Curve {
    Curve {
        f: tanh_d2,
        df: tanh_d3,
        breaks: inflections().tanh_second.to_vec(),
        first_convex: true,
    }
}

/// Concave on [−1, 0], convex on [0, 1].
pub fn neg_sin_pi_curve() -> Curve {
    Curve {
        f: neg_sin_pi,
        df: neg_sin_pi_d1,
        breaks: vec![0.0],
        first_convex: false,
    }
}

pub fn two_sech_curve() -> Curve {
    Curve {
        f: two_sech,
        df: two_sech_d1,
        breaks: inflections().two_sech.to_vec(),
        first_convex: true,
    }
}

pub fn x2_cos_pi_curve() -> Curve {
    Curve {
        f: x2_cos_pi,
        df: x2_cos_pi_d1,
        breaks: inflections().x2_cos_pi.clone(),
        first_convex: true,
    }
}

fn check(l: f64, u: f64) -> Result<(), RelaxError> {
    if !(l.is_finite() && u.is_finite() && l <= u) {
        return Err(RelaxError::InvalidInterval { lo: l, hi: u });
    }
    Ok(())
}

fn check_blend(blend: f64) -> Result<(), RelaxError> {
    if !(0.0..=1.0).contains(&blend) {
        return Err(RelaxError::Blend(blend));
    }
    Ok(())
}

fn check_unit_domain(l: f64, u: f64) -> Result<(), RelaxError> {
    if l < -1.0 || u > 1.0 {
        return Err(RelaxError::OutOfDomain {
            lo: l,
            hi: u,
            min: -1.0,
            max: 1.0,
        });
    }
    Ok(())
}

fn relax_adjacent(curve: &Curve, l: f64, u: f64) -> LinRelax {
    if l == u {
        return LinRelax::tangent(curve, l);
    }
    let (rl, ru) = curve.regions(l, u);
    curve.secure(curve.adjacent(l, u, rl, ru), l, u)
}

/// tanh: convex below 0, concave above.
pub fn relax_tanh(l: f64, u: f64) -> Result<LinRelax, RelaxError> {
    check(l, u)?;
    Ok(relax_adjacent(&tanh_curve(), l, u))
}

pub fn relax_neg_sin_pi(l: f64, u: f64) -> Result<LinRelax, RelaxError> {
    check(l, u)?;
    check_unit_domain(l, u)?;
    Ok(relax_adjacent(&neg_sin_pi_curve(), l, u))
}

/// Bell-shaped function with a maximum at 0 and inflections `c₁ < 0 < c₂`
/// (σ′ and 2·sech).
fn relax_bell(curve: &Curve, l: f64, u: f64, blend: f64) -> LinRelax {
    if l == u {
        return LinRelax::tangent(curve, l);
    }
    let (rl, ru) = curve.regions(l, u);
    if ru - rl <= 1 {
        return curve.secure(curve.adjacent(l, u, rl, ru), l, u);
    }
    let (c1, c2) = (curve.breaks[0], curve.breaks[1]);
    let left = curve.tangent_from(l, c1, 0.0);
    let right = curve.tangent_from(u, 0.0, c2);
    let lower = if -l >= u {
        curve.tangent_from(u, l, c1)
    } else {
        curve.tangent_from(l, c2, u)
    };
    let rel = LinRelax {
        upper: Line::blend(left, right, blend),
        lower,
    };
    curve.secure(rel, l, u)
}

pub fn relax_tanh_prime(l: f64, u: f64) -> Result<LinRelax, RelaxError> {
    relax_tanh_prime_blend(l, u, DEFAULT_BLEND)
}

/// `blend` weights the tangent through `l` in the spanning case.
pub fn relax_tanh_prime_blend(l: f64, u: f64, blend: f64) -> Result<LinRelax, RelaxError> {
    check(l, u)?;
    check_blend(blend)?;
    Ok(relax_bell(&tanh_prime_curve(), l, u, blend))
}

pub fn relax_two_sech(l: f64, u: f64) -> Result<LinRelax, RelaxError> {
    relax_two_sech_blend(l, u, DEFAULT_BLEND)
}

pub fn relax_two_sech_blend(l: f64, u: f64, blend: f64) -> Result<LinRelax, RelaxError> {
    check(l, u)?;
    check_blend(blend)?;
    Ok(relax_bell(&two_sech_curve(), l, u, blend))
}

pub fn relax_tanh_second(l: f64, u: f64) -> Result<LinRelax, RelaxError> {
    relax_tanh_second_blend(l, u, DEFAULT_BLEND)
}

/// Regions: R₁ convex up to y₁, R₂ concave up to 0, R₃ convex up to y₃, R₄ concave.
pub fn relax_tanh_second_blend(l: f64, u: f64, blend: f64) -> Result<LinRelax, RelaxError> {
    check(l, u)?;
    check_blend(blend)?;
    let curve = tanh_second_curve();
    if l == u {
        return Ok(LinRelax::tangent(&curve, l));
    }
    let (rl, ru) = curve.regions(l, u);
    if ru - rl <= 1 {
        return Ok(curve.secure(curve.adjacent(l, u, rl, ru), l, u));
    }
    let table = inflections();
    let [y1, _, y3] = table.tanh_second;
    let (ymax, ymin) = (table.tanh_second_max, table.tanh_second_min);
    // spans the positive hump of σ″ (left of 0)
    let hump_upper = || {
        Line::blend(
            curve.tangent_from(l, y1, ymax),
            curve.tangent_from(u, ymax, 0.0),
            blend,
        )
    };
    // spans the negative dip of σ″ (right of 0)
    let dip_lower = || {
        Line::blend(
            curve.tangent_from(l, 0.0, ymin),
            curve.tangent_from(u, ymin, y3),
            blend,
        )
    };
    let rel = match (rl, ru) {
        (0, 2) => LinRelax {
            upper: hump_upper(),
            lower: curve.tangent_from(l, 0.0, u),
        },
        (1, 3) => LinRelax {
            upper: curve.tangent_from(u, l, 0.0),
            lower: dip_lower(),
        },
        (0, 3) => LinRelax {
            upper: hump_upper(),
            lower: dip_lower(),
        },
        _ => unreachable!("region pair ({rl}, {ru}) handled above"),
    };
    Ok(curve.secure(rel, l, u))
}

/// Pieces spanning an inflection get the chord slope for both lines, with
/// offsets set to the exact extremes of `f − chord`.
pub fn relax_x2_cos_pi(l: f64, u: f64) -> Result<LinRelax, RelaxError> {
    check(l, u)?;
    check_unit_domain(l, u)?;
    let curve = x2_cos_pi_curve();
    if l == u {
        return Ok(LinRelax::tangent(&curve, l));
    }
    let (rl, ru) = curve.regions(l, u);
    if rl == ru {
        return Ok(curve.secure(curve.adjacent(l, u, rl, ru), l, u));
    }
    let chord = curve.chord(l, u);
    Ok(curve.secure(
        LinRelax {
            upper: chord,
            lower: chord,
        },
        l,
        u,
    ))
}
