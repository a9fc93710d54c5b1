//! tanh and its derivatives up to fourth order, written in terms of t = tanh(y).

#[inline]
pub fn tanh(y: f64) -> f64 {
    y.tanh()
}

/// sech²(y)
#[inline]
pub fn tanh_d1(y: f64) -> f64 {
    let t = y.tanh();
    1.0 - t * t
}

/// −2 t (1 − t²)
#[inline]
pub fn tanh_d2(y: f64) -> f64 {
    let t = y.tanh();
    -2.0 * t * (1.0 - t * t)
}

/// −2 (1 − t²)(1 − 3t²)
#[inline]
pub fn tanh_d3(y: f64) -> f64 {
    let t2 = y.tanh().powi(2);
    -2.0 * (1.0 - t2) * (1.0 - 3.0 * t2)
}

/// 8 t (2 − 3t²)(1 − t²)
#[inline]
pub fn tanh_d4(y: f64) -> f64 {
    let t = y.tanh();
    let t2 = t * t;
    8.0 * t * (2.0 - 3.0 * t2) * (1.0 - t2)
}

/// Exact range of sech² over [l, u]. The maximum 1 is attained at 0.
pub fn tanh_d1_range(l: f64, u: f64) -> (f64, f64) {
    let (fl, fu) = (tanh_d1(l), tanh_d1(u));
    let hi = if l <= 0.0 && u >= 0.0 {
        1.0
    } else {
        fl.max(fu)
    };
    (fl.min(fu), hi)
}

/// Exact range of σ″ over [l, u]; its extrema sit at ∓atanh(1/√3).
pub fn tanh_d2_range(l: f64, u: f64) -> (f64, f64) {
    let c = (1.0f64 / 3.0).sqrt().atanh();
    let mut lo = tanh_d2(l).min(tanh_d2(u));
    let mut hi = tanh_d2(l).max(tanh_d2(u));
    for p in [-c, c] {
        if l <= p && p <= u {
            let v = tanh_d2(p);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}
