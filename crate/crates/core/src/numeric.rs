//! Error-free transformations used to keep fractional parts accurate when
//! large sequence values are multiplied by a frequency.

/// Fractional part of a real as an unevaluated sum `hi + lo`, with
/// `hi` in `[0, 1)` and `|lo|` tiny.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Frac {
    pub hi: f64,
    pub lo: f64,
}

impl Frac {
    /// Collapse to a single double in `[0, 1)`.
    pub fn value(self) -> f64 {
        wrap_unit(self.hi + self.lo)
    }
}

/// `a + b = s + e` exactly (Knuth).
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// `a * b = p + e` exactly, via fused multiply-add.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Reduce into `[0, 1)`. Guards the case where `x - floor(x)` rounds to 1.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Fractional part of the exact product `alpha * value`.
///
/// The high word of the product is reduced exactly (`p - floor(p)` is exact
/// for |p| < 2^52), the rounding error of the product is carried in `lo`.
#[inline]
pub fn frac_of_product(alpha: f64, value: f64) -> Frac {
    let (p, e) = two_prod(alpha, value);
    let hi = p - p.floor();
    // e may be larger than one ulp of hi but is far below 1
    let (h, l) = two_sum(hi, e);
    let fl = h.floor();
    Frac { hi: h - fl, lo: l }
}

/// Sum of fractional parts, reduced mod 1.
#[inline]
pub fn frac_sum(parts: &[Frac]) -> f64 {
    let mut hi = 0.0;
    let mut lo = 0.0;
    for p in parts {
        let (s, e) = two_sum(hi, p.hi);
        hi = s;
        lo += e + p.lo;
    }
    wrap_unit(wrap_unit(hi) + lo)
}

/// Distance from `t` to the nearest integer, in `[0, 1/2]`.
#[inline]
pub fn torus_distance(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// Pairwise summation in a fixed order; the result depends only on the
/// slice contents.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
