//! Selberg majorant and minorant trigonometric polynomials for the indicator
//! of the closed torus window `[-w, w]`.
//!
//! The construction is the classical one built from Vaaler's approximation
//! of the sawtooth `psi(x) = x - floor(x) - 1/2`:
//!
//! ```text
//! V_K(x) = sum_{1 <= |k| <= K} -Jhat(k/(K+1)) / (2 pi i k) e(kx)
//! |psi(x) - V_K(x)| <= F_K(x) / (2K + 2)          (F_K the Fejer kernel)
//! chi_[a,b](x) = (b - a) + psi(a - x) - psi(b - x)
//! ```
//!
//! so `(b - a) + V_K(a - x) - V_K(b - x) ± (F_K(a - x) + F_K(b - x)) / (2K + 2)`
//! bounds the indicator from above (+) and below (-). For `[a, b] = [-w, w]`
//! the Fourier coefficients are real and even:
//!
//! ```text
//! c_0 = 2w ± 1/(K+1)
//! c_j = Jhat(j/(K+1)) sin(2 pi j w) / (pi j) ± (1 - |j|/(K+1)) cos(2 pi j w) / (K+1)
//! ```
//!
//! with `Jhat(t) = pi t (1 - t) cot(pi t) + t` on `(0, 1)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Largest degree built by default.
pub const DEFAULT_MAX_DEGREE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A real trigonometric polynomial `sum_{|j| <= K} c_j e(jx)`.
///
/// Only `c_0..=c_K` are stored; `c_{-j}` is the conjugate of `c_j`. The
/// polynomials built here are even, so the imaginary parts are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelbergPolynomial {
    pub sign: Sign,
    #[serde(rename = "K")]
    pub degree: usize,
    pub half_width: f64,
    /// `(re, im)` of `c_0..=c_K`.
    pub coeffs: Vec<(f64, f64)>,
    /// `t` when the degree was chosen as `K = t N^r`.
    pub t_multiplier: Option<u64>,
}

/// `Jhat(t) = pi t (1 - t) cot(pi t) + t` for `t` in `(0, 1)`, `Jhat(0) = 1`.
pub fn vaaler_weight(t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let pt = PI * t;
    pt * (1.0 - t) / pt.tan() + t
}

/// Selberg polynomial of degree `k` for the window `[-s/delta, s/delta]`.
pub fn build_selberg(s: f64, delta: f64, k: usize, sign: Sign) -> Result<SelbergPolynomial> {
    build_for_window(s / delta, k, sign)
}

/// Selberg polynomial of degree `k` for the window `[-w, w]`.
pub fn build_for_window(w: f64, k: usize, sign: Sign) -> Result<SelbergPolynomial> {
    if !(w > 0.0 && w < 0.5) {
        return Err(Error::DegenerateWindow(w));
    }
    if k < 1 {
        return Err(Error::InvalidDegree);
    }
    let kp1 = (k + 1) as f64;
    let eps = sign.factor();
    let mut coeffs = Vec::with_capacity(k + 1);
    coeffs.push((2.0 * w + eps / kp1, 0.0));
    for j in 1..=k {
        let jf = j as f64;
        let t = jf / kp1;
        let (sn, cs) = (2.0 * PI * jf * w).sin_cos();
        let main = vaaler_weight(t) * sn / (PI * jf);
        let fejer = (1.0 - t) * cs / kp1;
        coeffs.push((main + eps * fejer, 0.0));
    }
    Ok(SelbergPolynomial {
        sign,
        degree: k,
        half_width: w,
        coeffs,
        t_multiplier: None,
    })
}

impl SelbergPolynomial {
    /// Coefficient `c_j` for any integer `j`.
    pub fn coeff(&self, j: i64) -> (f64, f64) {
        let a = j.unsigned_abs() as usize;
        if a > self.degree {
            return (0.0, 0.0);
        }
        let (re, im) = self.coeffs[a];
        if j < 0 {
            (re, -im)
        } else {
            (re, im)
        }
    }

    /// `c_0`, the torus integral.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].0
    }

    /// Same polynomial with `c_0` removed.
    pub fn without_mean(&self) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = (0.0, 0.0);
        h
    }

    /// Polynomial with only the constant term `v` (degree kept).
    pub fn constant_like(&self, v: f64) -> Self {
        let mut h = self.clone();
        for c in h.coeffs.iter_mut() {
            *c = (0.0, 0.0);
        }
        h.coeffs[0] = (v, 0.0);
        h
    }

    /// Largest `|c_j| - (min(2w, 1/(pi |j|)) + 1/(K+1))` over `0 < j <= K`;
    /// nonpositive when the coefficient bound holds.
    pub fn coefficient_bound_excess(&self) -> f64 {
        let kp1 = (self.degree + 1) as f64;
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &(re, im))| {
                let bound = (2.0 * self.half_width).min(1.0 / (PI * j as f64)) + 1.0 / kp1;
                re.hypot(im) - bound
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `sum_{|j| <= K} c_j e(jx)`, real part. The imaginary part cancels
/// because `c_{-j}` is the conjugate of `c_j`.
pub fn eval_trig(poly: &SelbergPolynomial, x: f64) -> f64 {
    let mut acc = poly.coeffs[0].0;
    // direct angles rather than a rotation recurrence: |error| stays ~ K eps
    let xr = x - x.floor();
    for (j, &(re, im)) in poly.coeffs.iter().enumerate().skip(1) {
        let phase = (j as f64 * xr).fract();
        let (sn, cs) = (2.0 * PI * phase).sin_cos();
        acc += 2.0 * (re * cs - im * sn);
    }
    acc
}

/// Closed-window indicator of `[-w, w]` on the torus.
pub fn window_indicator(w: f64, x: f64) -> f64 {
    if crate::numeric::torus_distance(x) <= w {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub half_width: f64,
    #[serde(rename = "K")]
    pub degree: usize,
    pub grid_size: usize,
    /// `max(minus - indicator, indicator - plus, 0)` over the probed points.
    pub max_violation: f64,
    pub worst_x: f64,
    /// `c_0` identity errors for plus and minus.
    pub c0_error_plus: f64,
    pub c0_error_minus: f64,
    /// Largest coefficient-bound excess over both polynomials.
    pub coeff_bound_excess: f64,
    pub min_plus: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tolerance on the sandwich violation.
pub const SANDWICH_TOLERANCE: f64 = 1e-12;

/// Evaluate both polynomials on `grid_size` equispaced torus points and
/// next to the window edges, and report how far either side of
/// `minus <= indicator <= plus` fails.
pub fn verify_sandwich(
    minus: &SelbergPolynomial,
    plus: &SelbergPolynomial,
    grid_size: usize,
) -> Result<SandwichReport> {
    if minus.half_width != plus.half_width {
        return Err(Error::MismatchedWindows(minus.half_width, plus.half_width));
    }
    let w = plus.half_width;
    let nudge = 1e-9;
    let mut points: Vec<f64> = (0..grid_size)
        .map(|i| i as f64 / grid_size as f64)
        .collect();
    points.extend([
        w - nudge,
        w + nudge,
        1.0 - w + nudge,
        1.0 - w - nudge,
        w,
        1.0 - w,
    ]);

    let chunk = 4096;
    let n_chunks = points.len().div_ceil(chunk);
    let partial = par::map_range(n_chunks, |c| {
        let lo = c * chunk;
        let hi = (lo + chunk).min(points.len());
        let mut worst = (0.0f64, 0.0f64);
        let mut min_plus = f64::INFINITY;
        for &x in &points[lo..hi] {
            let ind = window_indicator(w, x);
            let p = eval_trig(plus, x);
            let m = eval_trig(minus, x);
            min_plus = min_plus.min(p);
            let v = (m - ind).max(ind - p);
            if v > worst.0 {
                worst = (v, x);
            }
        }
        (worst, min_plus)
    });
    let mut worst = (0.0f64, 0.0f64);
    let mut min_plus = f64::INFINITY;
    for (wv, mp) in partial {
        if wv.0 > worst.0 {
            worst = wv;
        }
        min_plus = min_plus.min(mp);
    }
    let kp1p = (plus.degree + 1) as f64;
    let kp1m = (minus.degree + 1) as f64;
    let c0_error_plus = (plus.mean() - (2.0 * w + 1.0 / kp1p)).abs();
    let c0_error_minus = (minus.mean() - (2.0 * w - 1.0 / kp1m)).abs();
    let coeff_bound_excess = plus
        .coefficient_bound_excess()
        .max(minus.coefficient_bound_excess());
    let pass = worst.0 <= SANDWICH_TOLERANCE && coeff_bound_excess <= 0.0;
    Ok(SandwichReport {
        half_width: w,
        degree: plus.degree,
        grid_size,
        max_violation: worst.0,
        worst_x: worst.1,
        c0_error_plus,
        c0_error_minus,
        coeff_bound_excess,
        min_plus,
        tolerance: SANDWICH_TOLERANCE,
        pass,
    })
}
