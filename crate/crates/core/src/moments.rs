//! Expectation and variance of the pair statistics with respect to the
//! frequency vector alpha, estimated by Monte Carlo over the measure mu or
//! by a deterministic quadrature grid.
//!
//! Selberg-smoothed sums are evaluated through exponential sums: for a
//! polynomial `f = sum c_j e(jx)` and `u_x = alpha . a(x)`,
//!
//! ```text
//! sum_{x != y} f(u_x - u_y) = c_0 (M^2 - M) + sum_{j != 0} c_j (|S_j|^2 - M)
//! S_j = sum_x e(j u_x) = prod_i sum_{n=0}^{N} e(j alpha_i a^i(n))
//! ```
//!
//! with `M = (N+1)^r`, which costs `O(K r N)` per alpha instead of
//! `O(K M^2)`. The direct pair sum is kept as [`selberg_pair_sum_direct`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mu::{mu_density, MuSampler};
use crate::numeric::pairwise_sum;
use crate::par;
use crate::selberg::{build_for_window, eval_trig, SelbergPolynomial, Sign};
use crate::sequences::VectorSequenceSpec;
use crate::statistics::{component_fracs, pair_correlation_for, AlphaVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    ExpectationIndicator,
    ExpectationSelberg,
    Variance,
}

/// Where the alpha values come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum AlphaPlan {
    /// `n_samples` draws `0..n_samples` of the sampler.
    Sampled {
        sampler: MuSampler,
        n_samples: usize,
    },
    /// Tensor grid with mu density weights. Per axis: `nodes` midpoints on
    /// `[-L, L]` (L = `half_width`) and `nodes` midpoints per tail in
    /// `u = L/|x|` on `(0, 1]`, so the whole line is covered. Weights are
    /// renormalized to total mass one.
    Quadrature { half_width: f64, nodes: usize },
}

impl AlphaPlan {
    pub fn sampled(seed: u64, n_samples: usize) -> Self {
        AlphaPlan::Sampled {
            sampler: MuSampler::new(seed),
            n_samples,
        }
    }

    /// The grid used as a deterministic oracle for tiny instances.
    pub fn default_quadrature() -> Self {
        AlphaPlan::Quadrature {
            half_width: 50.0,
            nodes: 100_000,
        }
    }

    fn points(&self, r: usize) -> Result<usize> {
        match self {
            AlphaPlan::Sampled { n_samples, .. } => {
                if *n_samples < 2 {
                    return Err(Error::InvalidSpec("need at least 2 samples".into()));
                }
                Ok(*n_samples)
            }
            AlphaPlan::Quadrature { nodes, .. } => {
                let total = (3 * *nodes as u128).saturating_pow(r as u32);
                if total > 1 << 26 {
                    return Err(Error::CapacityGuard {
                        what: "quadrature nodes",
                        needed: total,
                        cap: 1 << 26,
                    });
                }
                Ok(total as usize)
            }
        }
    }

    /// Alpha vector and (unnormalized) weight of point `k`.
    fn point(&self, k: usize, r: usize) -> (AlphaVector, f64) {
        match self {
            AlphaPlan::Sampled { sampler, .. } => (sampler.alpha_at(k as u64, r), 1.0),
            AlphaPlan::Quadrature { half_width, nodes } => {
                let per_axis = 3 * nodes;
                let mut rest = k;
                let mut coords = Vec::with_capacity(r);
                let mut weight = 1.0;
                for _ in 0..r {
                    let (x, w) = quadrature_node(*half_width, *nodes, rest % per_axis);
                    rest /= per_axis;
                    weight *= w;
                    coords.push(x);
                }
                (AlphaVector::new(coords), weight)
            }
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            AlphaPlan::Sampled { sampler, .. } => Some(sampler.seed),
            AlphaPlan::Quadrature { .. } => None,
        }
    }
}

/// Node `i` of the one-dimensional rule: `0..n` central, `n..2n` right
/// tail, `2n..3n` left tail. Returns the node and its weight.
fn quadrature_node(half_width: f64, n: usize, i: usize) -> (f64, f64) {
    let nf = n as f64;
    if i < n {
        let h = 2.0 * half_width / nf;
        let x = -half_width + (i as f64 + 0.5) * h;
        return (x, mu_density(x) * h);
    }
    // x = L / u, dx = L / u^2 du
    let k = (i - n) % n;
    let u = (k as f64 + 0.5) / nf;
    let x = half_width / u;
    let w = mu_density(x) * half_width / (u * u) / nf;
    if i < 2 * n {
        (x, w)
    } else {
        (-x, w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub kind: MomentKind,
    pub estimate: f64,
    /// Standard error of the mean; zero for quadrature plans.
    pub std_error: f64,
    pub n_samples: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub r: usize,
    pub s: f64,
    pub t: Option<u64>,
    #[serde(rename = "K")]
    pub degree: Option<usize>,
    pub sign: Option<Sign>,
    /// `N^r c_0`, the limiting value of the smoothed expectation.
    pub target: Option<f64>,
    /// `N |estimate - N^r c_0|`: the empirical constant of the O(1/N) gap.
    pub gap_constant: Option<f64>,
    pub seed: Option<u64>,
}

/// Limits on the Selberg-based estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    pub max_degree: usize,
    /// Upper bound on `K r (N+1)` times the number of alpha points.
    pub budget: u128,
    pub sign: Sign,
}

impl Default for MomentConfig {
    fn default() -> Self {
        Self {
            max_degree: 1 << 17,
            budget: 1 << 36,
            sign: Sign::Plus,
        }
    }
}

/// Weighted mean and standard error, reduced in a fixed order. Values are
/// centered on the first one so identical values give an exact mean and a
/// zero spread.
fn weighted_mean(values: &[(f64, f64)], sampled: bool) -> (f64, f64) {
    let pivot = values[0].0;
    let wsum = pairwise_sum(&values.iter().map(|v| v.1).collect::<Vec<_>>());
    let shift = pairwise_sum(
        &values
            .iter()
            .map(|(x, w)| (x - pivot) * w)
            .collect::<Vec<_>>(),
    ) / wsum;
    let mean = pivot + shift;
    if !sampled {
        return (mean, 0.0);
    }
    let n = values.len() as f64;
    let ss = pairwise_sum(
        &values
            .iter()
            .map(|(x, _)| (x - pivot - shift) * (x - pivot - shift))
            .collect::<Vec<_>>(),
    );
    let sd = (ss / (n - 1.0)).sqrt();
    (mean, sd / n.sqrt())
}

fn evaluate_plan<F>(plan: &AlphaPlan, r: usize, f: F) -> Result<(f64, f64, usize)>
where
    F: Fn(&AlphaVector) -> Result<f64> + Sync + Send,
{
    let n = plan.points(r)?;
    let vals: Result<Vec<(f64, f64)>> = par::map_range(n, |k| {
        let (alpha, w) = plan.point(k, r);
        Ok((f(&alpha)?, w))
    })
    .into_iter()
    .collect();
    let vals = vals?;
    let (mean, se) = weighted_mean(&vals, matches!(plan, AlphaPlan::Sampled { .. }));
    Ok((mean, se, n))
}

/// Mean of `R2(s)` over the alpha plan.
pub fn indicator_expectation(
    spec: &VectorSequenceSpec,
    s: f64,
    plan: &AlphaPlan,
) -> Result<MomentReport> {
    spec.validate()?;
    let (estimate, std_error, n_samples) = evaluate_plan(plan, spec.r, |alpha| {
        Ok(pair_correlation_for(spec, alpha, &[s])?.r2_values[0])
    })?;
    Ok(MomentReport {
        kind: MomentKind::ExpectationIndicator,
        estimate,
        std_error,
        n_samples,
        n: spec.n,
        r: spec.r,
        s,
        t: None,
        degree: None,
        sign: None,
        target: Some(2.0 * s),
        gap_constant: None,
        seed: plan.seed(),
    })
}

/// `sum_{n=0}^{N} e(j theta_n)` for `j = 1..=k`.
fn component_exp_sums(thetas: &[f64], k: usize) -> Vec<(f64, f64)> {
    const ANCHOR: usize = 128;
    let mut sums = vec![(0.0, 0.0); k];
    let mut step: Vec<(f64, f64)> = Vec::with_capacity(thetas.len());
    let mut cur: Vec<(f64, f64)> = Vec::with_capacity(thetas.len());
    for &th in thetas {
        let (s, c) = (2.0 * PI * th).sin_cos();
        step.push((c, s));
        cur.push((1.0, 0.0));
    }
    for j in 1..=k {
        let mut acc = (0.0, 0.0);
        if j % ANCHOR == 0 {
            for (z, &th) in cur.iter_mut().zip(thetas) {
                let phase = (j as f64 * th).fract();
                let (s, c) = (2.0 * PI * phase).sin_cos();
                *z = (c, s);
                acc.0 += c;
                acc.1 += s;
            }
        } else {
            for (z, st) in cur.iter_mut().zip(&step) {
                *z = (z.0 * st.0 - z.1 * st.1, z.0 * st.1 + z.1 * st.0);
                acc.0 += z.0;
                acc.1 += z.1;
            }
        }
        sums[j - 1] = acc;
    }
    sums
}

/// `|S_j|^2` for `j = 1..=k`, where `S_j` is the full lattice exponential sum.
fn lattice_power_spectrum(
    spec: &VectorSequenceSpec,
    alpha: &AlphaVector,
    k: usize,
) -> Result<Vec<f64>> {
    let fr = component_fracs(spec, alpha)?;
    let mut power = vec![1.0; k];
    for comp in &fr {
        let thetas: Vec<f64> = comp.iter().map(|f| f.value()).collect();
        let sums = component_exp_sums(&thetas, k);
        for (p, (re, im)) in power.iter_mut().zip(sums) {
            *p *= re * re + im * im;
        }
    }
    Ok(power)
}

/// `(1/N^r) sum_{x != y} f(alpha . (a(x) - a(y)))` via exponential sums.
pub fn selberg_pair_sum(
    spec: &VectorSequenceSpec,
    alpha: &AlphaVector,
    poly: &SelbergPolynomial,
) -> Result<f64> {
    let m = spec.lattice_size() as f64;
    let power = lattice_power_spectrum(spec, alpha, poly.degree)?;
    let oscill: Vec<f64> = power
        .iter()
        .zip(poly.coeffs.iter().skip(1))
        .map(|(p, c)| 2.0 * c.0 * (p - m))
        .collect();
    let total = poly.coeffs[0].0 * (m * m - m) + pairwise_sum(&oscill);
    Ok(total / spec.normalizer())
}

/// Same quantity by evaluating `f` at every ordered pair; O(K M^2).
pub fn selberg_pair_sum_direct(
    spec: &VectorSequenceSpec,
    alpha: &AlphaVector,
    poly: &SelbergPolynomial,
) -> Result<f64> {
    let fr = component_fracs(spec, alpha)?;
    let side = spec.n + 1;
    let m = spec.lattice_size() as usize;
    let point = |mut k: usize| {
        let mut t = 0.0;
        for comp in &fr {
            t += comp[k % side].value();
            k /= side;
        }
        t
    };
    let u: Vec<f64> = (0..m).map(point).collect();
    let mut total = 0.0;
    for (x, ux) in u.iter().enumerate() {
        for (y, uy) in u.iter().enumerate() {
            if x != y {
                total += eval_trig(poly, ux - uy);
            }
        }
    }
    Ok(total / spec.normalizer())
}

/// Degree `t N^r` and window `s / N^r` used by the smoothed estimators.
pub fn moment_polynomial(
    spec: &VectorSequenceSpec,
    s: f64,
    t: u64,
    config: &MomentConfig,
) -> Result<SelbergPolynomial> {
    let norm = spec.normalizer();
    let k = (t as f64 * norm).round();
    if k > config.max_degree as f64 {
        return Err(Error::BudgetExceeded {
            needed: k as u128,
            budget: config.max_degree as u128,
        });
    }
    let mut poly = build_for_window(s / norm, k as usize, config.sign)?;
    poly.t_multiplier = Some(t);
    Ok(poly)
}

fn check_budget(
    spec: &VectorSequenceSpec,
    degree: usize,
    plan: &AlphaPlan,
    config: &MomentConfig,
) -> Result<()> {
    let points = plan.points(spec.r)? as u128;
    let needed = (degree as u128) * (spec.r as u128) * (spec.n as u128 + 1) * points;
    if needed > config.budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: config.budget,
        });
    }
    Ok(())
}

/// Mean over alpha of the smoothed pair sum for an arbitrary polynomial.
pub fn selberg_expectation_with(
    spec: &VectorSequenceSpec,
    poly: &SelbergPolynomial,
    s: f64,
    plan: &AlphaPlan,
    config: &MomentConfig,
) -> Result<MomentReport> {
    spec.validate()?;
    check_budget(spec, poly.degree, plan, config)?;
    let (estimate, std_error, n_samples) =
        evaluate_plan(plan, spec.r, |alpha| selberg_pair_sum(spec, alpha, poly))?;
    let target = spec.normalizer() * poly.mean();
    Ok(MomentReport {
        kind: MomentKind::ExpectationSelberg,
        estimate,
        std_error,
        n_samples,
        n: spec.n,
        r: spec.r,
        s,
        t: poly.t_multiplier,
        degree: Some(poly.degree),
        sign: Some(poly.sign),
        target: Some(target),
        gap_constant: Some(spec.n as f64 * (estimate - target).abs()),
        seed: plan.seed(),
    })
}

/// Smoothed expectation with the degree-`t N^r` Selberg polynomial.
pub fn selberg_expectation(
    spec: &VectorSequenceSpec,
    s: f64,
    t: u64,
    plan: &AlphaPlan,
    config: &MomentConfig,
) -> Result<MomentReport> {
    let poly = moment_polynomial(spec, s, t, config)?;
    selberg_expectation_with(spec, &poly, s, plan, config)
}

/// Mean over alpha of `D(alpha)^2`, `D` the smoothed pair sum of
/// `h = f - c_0`.
pub fn variance_estimate_with(
    spec: &VectorSequenceSpec,
    poly: &SelbergPolynomial,
    s: f64,
    plan: &AlphaPlan,
    config: &MomentConfig,
) -> Result<MomentReport> {
    spec.validate()?;
    check_budget(spec, poly.degree, plan, config)?;
    let h = poly.without_mean();
    let (estimate, std_error, n_samples) = evaluate_plan(plan, spec.r, |alpha| {
        let d = selberg_pair_sum(spec, alpha, &h)?;
        Ok(d * d)
    })?;
    Ok(MomentReport {
        kind: MomentKind::Variance,
        estimate,
        std_error,
        n_samples,
        n: spec.n,
        r: spec.r,
        s,
        t: poly.t_multiplier,
        degree: Some(poly.degree),
        sign: Some(poly.sign),
        target: None,
        gap_constant: None,
        seed: plan.seed(),
    })
}

pub fn variance_estimate(
    spec: &VectorSequenceSpec,
    s: f64,
    t: u64,
    plan: &AlphaPlan,
    config: &MomentConfig,
) -> Result<MomentReport> {
    let poly = moment_polynomial(spec, s, t, config)?;
    variance_estimate_with(spec, &poly, s, plan, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::ComponentSpec;

    fn power2(n: usize) -> VectorSequenceSpec {
        VectorSequenceSpec::new(
            vec![
                ComponentSpec::Power { theta: 1.5 },
                ComponentSpec::Power { theta: 1.3 },
            ],
            n,
        )
    }

    #[test]
    fn factorized_sum_matches_direct_pairs() {
        let spec = power2(4);
        let poly = build_for_window(1.0 / 16.0, 32, Sign::Plus).unwrap();
        for alpha in [vec![0.37, -1.9], vec![3.3, 0.011], vec![-12.5, 7.25]] {
            let a = AlphaVector::new(alpha);
            let fast = selberg_pair_sum(&spec, &a, &poly).unwrap();
            let direct = selberg_pair_sum_direct(&spec, &a, &poly).unwrap();
            assert!(
                (fast - direct).abs() < 1e-9 * direct.abs().max(1.0),
                "{fast} {direct}"
            );
        }
    }

    #[test]
    fn exp_sums_stay_accurate_past_anchors() {
        let thetas = [0.123_456_789, 0.987_654_321, 0.5];
        let sums = component_exp_sums(&thetas, 1000);
        for j in [1usize, 127, 128, 129, 999, 1000] {
            let mut re = 0.0;
            let mut im = 0.0;
            for th in thetas {
                let (s, c) = (2.0 * PI * j as f64 * th).sin_cos();
                re += c;
                im += s;
            }
            assert!((sums[j - 1].0 - re).abs() < 1e-10);
            assert!((sums[j - 1].1 - im).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_polynomial_has_no_spread() {
        let spec = power2(5);
        let poly = build_for_window(0.01, 20, Sign::Plus)
            .unwrap()
            .constant_like(0.3);
        let plan = AlphaPlan::sampled(9, 16);
        let rep =
            selberg_expectation_with(&spec, &poly, 1.0, &plan, &MomentConfig::default()).unwrap();
        let m = 36.0;
        assert!((rep.estimate - (m * (m - 1.0)) / 25.0 * 0.3).abs() < 1e-12);
        assert_eq!(rep.std_error, 0.0);
        let var =
            variance_estimate_with(&spec, &poly, 1.0, &plan, &MomentConfig::default()).unwrap();
        assert_eq!(var.estimate, 0.0);
    }

    #[test]
    fn plus_dominates_minus() {
        let spec = power2(6);
        let plan = AlphaPlan::sampled(3, 20);
        let plus = MomentConfig::default();
        let minus = MomentConfig {
            sign: Sign::Minus,
            ..plus
        };
        let p = selberg_expectation(&spec, 1.0, 2, &plan, &plus).unwrap();
        let m = selberg_expectation(&spec, 1.0, 2, &plan, &minus).unwrap();
        assert!(p.estimate >= m.estimate);
        assert_eq!(p.degree, Some(72));
    }

    #[test]
    fn single_point_lattice() {
        let spec = VectorSequenceSpec::new(vec![ComponentSpec::Power { theta: 2.0 }], 0);
        let rep = indicator_expectation(&spec, 1.0, &AlphaPlan::sampled(1, 4)).unwrap();
        assert_eq!(rep.estimate, 0.0);
    }

    #[test]
    fn guards() {
        let spec = power2(50);
        let plan = AlphaPlan::sampled(1, 10);
        let tight = MomentConfig {
            max_degree: 100,
            ..MomentConfig::default()
        };
        assert!(matches!(
            selberg_expectation(&spec, 1.0, 2, &plan, &tight),
            Err(Error::BudgetExceeded { .. })
        ));
        let poor = MomentConfig {
            budget: 1000,
            ..MomentConfig::default()
        };
        assert!(matches!(
            variance_estimate(&spec, 1.0, 2, &plan, &poor),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(indicator_expectation(&spec, 1.0, &AlphaPlan::sampled(1, 1)).is_err());
    }

    #[test]
    fn deterministic_reports() {
        let spec = power2(8);
        let plan = AlphaPlan::sampled(77, 12);
        let cfg = MomentConfig::default();
        let a = variance_estimate(&spec, 1.0, 2, &plan, &cfg).unwrap();
        let b = variance_estimate(&spec, 1.0, 2, &plan, &cfg).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}
