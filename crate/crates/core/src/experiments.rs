//! Growth-exponent fits for energy counts, comparisons against the theorem
//! thresholds, and pair-correlation convergence sweeps.

use serde::{Deserialize, Serialize};

use crate::energy::{energy_table, thm1_count, GammaRule, Thm1Config};
use crate::error::{Error, Result};
use crate::mu::MuSampler;
use crate::par;
use crate::sequences::VectorSequenceSpec;
use crate::statistics::{pair_correlation, project_values_capped, PPCReport};

/// Per-grid-point lattice cap for sweeps.
pub const SWEEP_LATTICE_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(log N, log count)`
    pub points: Vec<(f64, f64)>,
}

/// Least-squares line through `(log N, log count)`.
pub fn fit_exponent(table: &[(f64, f64)]) -> Result<SlopeFit> {
    if table.len() < 4 {
        return Err(Error::TooFewPoints(table.len()));
    }
    if let Some(i) = table
        .iter()
        .position(|&(n, c)| c.is_nan() || n.is_nan() || c <= 0.0 || n <= 0.0)
    {
        return Err(Error::NonPositiveCount(i));
    }
    if table.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidSpec(
            "N values must be strictly ascending".into(),
        ));
    }
    let points: Vec<(f64, f64)> = table.iter().map(|&(n, c)| (n.ln(), c.ln())).collect();
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * k {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        exponent,
        intercept,
        r_squared,
        points,
    })
}

/// Energy exponent below which the smoothed variance argument goes
/// through: `(280 - 136/r) / 89`.
pub fn thm2_threshold(r: usize) -> Result<f64> {
    if r < 2 {
        return Err(Error::InvalidR(r));
    }
    Ok((280.0 - 136.0 / r as f64) / 89.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    T1,
    T2,
    T3,
}

impl Theorem {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Theorem::T1),
            2 => Some(Theorem::T2),
            3 => Some(Theorem::T3),
            _ => None,
        }
    }
}

/// How the coefficient range of the joint count grows with N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum JmaxRule {
    Fixed(u64),
    /// `Jmax = N^r`
    LatticeScale,
}

impl JmaxRule {
    pub fn at(&self, n: usize, r: usize) -> u64 {
        match self {
            JmaxRule::Fixed(j) => *j,
            JmaxRule::LatticeScale => (n as u64).pow(r as u32).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisParams {
    pub delta_margin: f64,
    /// Exponents of the bound `N^{2+eta} + gamma N^{3-delta}`.
    pub eta: f64,
    pub delta: f64,
    pub jmax: JmaxRule,
    pub thm1_budget: u128,
}

impl Default for HypothesisParams {
    fn default() -> Self {
        Self {
            delta_margin: 0.05,
            eta: 0.1,
            delta: 0.1,
            jmax: JmaxRule::LatticeScale,
            thm1_budget: 4_000_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisVerdict {
    pub theorem: Theorem,
    pub r: usize,
    /// Fitted exponent per component (T2), of the joint count (T1), or
    /// empty (T3).
    pub fitted: Vec<f64>,
    /// `count / (N^{2+eta} + N^{-1} N^{3-delta})` per component and grid
    /// point (T3 only).
    pub ratios: Vec<Vec<f64>>,
    pub threshold: f64,
    pub delta_margin: f64,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    #[serde(rename = "N_grid")]
    pub n_grid: Vec<f64>,
    /// Raw counts per component (one row for T1).
    pub counts: Vec<Vec<f64>>,
    pub pass: bool,
}

fn t3_ratios(table: &[(f64, f64)], eta: f64, delta: f64) -> Vec<f64> {
    table
        .iter()
        .map(|&(n, c)| c / (n.powf(2.0 + eta) + n.powf(-1.0) * n.powf(3.0 - delta)))
        .collect()
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// T3 acceptance: every ratio at most twice the median ratio.
pub fn ratios_bounded(ratios: &[f64]) -> bool {
    let m = median(ratios);
    ratios.iter().all(|r| *r <= 2.0 * m)
}

fn threshold_for(theorem: Theorem, r: usize) -> Result<f64> {
    match theorem {
        Theorem::T1 => Ok(4.0 * r as f64),
        Theorem::T2 => thm2_threshold(r),
        Theorem::T3 => {
            if r < 2 {
                return Err(Error::InvalidR(r));
            }
            Ok(f64::NAN)
        }
    }
}

/// Verdict from precomputed `(N, count)` tables, one per component (T2,
/// T3) or a single joint table (T1). For T3 the counts must use
/// `gamma = 1/N`.
pub fn verdict_from_tables(
    theorem: Theorem,
    r: usize,
    tables: &[Vec<(f64, f64)>],
    params: &HypothesisParams,
) -> Result<HypothesisVerdict> {
    let threshold = threshold_for(theorem, r)?;
    if tables.is_empty() {
        return Err(Error::InvalidSpec("no count tables given".into()));
    }
    let n_grid: Vec<f64> = tables[0].iter().map(|p| p.0).collect();
    let counts: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| t.iter().map(|p| p.1).collect())
        .collect();
    let (fitted, ratios, pass) = match theorem {
        Theorem::T1 | Theorem::T2 => {
            let fitted: Vec<f64> = tables
                .iter()
                .map(|t| fit_exponent(t).map(|f| f.exponent))
                .collect::<Result<_>>()?;
            let pass = fitted.iter().all(|e| *e <= threshold - params.delta_margin);
            (fitted, Vec::new(), pass)
        }
        Theorem::T3 => {
            if tables.iter().any(|t| t.is_empty()) {
                return Err(Error::TooFewPoints(0));
            }
            let ratios: Vec<Vec<f64>> = tables
                .iter()
                .map(|t| t3_ratios(t, params.eta, params.delta))
                .collect();
            let pass = ratios.iter().all(|r| ratios_bounded(r));
            (Vec::new(), ratios, pass)
        }
    };
    let is_t3 = theorem == Theorem::T3;
    Ok(HypothesisVerdict {
        theorem,
        r,
        fitted,
        ratios,
        threshold,
        delta_margin: params.delta_margin,
        eta: is_t3.then_some(params.eta),
        delta: is_t3.then_some(params.delta),
        n_grid,
        counts,
        pass,
    })
}

/// Compute the counts the theorem needs over `n_grid` and judge them.
pub fn check_hypotheses(
    spec: &VectorSequenceSpec,
    theorem: Theorem,
    n_grid: &[usize],
    params: &HypothesisParams,
) -> Result<HypothesisVerdict> {
    spec.validate()?;
    threshold_for(theorem, spec.r)?;
    let tables: Vec<Vec<(f64, f64)>> = match theorem {
        Theorem::T1 => {
            let rows: Result<Vec<(f64, f64)>> = n_grid
                .iter()
                .map(|&n| {
                    let cfg = Thm1Config {
                        jmax: params.jmax.at(n, spec.r),
                        budget: params.thm1_budget,
                    };
                    Ok((n as f64, thm1_count(&spec.with_n(n), &cfg)? as f64))
                })
                .collect();
            vec![rows?]
        }
        Theorem::T2 | Theorem::T3 => {
            let rule = if theorem == Theorem::T2 {
                GammaRule::Constant(1.0)
            } else {
                GammaRule::InverseN
            };
            spec.components
                .iter()
                .map(|c| {
                    Ok(energy_table(c, n_grid, rule)?
                        .into_iter()
                        .map(|e| (e.n as f64, e.count as f64))
                        .collect())
                })
                .collect::<Result<_>>()?
        }
    };
    verdict_from_tables(theorem, spec.r, &tables, params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub draws: usize,
    pub median_deviation: f64,
    pub median_relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub reports: Vec<PPCReport>,
    pub summary: Vec<SweepSummary>,
}

/// For every N in the grid and every draw `0..n_alpha` of the sampler,
/// the pair correlation over `s_grid`. Draw `k` uses the same alpha at
/// every N.
pub fn ppc_sweep(
    spec: &VectorSequenceSpec,
    n_grid: &[usize],
    s_grid: &[f64],
    n_alpha: usize,
    sampler: &MuSampler,
) -> Result<SweepResult> {
    spec.validate()?;
    for &n in n_grid {
        let size = spec.with_n(n).lattice_size();
        if size > SWEEP_LATTICE_CAP {
            return Err(Error::CapacityGuard {
                what: "lattice points",
                needed: size,
                cap: SWEEP_LATTICE_CAP,
            });
        }
    }
    let mut reports = Vec::with_capacity(n_grid.len() * n_alpha);
    let mut summary = Vec::with_capacity(n_grid.len());
    if n_alpha == 0 {
        return Ok(SweepResult { reports, summary });
    }
    for &n in n_grid {
        let at_n = spec.with_n(n);
        let batch: Result<Vec<PPCReport>> = par::map_range(n_alpha, |k| {
            let alpha = sampler.alpha_at(k as u64, spec.r);
            let proj = project_values_capped(&at_n, &alpha, SWEEP_LATTICE_CAP)?;
            let mut rep = pair_correlation(&proj, n, spec.r, s_grid)?;
            rep.seed = Some(sampler.seed);
            rep.draw = Some(k as u64);
            Ok(rep)
        })
        .into_iter()
        .collect();
        let batch = batch?;
        let dev: Vec<f64> = batch.iter().map(|r| r.deviation).collect();
        let rel: Vec<f64> = batch.iter().map(PPCReport::relative_deviation).collect();
        summary.push(SweepSummary {
            n,
            draws: n_alpha,
            median_deviation: median(&dev),
            median_relative_deviation: median(&rel),
        });
        reports.extend(batch);
    }
    Ok(SweepResult { reports, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::ComponentSpec;

    #[test]
    fn exact_power_law() {
        let t: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0]
            .iter()
            .map(|&n: &f64| (n, n * n))
            .collect();
        let f = fit_exponent(&t).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let c: Vec<(f64, f64)> = t.iter().map(|p| (p.0, 5.0)).collect();
        assert!(fit_exponent(&c).unwrap().exponent.abs() < 1e-9);
    }

    #[test]
    fn rounded_power_law() {
        let t: Vec<(f64, f64)> = (1..=8)
            .map(|k| (64.0 * k as f64, (64.0 * k as f64).powf(2.5).round()))
            .collect();
        assert!((fit_exponent(&t).unwrap().exponent - 2.5).abs() < 0.01);
    }

    #[test]
    fn rescaling_counts_keeps_exponent() {
        let t: Vec<(f64, f64)> = (1..=6)
            .map(|k| (k as f64 * 10.0, (k as f64 * 10.0).powf(2.2)))
            .collect();
        let s: Vec<(f64, f64)> = t.iter().map(|p| (p.0, 37.0 * p.1)).collect();
        let (a, b) = (fit_exponent(&t).unwrap(), fit_exponent(&s).unwrap());
        assert!((a.exponent - b.exponent).abs() < 1e-9);
        assert!((b.intercept - a.intercept - 37f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(fit_exponent(&[(1.0, 1.0); 3]), Err(Error::TooFewPoints(3)));
        let t = [(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)];
        assert_eq!(fit_exponent(&t), Err(Error::NonPositiveCount(1)));
    }

    #[test]
    fn thresholds() {
        assert!((thm2_threshold(2).unwrap() - 2.382).abs() < 0.001);
        assert!((thm2_threshold(3).unwrap() - 2.6367).abs() < 0.0001);
        let mut prev = 0.0;
        for r in 2..200 {
            let t = thm2_threshold(r).unwrap();
            assert!(t > prev && t < 280.0 / 89.0);
            prev = t;
        }
        assert_eq!(thm2_threshold(1), Err(Error::InvalidR(1)));
    }

    #[test]
    fn synthetic_table_fails_t2() {
        let t: Vec<(f64, f64)> = (1..=6)
            .map(|k| (k as f64 * 100.0, (k as f64 * 100.0).powf(2.5)))
            .collect();
        let v = verdict_from_tables(Theorem::T2, 2, &[t], &HypothesisParams::default()).unwrap();
        assert!(!v.pass);
        assert!((v.fitted[0] - 2.5).abs() < 1e-9);
    }

    #[test]
    fn bigger_margin_never_rescues() {
        let t: Vec<(f64, f64)> = (1..=6)
            .map(|k| (k as f64 * 100.0, (k as f64 * 100.0).powf(2.35)))
            .collect();
        let mut last = true;
        for m in [0.0, 0.01, 0.03, 0.05, 0.1] {
            let p = HypothesisParams {
                delta_margin: m,
                ..Default::default()
            };
            let v = verdict_from_tables(Theorem::T2, 2, std::slice::from_ref(&t), &p).unwrap();
            assert!(last || !v.pass);
            last = v.pass;
        }
    }

    #[test]
    fn t1_on_small_lacunary() {
        let spec = VectorSequenceSpec::new(
            vec![ComponentSpec::Lacunary {
                a0: 1.0,
                lambda: 2.0,
            }],
            4,
        );
        let p = HypothesisParams {
            jmax: JmaxRule::LatticeScale,
            ..Default::default()
        };
        let v = check_hypotheses(&spec, Theorem::T1, &[4, 5, 6, 7], &p).unwrap();
        assert_eq!(v.threshold, 4.0);
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn t3_ratio_rule() {
        assert!(ratios_bounded(&[1.0, 1.2, 0.9, 1.1]));
        assert!(!ratios_bounded(&[1.0, 1.1, 1.2, 3.0]));
    }

    #[test]
    fn sweep_shapes() {
        let spec = VectorSequenceSpec::new(
            vec![
                ComponentSpec::Power { theta: 1.5 },
                ComponentSpec::Power { theta: 1.3 },
            ],
            10,
        );
        let s = MuSampler::new(5);
        let empty = ppc_sweep(&spec, &[10, 20], &[1.0], 0, &s).unwrap();
        assert!(empty.reports.is_empty());
        let a = ppc_sweep(&spec, &[10, 20], &[0.5, 1.0], 3, &s).unwrap();
        assert_eq!(a.reports.len(), 6);
        assert_eq!(a.summary.len(), 2);
        assert_eq!(a, ppc_sweep(&spec, &[10, 20], &[0.5, 1.0], 3, &s).unwrap());
        assert!(matches!(
            ppc_sweep(&spec, &[1000], &[1.0], 1, &s),
            Err(Error::CapacityGuard { .. })
        ));
    }
}
