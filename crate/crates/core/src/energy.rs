//! Additive-energy counts `#{|v1 - v2 + v3 - v4| < gamma}` and the
//! two-coefficient Diophantine count over lattice pair differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::sequences::{materialize, ComponentSpec, VectorSequenceSpec};

/// Default cap on the number of pair sums held in memory (N <= 8192).
pub const DEFAULT_PAIR_SUM_CAP: u128 = 1 << 26;

/// Largest N accepted by [`additive_energy_bruteforce`].
pub const BRUTE_FORCE_MAX_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fast,
    Brute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub gamma: f64,
    pub count: u64,
    #[serde(rename = "component")]
    pub component_index: usize,
    pub method: Method,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )))
    }
}

/// Additive energy by sorting the N^2 pair sums `v[a] + v[b]` and sweeping.
pub fn additive_energy(values: &[f64], gamma: f64) -> Result<EnergyReport> {
    additive_energy_capped(values, gamma, DEFAULT_PAIR_SUM_CAP)
}

pub fn additive_energy_capped(values: &[f64], gamma: f64, cap: u128) -> Result<EnergyReport> {
    check_gamma(gamma)?;
    let n = values.len();
    if n == 0 {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    let m = (n as u128) * (n as u128);
    if m > cap {
        return Err(Error::CapacityGuard {
            what: "pair sums",
            needed: m,
            cap,
        });
    }
    let mut sums = Vec::with_capacity(m as usize);
    for &a in values {
        for &b in values {
            sums.push(a + b);
        }
    }
    par::sort_f64(&mut sums);
    let m = sums.len();
    // ordered pairs of sums: the diagonal plus twice the strictly ordered ones
    let mut count = m as u64;
    let mut hi = 0usize;
    for i in 0..m {
        hi = hi.max(i + 1);
        while hi < m && sums[hi] - sums[i] < gamma {
            hi += 1;
        }
        count += 2 * (hi - i - 1) as u64;
    }
    Ok(EnergyReport {
        n,
        gamma,
        count,
        component_index: 0,
        method: Method::Fast,
    })
}

/// O(N^4) enumeration with the same counting semantics as [`additive_energy`].
pub fn additive_energy_bruteforce(values: &[f64], gamma: f64) -> Result<EnergyReport> {
    check_gamma(gamma)?;
    let n = values.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge {
            max: BRUTE_FORCE_MAX_N,
            got: n,
        });
    }
    let mut count = 0u64;
    for &v1 in values {
        for &v2 in values {
            for &v3 in values {
                for &v4 in values {
                    if ((v1 + v3) - (v2 + v4)).abs() < gamma {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(EnergyReport {
        n,
        gamma,
        count,
        component_index: 0,
        method: Method::Brute,
    })
}

/// How gamma depends on N in an energy table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum GammaRule {
    Constant(f64),
    /// gamma = 1/N
    InverseN,
}

impl GammaRule {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            GammaRule::Constant(g) => *g,
            GammaRule::InverseN => 1.0 / n as f64,
        }
    }
}

/// The first `n` terms of a component, indices `0..n`.
pub fn first_terms(spec: &ComponentSpec, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    Ok(materialize(spec, n - 1)?.values)
}

/// One fast energy count per grid point, in grid order.
pub fn energy_table(
    spec: &ComponentSpec,
    n_grid: &[usize],
    gamma_rule: GammaRule,
) -> Result<Vec<EnergyReport>> {
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec(
            "N grid must be strictly ascending".into(),
        ));
    }
    par::map_range(n_grid.len(), |k| {
        let n = n_grid[k];
        let values = first_terms(spec, n)?;
        additive_energy(&values, gamma_rule.at(n))
    })
    .into_iter()
    .collect()
}

/// Coefficient range and work budget for [`thm1_count`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm1Config {
    pub jmax: u64,
    /// Upper bound on `P^2 * jmax` interval probes, P the number of ordered
    /// distinct lattice pairs.
    pub budget: u128,
}

impl Thm1Config {
    pub fn new(jmax: u64) -> Self {
        Self {
            jmax,
            budget: 4_000_000_000,
        }
    }
}

/// Differences `a(x) - a(y)` for every ordered pair of distinct lattice
/// points, one row of r components per pair.
fn lattice_pair_differences(spec: &VectorSequenceSpec) -> Result<Vec<Vec<f64>>> {
    let comps = spec.materialize()?;
    let side = spec.n + 1;
    let m = spec.lattice_size() as usize;
    let r = spec.r;
    let coords = |mut k: usize| {
        let mut c = Vec::with_capacity(r);
        for _ in 0..r {
            c.push(k % side);
            k /= side;
        }
        c
    };
    let points: Vec<Vec<usize>> = (0..m).map(coords).collect();
    let mut out = Vec::with_capacity(m * m.saturating_sub(1));
    for x in &points {
        for y in &points {
            if x == y {
                continue;
            }
            out.push(
                (0..r)
                    .map(|i| comps[i].values[x[i]] - comps[i].values[y[i]])
                    .collect(),
            );
        }
    }
    Ok(out)
}

/// Number of `(j1, j2, x, y, z, w)` with `1 <= j1, j2 <= jmax`, `x != y`,
/// `z != w` in `B(r, N)` and
/// `max_i |j1 (a^i(x_i) - a^i(y_i)) - j2 (a^i(z_i) - a^i(w_i))| < 1`.
///
/// For each pair of differences and each `j2`, the admissible `j1` form an
/// open interval per component; the integers in the intersection are
/// counted (and each one re-checked against the inequality itself).
pub fn thm1_count(spec: &VectorSequenceSpec, config: &Thm1Config) -> Result<u64> {
    if config.jmax == 0 {
        return Err(Error::InvalidSpec("jmax must be at least 1".into()));
    }
    let m = spec.lattice_size();
    let pairs = m * m.saturating_sub(1);
    let needed = pairs
        .saturating_mul(pairs)
        .saturating_mul(config.jmax as u128);
    if needed > config.budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: config.budget,
        });
    }
    let diffs = lattice_pair_differences(spec)?;
    let jmax = config.jmax;
    let partial = par::map_range(diffs.len(), |ui| {
        let du = &diffs[ui];
        let mut c = 0u64;
        for dv in &diffs {
            c += count_j_pairs(du, dv, jmax);
        }
        c
    });
    Ok(partial.into_iter().sum())
}

#[inline]
fn admissible(j1: f64, j2: f64, du: &[f64], dv: &[f64]) -> bool {
    du.iter()
        .zip(dv)
        .all(|(&ru, &rv)| (j1 * ru - j2 * rv).abs() < 1.0)
}

fn count_j_pairs(du: &[f64], dv: &[f64], jmax: u64) -> u64 {
    let mut c = 0u64;
    for j2 in 1..=jmax {
        let j2f = j2 as f64;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut empty = false;
        for (&ru, &rv) in du.iter().zip(dv) {
            let t = j2f * rv;
            if ru == 0.0 {
                if t.abs() >= 1.0 {
                    empty = true;
                    break;
                }
                continue;
            }
            let (a, b) = ((t - 1.0) / ru, (t + 1.0) / ru);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            lo = lo.max(a);
            hi = hi.min(b);
        }
        if empty || lo >= hi {
            continue;
        }
        // widen by one to absorb rounding in the quotients, then verify exactly
        let first = (lo.floor() - 1.0).max(1.0);
        let last = (hi.ceil() + 1.0).min(jmax as f64);
        let mut j1 = first;
        while j1 <= last {
            if admissible(j1, j2f, du, dv) {
                c += 1;
            }
            j1 += 1.0;
        }
    }
    c
}

/// Number of ordered distinct lattice pairs, `M (M - 1)` with `M = (N+1)^r`.
pub fn ordered_pair_count(spec: &VectorSequenceSpec) -> u128 {
    let m = spec.lattice_size();
    m * m.saturating_sub(1)
}
