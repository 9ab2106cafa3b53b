//! Pair correlation of the projected lattice values `{alpha . a(x)}`,
//! x in `B(r, N) = Z^r ∩ [0, N]^r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{frac_of_product, frac_sum, Frac};
use crate::par;
use crate::sequences::{VectorSequenceSpec, MAGNITUDE_GUARD};

pub use crate::numeric::torus_distance;

/// Largest lattice that [`project_values`] will enumerate.
pub const DEFAULT_LATTICE_CAP: u128 = 1 << 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub coords: Vec<f64>,
}

impl AlphaVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn r(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for AlphaVector {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// Sorted fractional parts of `alpha . a(x)` over the lattice box.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedValues {
    pub fracs: Vec<f64>,
    pub count: usize,
    /// Bound on the absolute error of every entry.
    pub precision_bound: f64,
    pub alpha: AlphaVector,
}

/// Per-component fractional parts `{alpha_i a^i(n)}`, n = 0..=N.
pub(crate) fn component_fracs(
    spec: &VectorSequenceSpec,
    alpha: &AlphaVector,
) -> Result<Vec<Vec<Frac>>> {
    if alpha.r() != spec.r {
        return Err(Error::InvalidSpec(format!(
            "alpha has {} coordinates but r = {}",
            alpha.r(),
            spec.r
        )));
    }
    let comps = spec.materialize()?;
    comps
        .iter()
        .zip(&alpha.coords)
        .map(|(cv, &a)| {
            cv.values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let prod = a * v;
                    if !prod.is_finite() || prod.abs() > MAGNITUDE_GUARD {
                        return Err(Error::MagnitudeGuard {
                            index: i,
                            value: prod,
                        });
                    }
                    Ok(frac_of_product(a, v))
                })
                .collect()
        })
        .collect()
}

/// Fractional parts of `alpha . a(x)` for every `x` in `B(r, N)`, sorted.
pub fn project_values(spec: &VectorSequenceSpec, alpha: &AlphaVector) -> Result<ProjectedValues> {
    project_values_capped(spec, alpha, DEFAULT_LATTICE_CAP)
}

pub fn project_values_capped(
    spec: &VectorSequenceSpec,
    alpha: &AlphaVector,
    cap: u128,
) -> Result<ProjectedValues> {
    let size = spec.lattice_size();
    if size > cap {
        return Err(Error::CapacityGuard {
            what: "lattice points",
            needed: size,
            cap,
        });
    }
    let per = component_fracs(spec, alpha)?;
    let count = size as usize;
    let side = spec.n + 1;
    let r = spec.r;

    // mixed-radix walk over the lattice, first coordinate fastest
    let mut fracs = Vec::with_capacity(count);
    let mut idx = vec![0usize; r];
    let mut parts = vec![Frac::default(); r];
    for _ in 0..count {
        for (k, &i) in idx.iter().enumerate() {
            parts[k] = per[k][i];
        }
        fracs.push(frac_sum(&parts));
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < side {
                break;
            }
            *slot = 0;
        }
    }
    par::sort_f64(&mut fracs);
    Ok(ProjectedValues {
        fracs,
        count,
        precision_bound: 4.0 * (r as f64 + 1.0) * f64::EPSILON,
        alpha: alpha.clone(),
    })
}

/// Number of unordered pairs `u < v` of a sorted slice in `[0, 1)` whose
/// torus distance is at most `w` (`w < 1/2`).
pub fn count_close_pairs(sorted: &[f64], w: f64) -> u64 {
    let m = sorted.len();
    let mut total = 0u64;
    // direct pairs: f[j] - f[i] <= w
    let mut hi = 0usize;
    for i in 0..m {
        hi = hi.max(i + 1);
        while hi < m && sorted[hi] - sorted[i] <= w {
            hi += 1;
        }
        total += (hi - i - 1) as u64;
    }
    // pairs that wrap around 1: 1 - (f[j] - f[i]) <= w
    let mut lo = 0usize;
    for i in 0..m {
        lo = lo.max(i + 1);
        while lo < m && 1.0 - (sorted[lo] - sorted[i]) > w {
            lo += 1;
        }
        total += (m - lo) as u64;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PPCReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub r: usize,
    #[serde(rename = "s")]
    pub s_grid: Vec<f64>,
    #[serde(rename = "r2")]
    pub r2_values: Vec<f64>,
    /// `max |R2(s) - 2s|` over the grid.
    pub deviation: f64,
    pub alpha: Vec<f64>,
    pub seed: Option<u64>,
    /// Draw index within the seeded stream, when sampled.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub draw: Option<u64>,
}

impl PPCReport {
    /// `max |R2(s) - 2s| / (2s)` over the grid.
    pub fn relative_deviation(&self) -> f64 {
        self.s_grid
            .iter()
            .zip(&self.r2_values)
            .map(|(s, r2)| (r2 - 2.0 * s).abs() / (2.0 * s))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_s_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidSpec("s values must be positive".into()));
    }
    if s_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidSpec("s grid must be ascending".into()));
    }
    Ok(())
}

/// `R2(s) = #{ordered pairs u != v : ||f_u - f_v|| <= s / N^r} / N^r` for each s.
pub fn pair_correlation(
    proj: &ProjectedValues,
    n: usize,
    r: usize,
    s_grid: &[f64],
) -> Result<PPCReport> {
    check_s_grid(s_grid)?;
    let norm = (n as f64).powi(r as i32);
    let mut r2_values = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if proj.fracs.len() < 2 {
            r2_values.push(0.0);
            continue;
        }
        let w = s / norm;
        if w.is_nan() || w >= 0.5 {
            return Err(Error::WindowTooWide { window: w });
        }
        let ordered = 2 * count_close_pairs(&proj.fracs, w);
        r2_values.push(ordered as f64 / norm);
    }
    let deviation = s_grid
        .iter()
        .zip(&r2_values)
        .map(|(s, r2)| (r2 - 2.0 * s).abs())
        .fold(0.0, f64::max);
    Ok(PPCReport {
        n,
        r,
        s_grid: s_grid.to_vec(),
        r2_values,
        deviation,
        alpha: proj.alpha.coords.clone(),
        seed: None,
        draw: None,
    })
}

/// Project and correlate in one step.
pub fn pair_correlation_for(
    spec: &VectorSequenceSpec,
    alpha: &AlphaVector,
    s_grid: &[f64],
) -> Result<PPCReport> {
    let proj = project_values(spec, alpha)?;
    pair_correlation(&proj, spec.n, spec.r, s_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::ComponentSpec;
    use proptest::prelude::*;

    fn brute_ordered(f: &[f64], w: f64) -> u64 {
        let mut c = 0;
        for u in 0..f.len() {
            for v in 0..f.len() {
                if u != v && torus_distance(f[u] - f[v]) <= w {
                    c += 1;
                }
            }
        }
        c
    }

    fn proj_of(fracs: Vec<f64>) -> ProjectedValues {
        let count = fracs.len();
        ProjectedValues {
            fracs,
            count,
            precision_bound: 0.0,
            alpha: AlphaVector::new(vec![1.0]),
        }
    }

    #[test]
    fn explicit_projection_r1() {
        let spec = VectorSequenceSpec::new(
            vec![ComponentSpec::Explicit {
                values: vec![0.0, 1.0, 2.0],
            }],
            2,
        );
        let p = project_values(&spec, &AlphaVector::new(vec![0.3])).unwrap();
        assert_eq!(p.count, 3);
        let want = [0.0, 0.3, 0.6];
        for (a, b) in p.fracs.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn explicit_projection_r2() {
        let c = ComponentSpec::Explicit {
            values: vec![0.0, 1.0],
        };
        let spec = VectorSequenceSpec::new(vec![c.clone(), c], 1);
        let p = project_values(&spec, &AlphaVector::new(vec![0.25, 0.5])).unwrap();
        assert_eq!(p.fracs, vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn power_projection_matches_high_precision() {
        // {sqrt(2) n^1.5}, n = 0..4, from 40-digit arithmetic:
        // sqrt2 * 2^1.5 = 4, sqrt2 * 3^1.5 = 7.34846922834953429459...,
        // sqrt2 * 4^1.5 = 11.31370849898476039041...
        let spec = VectorSequenceSpec::new(vec![ComponentSpec::Power { theta: 1.5 }], 4);
        let p = project_values(&spec, &AlphaVector::new(vec![2f64.sqrt()])).unwrap();
        let mut want = [
            0.0,
            0.414_213_562_373_095_048_80,
            0.0,
            0.348_469_228_349_534_294_59,
            0.313_708_498_984_760_390_41,
        ];
        want.sort_by(f64::total_cmp);
        for (a, b) in p.fracs.iter().zip(want) {
            assert!(torus_distance(a - b) < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn projection_checks_alpha_length_and_magnitude() {
        let spec = VectorSequenceSpec::new(vec![ComponentSpec::Power { theta: 1.0 }], 4);
        assert!(matches!(
            project_values(&spec, &AlphaVector::new(vec![1.0, 2.0])),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            project_values(&spec, &AlphaVector::new(vec![1e14])),
            Err(Error::MagnitudeGuard { .. })
        ));
        assert!(matches!(
            project_values_capped(&spec, &AlphaVector::new(vec![1.0]), 4),
            Err(Error::CapacityGuard { .. })
        ));
    }

    #[test]
    fn three_point_example() {
        // only (1,2) and (2,1) are within 0.2/3
        let p = proj_of(vec![0.05, 0.10, 0.50]);
        let rep = pair_correlation(&p, 3, 1, &[0.2]).unwrap();
        assert!((rep.r2_values[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((rep.deviation - (0.4 - 2.0 / 3.0f64).abs()).abs() < 1e-15);
    }

    #[test]
    fn tiny_window_gives_zero() {
        let p = proj_of(vec![0.1, 0.2, 0.7]);
        let rep = pair_correlation(&p, 3, 1, &[1e-6]).unwrap();
        assert_eq!(rep.r2_values, vec![0.0]);
    }

    #[test]
    fn closed_window_counts_ties() {
        // distance exactly 0.25 = s / N with s = 1, N = 4
        let p = proj_of(vec![0.0, 0.25]);
        let rep = pair_correlation(&p, 4, 1, &[1.0]).unwrap();
        assert_eq!(rep.r2_values, vec![0.5]);
    }

    #[test]
    fn wraparound_pairs_are_counted() {
        assert_eq!(count_close_pairs(&[0.01, 0.99], 0.03), 1);
        assert_eq!(count_close_pairs(&[0.01, 0.99], 0.01), 0);
    }

    #[test]
    fn window_too_wide_and_bad_grid() {
        let p = proj_of(vec![0.1, 0.2]);
        assert!(matches!(
            pair_correlation(&p, 2, 1, &[1.0]),
            Err(Error::WindowTooWide { .. })
        ));
        assert!(pair_correlation(&p, 10, 1, &[1.0, 0.5]).is_err());
        assert!(pair_correlation(&p, 10, 1, &[0.0]).is_err());
    }

    #[test]
    fn r2_lattice_against_brute_force() {
        let spec = VectorSequenceSpec::new(
            vec![
                ComponentSpec::Explicit {
                    values: vec![0.0, 0.3],
                },
                ComponentSpec::Explicit {
                    values: vec![0.0, 0.4],
                },
            ],
            1,
        );
        let p = project_values(&spec, &AlphaVector::new(vec![1.0, 1.0])).unwrap();
        // points 0, 0.3, 0.4, 0.7; every torus distance is at most 0.4
        let rep = pair_correlation(&p, 1, 2, &[0.35, 0.45]).unwrap();
        assert_eq!(rep.r2_values[0], brute_ordered(&p.fracs, 0.35) as f64);
        assert_eq!(rep.r2_values[1], brute_ordered(&p.fracs, 0.45) as f64);
        assert_eq!(rep.r2_values[1], 12.0);
    }

    #[test]
    fn single_point_lattice_is_zero() {
        let spec = VectorSequenceSpec::new(vec![ComponentSpec::Power { theta: 1.5 }], 0);
        let rep = pair_correlation_for(&spec, &AlphaVector::new(vec![0.7]), &[1.0]).unwrap();
        assert_eq!(rep.r2_values, vec![0.0]);
    }

    proptest! {
        #[test]
        fn sweep_equals_brute_force(
            mut f in proptest::collection::vec(0.0f64..1.0, 0..200),
            w in 0.0f64..0.499,
        ) {
            f.sort_by(f64::total_cmp);
            prop_assert_eq!(2 * count_close_pairs(&f, w), brute_ordered(&f, w));
        }

        #[test]
        fn r2_monotone_in_s(
            mut f in proptest::collection::vec(0.0f64..1.0, 2..300),
            a in 0.01f64..2.0,
            b in 0.01f64..2.0,
        ) {
            f.sort_by(f64::total_cmp);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let rep = pair_correlation(&proj_of(f), 10, 1, &[lo, hi]).unwrap();
            prop_assert!(rep.r2_values[0] <= rep.r2_values[1]);
        }

        #[test]
        fn projection_matches_direct_dot(
            a1 in -50.0f64..50.0,
            a2 in -50.0f64..50.0,
        ) {
            let spec = VectorSequenceSpec::new(
                vec![ComponentSpec::Power { theta: 1.5 }, ComponentSpec::Power { theta: 1.3 }],
                6,
            );
            let p = project_values(&spec, &AlphaVector::new(vec![a1, a2])).unwrap();
            let mut direct = Vec::new();
            for x in 0..=6 {
                for y in 0..=6 {
                    let t = a1 * (x as f64).powf(1.5) + a2 * (y as f64).powf(1.3);
                    direct.push(t - t.floor());
                }
            }
            direct.sort_by(f64::total_cmp);
            // sorted order may differ where values straddle 0/1
            let mut hits = 0;
            for u in &p.fracs {
                if direct.iter().any(|v| torus_distance(u - v) < 1e-12) {
                    hits += 1;
                }
            }
            prop_assert_eq!(hits, p.fracs.len());
        }
    }
}
