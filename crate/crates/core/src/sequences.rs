//! Component sequences a^i(n) on the index range 0..=N and checks of their
//! growth, lacunarity and convexity hypotheses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest magnitude a materialized value may have.
pub const MAGNITUDE_GUARD: f64 = 35_184_372_088_832.0; // 2^45

/// One component sequence, tagged by `kind` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ComponentSpec {
    /// `a0 * lambda^n`
    Lacunary {
        a0: f64,
        lambda: f64,
    },
    /// `p2 (n+shift)^2 + p1 (n+shift) + p0`
    QuadraticReal {
        p2: f64,
        p1: f64,
        p0: f64,
        #[serde(default)]
        shift: u64,
    },
    /// `n^theta`
    Power {
        theta: f64,
    },
    /// Prefix sums of the given gaps, starting at 0.
    ConvexCumulative {
        gaps: Vec<f64>,
    },
    Explicit {
        values: Vec<f64>,
    },
}

impl ComponentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        match self {
            ComponentSpec::Lacunary { a0, lambda } => {
                if !(*a0 > 0.0 && a0.is_finite()) {
                    return bad("Lacunary needs a0 > 0");
                }
                if !(*lambda > 1.0 && lambda.is_finite()) {
                    return bad("Lacunary needs lambda > 1");
                }
            }
            ComponentSpec::QuadraticReal { p2, p1, p0, .. } => {
                if !(*p2 > 0.0 && p2.is_finite()) {
                    return bad("QuadraticReal needs p2 > 0");
                }
                if !(p1.is_finite() && p0.is_finite()) {
                    return bad("QuadraticReal coefficients must be finite");
                }
            }
            ComponentSpec::Power { theta } => {
                if !(*theta > 0.0 && theta.is_finite()) {
                    return bad("Power needs theta > 0");
                }
            }
            ComponentSpec::ConvexCumulative { gaps } => {
                if gaps.is_empty() {
                    return bad("ConvexCumulative needs at least one gap");
                }
                if gaps.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
                    return bad("ConvexCumulative gaps must be positive");
                }
                if gaps.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("ConvexCumulative gaps must be increasing");
                }
            }
            ComponentSpec::Explicit { values } => {
                if values.is_empty() {
                    return bad("Explicit list is empty");
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("Explicit values must be finite");
                }
            }
        }
        Ok(())
    }

    /// Value at index `n`, without guards. `None` when the index is past the
    /// end of an explicit list.
    pub fn value_at(&self, n: usize) -> Option<f64> {
        let x = n as f64;
        match self {
            ComponentSpec::Lacunary { a0, lambda } => Some(a0 * lambda.powf(x)),
            ComponentSpec::QuadraticReal { p2, p1, p0, shift } => {
                let m = x + *shift as f64;
                Some((p2 * m + p1).mul_add(m, *p0))
            }
            ComponentSpec::Power { theta } => Some(x.powf(*theta)),
            ComponentSpec::ConvexCumulative { gaps } => {
                if n > gaps.len() {
                    None
                } else {
                    Some(gaps[..n].iter().sum())
                }
            }
            ComponentSpec::Explicit { values } => values.get(n).copied(),
        }
    }
}

/// Materialized values `a(0), ..., a(N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentValues {
    pub values: Vec<f64>,
    /// Smallest consecutive difference; `+inf` for a single value.
    pub min_gap: f64,
    pub magnitude_max: f64,
}

impl ComponentValues {
    /// Wrap raw values, enforcing the guard and strict monotonicity.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooShort { need: 1, got: 0 });
        }
        let mut magnitude_max = 0.0f64;
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || v.abs() > MAGNITUDE_GUARD {
                return Err(Error::MagnitudeGuard {
                    index: i,
                    value: *v,
                });
            }
            magnitude_max = magnitude_max.max(v.abs());
        }
        let mut min_gap = f64::INFINITY;
        for (i, w) in values.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if gap <= 0.0 {
                return Err(Error::NotIncreasing(i + 1));
            }
            min_gap = min_gap.min(gap);
        }
        Ok(Self {
            values,
            min_gap,
            magnitude_max,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluate `spec` at `0..=n`.
pub fn materialize(spec: &ComponentSpec, n: usize) -> Result<ComponentValues> {
    spec.validate()?;
    if let ComponentSpec::Lacunary { a0, lambda } = spec {
        // reject before powf overflows to inf
        let top = a0.ln() + (n as f64) * lambda.ln();
        if top > MAGNITUDE_GUARD.ln() + 1e-9 {
            return Err(Error::MagnitudeGuard {
                index: n,
                value: top.exp(),
            });
        }
    }
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let v = spec.value_at(i).ok_or_else(|| {
            Error::InvalidSpec(format!("sequence has no term at index {i} (need 0..={n})"))
        })?;
        values.push(v);
    }
    ComponentValues::from_values(values)
}

/// True iff every consecutive difference is at least `c`.
pub fn check_growth(values: &[f64], c: f64) -> bool {
    values.windows(2).all(|w| w[1] - w[0] >= c)
}

/// True iff every ratio `values[n+1] / values[n]` is at least `lambda`.
pub fn check_lacunary(values: &[f64], lambda: f64) -> Result<bool> {
    if let Some(i) = values.iter().position(|v| *v <= 0.0) {
        return Err(Error::NonPositiveValue(i));
    }
    Ok(values.windows(2).all(|w| w[1] / w[0] >= lambda))
}

/// True iff consecutive gaps are strictly increasing.
pub fn check_convex(values: &[f64]) -> Result<bool> {
    if values.len() < 3 {
        return Err(Error::TooShort {
            need: 3,
            got: values.len(),
        });
    }
    Ok(values.windows(3).all(|w| w[1] - w[0] < w[2] - w[1]))
}

/// r component sequences evaluated on the lattice box `[0, N]^r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSequenceSpec {
    pub r: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub components: Vec<ComponentSpec>,
}

impl VectorSequenceSpec {
    pub fn new(components: Vec<ComponentSpec>, n: usize) -> Self {
        Self {
            r: components.len(),
            n,
            components,
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidSpec("r must be at least 1".into()));
        }
        if self.components.len() != self.r {
            return Err(Error::InvalidSpec(format!(
                "r = {} but {} components given",
                self.r,
                self.components.len()
            )));
        }
        self.components.iter().try_for_each(ComponentSpec::validate)
    }

    /// Materialize every component at `0..=N`.
    pub fn materialize(&self) -> Result<Vec<ComponentValues>> {
        self.validate()?;
        self.components
            .iter()
            .map(|c| materialize(c, self.n))
            .collect()
    }

    /// Number of lattice points, `(N+1)^r`, saturating.
    pub fn lattice_size(&self) -> u128 {
        (self.n as u128 + 1).saturating_pow(self.r as u32)
    }

    /// The pair-correlation normalizer `N^r`.
    pub fn normalizer(&self) -> f64 {
        (self.n as f64).powi(self.r as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_two() {
        let v = materialize(&ComponentSpec::Power { theta: 2.0 }, 3).unwrap();
        assert_eq!(v.values, vec![0.0, 1.0, 4.0, 9.0]);
        assert_eq!(v.min_gap, 1.0);
        assert_eq!(v.magnitude_max, 9.0);
    }

    #[test]
    fn lacunary_powers_of_two() {
        let v = materialize(
            &ComponentSpec::Lacunary {
                a0: 1.0,
                lambda: 2.0,
            },
            4,
        )
        .unwrap();
        assert_eq!(v.values, vec![1.0, 2.0, 4.0, 8.0, 16.0]);
    }

    #[test]
    // reference digits, not derived from the library constants
    #[allow(clippy::approx_constant, clippy::excessive_precision)]
    fn quadratic_sqrt2() {
        let spec = ComponentSpec::QuadraticReal {
            p2: 2f64.sqrt(),
            p1: 0.0,
            p0: 0.0,
            shift: 0,
        };
        let v = materialize(&spec, 2).unwrap();
        // sqrt(2) = 1.41421356237309504880..., 4 sqrt(2) = 5.65685424949238019520...
        assert_eq!(v.values[0], 0.0);
        assert!((v.values[1] - 1.414_213_562_373_095_048_8).abs() < 1e-15);
        assert!((v.values[2] - 5.656_854_249_492_380_195_2).abs() < 1e-14);
    }

    #[test]
    fn convex_cumulative_prefix_sums() {
        let spec = ComponentSpec::ConvexCumulative {
            gaps: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(
            materialize(&spec, 3).unwrap().values,
            vec![0.0, 1.0, 3.0, 6.0]
        );
        assert!(matches!(materialize(&spec, 4), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn guard_and_invariant_errors() {
        let big = ComponentSpec::Lacunary {
            a0: 1.0,
            lambda: 2.0,
        };
        assert!(matches!(
            materialize(&big, 46),
            Err(Error::MagnitudeGuard { .. })
        ));
        assert!(materialize(&big, 45).is_ok());
        let bad = ComponentSpec::Lacunary {
            a0: 1.0,
            lambda: 1.0,
        };
        assert!(matches!(materialize(&bad, 3), Err(Error::InvalidSpec(_))));
        let flat = ComponentSpec::Explicit {
            values: vec![0.0, 1.0, 1.0],
        };
        assert_eq!(materialize(&flat, 2), Err(Error::NotIncreasing(2)));
        let empty = ComponentSpec::Explicit { values: vec![] };
        assert!(matches!(materialize(&empty, 0), Err(Error::InvalidSpec(_))));
        let q = ComponentSpec::QuadraticReal {
            p2: -1.0,
            p1: 0.0,
            p0: 0.0,
            shift: 0,
        };
        assert!(matches!(materialize(&q, 2), Err(Error::InvalidSpec(_))));
        // decreasing at index 0 without a shift
        let q = ComponentSpec::QuadraticReal {
            p2: 1.0,
            p1: -5.0,
            p0: 0.0,
            shift: 0,
        };
        assert!(matches!(materialize(&q, 5), Err(Error::NotIncreasing(_))));
        let q = ComponentSpec::QuadraticReal {
            p2: 1.0,
            p1: -5.0,
            p0: 0.0,
            shift: 3,
        };
        assert!(materialize(&q, 5).is_ok());
    }

    #[test]
    fn growth_examples() {
        assert!(check_growth(&[1.0, 2.0, 4.0, 8.0], 1.0));
        assert!(!check_growth(&[0.0, 0.5, 1.0], 0.6));
        let v = materialize(&ComponentSpec::Power { theta: 1.5 }, 100).unwrap();
        assert!(check_growth(&v.values, 1.0));
        assert_eq!(v.min_gap, 1.0);
    }

    #[test]
    fn lacunary_examples() {
        assert!(check_lacunary(&[1.0, 2.0, 4.0, 8.0], 2.0).unwrap());
        assert!(!check_lacunary(&[1.0, 2.0, 3.0], 2.0).unwrap());
        assert_eq!(
            check_lacunary(&[0.0, 1.0], 2.0),
            Err(Error::NonPositiveValue(0))
        );
        let v = materialize(
            &ComponentSpec::Lacunary {
                a0: 1.0,
                lambda: 1.05,
            },
            400,
        )
        .unwrap();
        assert!(check_lacunary(&v.values, 1.05 - 1e-12).unwrap());
    }

    #[test]
    fn convex_examples() {
        assert!(check_convex(&[0.0, 1.0, 3.0, 6.0]).unwrap());
        assert!(!check_convex(&[0.0, 1.0, 2.0, 3.0]).unwrap());
        assert_eq!(
            check_convex(&[0.0, 1.0]),
            Err(Error::TooShort { need: 3, got: 2 })
        );
        let v = materialize(&ComponentSpec::Power { theta: 1.5 }, 50).unwrap();
        assert!(check_convex(&v.values).unwrap());
    }

    #[test]
    fn spec_json_shape() {
        let json = r#"{"r": 2, "N": 10, "components": [
            {"kind": "Power", "theta": 1.5},
            {"kind": "QuadraticReal", "p2": 1.4142135623730951, "p1": 1.0, "p0": 0.0}
        ]}"#;
        let spec: VectorSequenceSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.r, 2);
        assert_eq!(spec.n, 10);
        assert!(matches!(
            spec.components[1],
            ComponentSpec::QuadraticReal { shift: 0, .. }
        ));
        let back: VectorSequenceSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let wrong = VectorSequenceSpec { r: 3, ..spec };
        assert!(wrong.validate().is_err());
    }
}
