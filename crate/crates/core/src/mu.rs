//! The averaging measure with density `2 sin^2(x/2) / (pi x^2)` on each
//! coordinate. Its characteristic function is the triangle
//! `max(1 - |u|, 0)`, supported on `(-1, 1)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::statistics::AlphaVector;

const INV_TWO_PI: f64 = 1.0 / (2.0 * PI);

/// `2 sin^2(x/2) / (pi x^2)`.
pub fn mu_density(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        // (1/2pi) (sin(x/2) / (x/2))^2 = (1/2pi) (1 - x^2/12 + ...)
        return INV_TWO_PI * (1.0 - x * x / 12.0);
    }
    let s = (0.5 * x).sin();
    2.0 * s * s / (PI * x * x)
}

/// Characteristic function of the density: `max(1 - |u|, 0)`.
pub fn triangle(u: f64) -> f64 {
    (1.0 - u.abs()).max(0.0)
}

/// Envelope `min(1/(2pi), 2/(pi x^2))` dominating [`mu_density`].
fn envelope(x: f64) -> f64 {
    if x.abs() <= 2.0 {
        INV_TWO_PI
    } else {
        2.0 / (PI * x * x)
    }
}

/// One draw from the density by rejection from the envelope.
///
/// The envelope has mass `2/pi` on `[-2, 2]` and `2/pi` on the two tails,
/// so its pieces are picked with probability 1/2 each; the tail `|x| = 2/U`
/// has density proportional to `x^-2` on `[2, inf)`. Acceptance
/// probability is `pi/4`.
pub fn draw_mu<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x = if rng.random::<f64>() < 0.5 {
            4.0 * rng.random::<f64>() - 2.0
        } else {
            let u = 1.0 - rng.random::<f64>(); // (0, 1]
            let mag = 2.0 / u;
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        };
        if rng.random::<f64>() * envelope(x) <= mu_density(x) {
            return x;
        }
    }
}

/// Which law the frequencies are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum AlphaDistribution {
    Mu,
    /// Uniform on `[-h, h]` per coordinate.
    UniformBox {
        half_width: f64,
    },
}

/// Counter-based sampler: draw `k` comes from ChaCha stream `k` of the
/// seed, so draws can be generated in any order or on any thread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSampler {
    pub seed: u64,
    pub counter: u64,
    pub distribution: AlphaDistribution,
}

impl MuSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            counter: 0,
            distribution: AlphaDistribution::Mu,
        }
    }

    pub fn with_distribution(seed: u64, distribution: AlphaDistribution) -> Self {
        Self {
            seed,
            counter: 0,
            distribution,
        }
    }

    fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    fn draw_one(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.distribution {
            AlphaDistribution::Mu => draw_mu(rng),
            AlphaDistribution::UniformBox { half_width } => {
                half_width * (2.0 * rng.random::<f64>() - 1.0)
            }
        }
    }

    /// The `index`-th frequency vector; does not touch the counter.
    pub fn alpha_at(&self, index: u64, r: usize) -> AlphaVector {
        let mut rng = self.stream(index);
        AlphaVector::new((0..r).map(|_| self.draw_one(&mut rng)).collect())
    }

    /// Next frequency vector of `r` independent coordinates.
    pub fn sample_alpha(&mut self, r: usize) -> AlphaVector {
        let a = self.alpha_at(self.counter, r);
        self.counter += 1;
        a
    }

    /// Scalar draws `start..start + n`, each from its own stream.
    pub fn scalars(&self, start: u64, n: usize) -> Vec<f64> {
        crate::par::map_range(n, |i| {
            let mut rng = self.stream(start + i as u64);
            self.draw_one(&mut rng)
        })
    }
}

/// `(1/n) sum_k e^{i u x_k}` as `(re, im)`.
pub fn empirical_charfn(samples: &[f64], u: f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for &x in samples {
        let (s, c) = (u * x).sin_cos();
        re += c;
        im += s;
    }
    (re / n, im / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        assert!((mu_density(0.0) - 0.159_154_943_091_895_35).abs() < 1e-15);
        assert!((mu_density(1e-7) - INV_TWO_PI).abs() < 1e-15);
        assert!((mu_density(PI) - 2.0 / PI.powi(3)).abs() < 1e-15);
        assert!((mu_density(PI) - 0.064_503_068_866_551_4).abs() < 1e-12);
    }

    #[test]
    fn density_is_even_and_enveloped() {
        for i in 1..2000 {
            let x = i as f64 * 0.037;
            let f = mu_density(x);
            assert_eq!(f, mu_density(-x));
            assert!(f <= INV_TWO_PI);
            assert!(f <= 2.0 / (PI * x * x) + 1e-18);
            assert!(f <= envelope(x));
        }
    }

    #[test]
    fn charfn_trivial_cases() {
        assert_eq!(empirical_charfn(&[0.0; 5], 3.3), (1.0, 0.0));
        assert_eq!(empirical_charfn(&[1.0, -4.0, 9.0], 0.0), (1.0, 0.0));
        let (re, im) = empirical_charfn(&[-2.0, 2.0], 0.7);
        assert!((re - (1.4f64).cos()).abs() < 1e-15);
        assert!(im.abs() < 1e-15);
    }

    #[test]
    fn sampler_is_deterministic_and_order_free() {
        let mut a = MuSampler::new(42);
        let first: Vec<AlphaVector> = (0..5).map(|_| a.sample_alpha(3)).collect();
        let b = MuSampler::new(42);
        for (k, v) in first.iter().enumerate().rev() {
            assert_eq!(&b.alpha_at(k as u64, 3), v);
        }
        assert_ne!(MuSampler::new(43).alpha_at(0, 3), first[0]);
        assert_eq!(b.scalars(10, 100), b.scalars(10, 100));
    }

    #[test]
    fn uniform_box_stays_in_box() {
        let s = MuSampler::with_distribution(1, AlphaDistribution::UniformBox { half_width: 3.0 });
        assert!(s.scalars(0, 10_000).iter().all(|x| x.abs() <= 3.0));
    }

    #[test]
    fn charfn_near_triangle() {
        let xs = MuSampler::new(7).scalars(0, 200_000);
        let bound = 3.0 / (xs.len() as f64).sqrt() + 0.005;
        for u in [0.25, 0.5, 0.75, 1.0, 1.5] {
            let (re, im) = empirical_charfn(&xs, u);
            assert!((re - triangle(u)).hypot(im) <= bound, "u={u}: {re} {im}");
        }
    }
}
