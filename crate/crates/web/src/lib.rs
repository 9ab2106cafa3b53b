//! Browser bindings for three interactive views: the Selberg majorant and
//! minorant around a window, pair correlation against `s`, and a histogram
//! of draws from the averaging measure.
//!
//! Each view is a plain function returning a flat `Vec<f64>`; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use finescale_core::mu::{mu_density, MuSampler};
use finescale_core::selberg::{build_selberg, eval_trig, window_indicator, Sign};
use finescale_core::sequences::VectorSequenceSpec;
use finescale_core::statistics::{pair_correlation, project_values};
use wasm_bindgen::prelude::*;

/// Lattice cap for the pair-correlation view, to keep the page responsive.
pub const MAX_POINTS: u128 = 250_000;

/// Rows `x, indicator, minus, plus` for `points` equispaced `x` in `[0, 1)`.
pub fn selberg_rows(s: f64, delta: f64, k: usize, points: usize) -> Result<Vec<f64>, String> {
    let plus = build_selberg(s, delta, k, Sign::Plus).map_err(|e| e.to_string())?;
    let minus = build_selberg(s, delta, k, Sign::Minus).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * points);
    for i in 0..points {
        let x = i as f64 / points as f64;
        out.extend([
            x,
            window_indicator(plus.half_width, x),
            eval_trig(&minus, x),
            eval_trig(&plus, x),
        ]);
    }
    Ok(out)
}

/// `R2(s)` at `steps` values of `s` in `(0, s_max]` for draw `draw` of the
/// seeded sampler. The first entries are the alpha used.
pub fn ppc_curve(
    spec_json: &str,
    seed: u64,
    draw: u64,
    s_max: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    let spec: VectorSequenceSpec = serde_json::from_str(spec_json).map_err(|e| e.to_string())?;
    spec.validate().map_err(|e| e.to_string())?;
    if spec.lattice_size() > MAX_POINTS {
        return Err(format!(
            "(N+1)^r = {} exceeds {MAX_POINTS}",
            spec.lattice_size()
        ));
    }
    let alpha = MuSampler::new(seed).alpha_at(draw, spec.r);
    let proj = project_values(&spec, &alpha).map_err(|e| e.to_string())?;
    let s_grid: Vec<f64> = (1..=steps)
        .map(|i| s_max * i as f64 / steps as f64)
        .collect();
    let rep = pair_correlation(&proj, spec.n, spec.r, &s_grid).map_err(|e| e.to_string())?;
    let mut out = alpha.coords;
    out.extend(rep.r2_values);
    Ok(out)
}

/// Normalized histogram of `samples` draws on `[-range, range]` in `bins`
/// bins, followed by the exact density at the bin centres. Draws outside
/// the range are dropped from the counts but not from the normalization.
pub fn mu_histogram(
    seed: u64,
    samples: usize,
    bins: usize,
    range: f64,
) -> Result<Vec<f64>, String> {
    if bins == 0 || samples == 0 || range.is_nan() || range <= 0.0 {
        return Err("bins, samples and range must be positive".into());
    }
    let width = 2.0 * range / bins as f64;
    let mut counts = vec![0.0; bins];
    for x in MuSampler::new(seed).scalars(0, samples) {
        let b = ((x + range) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1.0;
        }
    }
    let scale = 1.0 / (samples as f64 * width);
    let mut out: Vec<f64> = counts.iter().map(|c| c * scale).collect();
    out.extend((0..bins).map(|i| mu_density(-range + (i as f64 + 0.5) * width)));
    Ok(out)
}

#[wasm_bindgen(js_name = selbergRows)]
pub fn selberg_rows_js(s: f64, delta: f64, k: usize, points: usize) -> Result<Vec<f64>, JsValue> {
    selberg_rows(s, delta, k, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = ppcCurve)]
pub fn ppc_curve_js(
    spec_json: &str,
    seed: u64,
    draw: u64,
    s_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsValue> {
    ppc_curve(spec_json, seed, draw, s_max, steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = muHistogram)]
pub fn mu_histogram_js(
    seed: u64,
    samples: usize,
    bins: usize,
    range: f64,
) -> Result<Vec<f64>, JsValue> {
    mu_histogram(seed, samples, bins, range).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selberg_rows_sandwich() {
        let rows = selberg_rows(1.0, 16.0, 31, 512).unwrap();
        assert_eq!(rows.len(), 4 * 512);
        for r in rows.chunks(4) {
            assert!(r[2] <= r[1] + 1e-12 && r[1] <= r[3] + 1e-12, "{r:?}");
        }
        assert!(selberg_rows(1.0, 1.0, 4, 8).is_err());
    }

    #[test]
    fn ppc_curve_shape() {
        let spec = r#"{"r":2,"N":40,"components":[{"kind":"Power","theta":1.5},{"kind":"Power","theta":1.3}]}"#;
        let out = ppc_curve(spec, 2024, 0, 2.0, 20).unwrap();
        assert_eq!(out.len(), 2 + 20);
        let r2 = &out[2..];
        assert!(r2.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(out, ppc_curve(spec, 2024, 0, 2.0, 20).unwrap());
        assert!(ppc_curve("{}", 1, 0, 1.0, 4).is_err());
        let big = r#"{"r":2,"N":1000,"components":[{"kind":"Power","theta":1.5},{"kind":"Power","theta":1.3}]}"#;
        assert!(ppc_curve(big, 1, 0, 1.0, 4).is_err());
    }

    #[test]
    fn histogram_tracks_density() {
        let bins = 40;
        let out = mu_histogram(7, 200_000, bins, 10.0).unwrap();
        let (hist, dens) = out.split_at(bins);
        let width = 20.0 / bins as f64;
        let mass: f64 = hist.iter().sum::<f64>() * width;
        assert!(mass < 1.0 && mass > 0.9, "{mass}");
        for (h, d) in hist.iter().zip(dens) {
            assert!((h - d).abs() < 0.01, "{h} vs {d}");
        }
        assert!(mu_histogram(7, 10, 0, 1.0).is_err());
    }
}
