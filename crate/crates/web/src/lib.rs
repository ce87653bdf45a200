//! Browser bindings: the truncated sign expansion, one path of the
//! counterexample martingale, and the law of its clock `T = <M>_1`.
//!
//! Every export returns a JSON string.

use chaoslab::chaos_algebra::{sign_coefficient, sign_partial_norm};
use chaoslab::experiments::closed_form_martingale;
use chaoslab::path_sim::{sample_path, scaled_hermite};
use chaoslab::{Result, RngStream};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Stream tag of the demo, disjoint from the experiment tags.
const DEMO_TAG: u16 = 100;
const MAX_TRUNC: usize = 40;
const MAX_STEPS: usize = 1 << 14;
const MAX_PATHS: usize = 20_000;

#[derive(Debug, Serialize)]
pub struct SignCurve {
    pub x: Vec<f64>,
    /// `sum_{k<=K} b_{2k+1} He_{2k+1}(x)`.
    pub partial: Vec<f64>,
    /// `S_0, ..., S_K`.
    pub norms: Vec<f64>,
}

pub fn sign_curve(k_max: usize, points: usize, span: f64) -> SignCurve {
    let k_max = k_max.min(MAX_TRUNC);
    let points = points.clamp(2, 4096);
    let coeffs: Vec<f64> = (0..=k_max).map(sign_coefficient).collect();
    let mut he = Vec::new();
    let x: Vec<f64> = (0..points).map(|i| -span + 2.0 * span * i as f64 / (points - 1) as f64).collect();
    let partial = x
        .iter()
        .map(|&v| {
            scaled_hermite(v, 1.0, 2 * k_max + 1, &mut he);
            coeffs.iter().enumerate().map(|(k, b)| b * he[2 * k + 1]).sum()
        })
        .collect();
    SignCurve { x, partial, norms: (0..=k_max).map(sign_partial_norm).collect() }
}

#[derive(Debug, Serialize)]
pub struct PathView {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub m: Vec<f64>,
    pub bracket: Vec<f64>,
    pub x: f64,
    pub clock: f64,
}

pub fn counterexample_path(seed: u64, index: u64, steps: usize) -> Result<PathView> {
    let steps = (steps.clamp(2, MAX_STEPS) + 1) & !1;
    let path = sample_path(&mut RngStream::tagged(seed, DEMO_TAG, index), steps)?;
    let c = closed_form_martingale(&path)?;
    Ok(PathView {
        t: (0..=steps).map(|i| path.time(i)).collect(),
        w: path.values().to_vec(),
        m: c.martingale.values().to_vec(),
        bracket: c.martingale.bracket().to_vec(),
        x: c.x,
        clock: c.martingale.total_bracket(),
    })
}

#[derive(Debug, Serialize)]
pub struct ClockHistogram {
    /// Left edges; the last bin also holds everything beyond `max_t`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub paths: usize,
    pub mean: f64,
    pub mean_x2: f64,
    pub frac_above_one: f64,
}

pub fn clock_histogram(seed: u64, paths: usize, steps: usize, bins: usize, max_t: f64) -> Result<ClockHistogram> {
    let paths = paths.clamp(1, MAX_PATHS);
    let bins = bins.clamp(1, 200);
    let steps = (steps.clamp(2, MAX_STEPS) + 1) & !1;
    let width = max_t / bins as f64;
    let mut counts = vec![0; bins];
    let (mut sum, mut sum_x2, mut above) = (0.0, 0.0, 0usize);
    for i in 0..paths {
        let path = sample_path(&mut RngStream::tagged(seed, DEMO_TAG + 1, i as u64), steps)?;
        let c = closed_form_martingale(&path)?;
        let t = c.martingale.total_bracket();
        counts[((t / width) as usize).min(bins - 1)] += 1;
        sum += t;
        sum_x2 += c.x * c.x;
        above += usize::from(t > 1.0);
    }
    let n = paths as f64;
    Ok(ClockHistogram {
        edges: (0..bins).map(|b| b as f64 * width).collect(),
        counts,
        paths,
        mean: sum / n,
        mean_x2: sum_x2 / n,
        frac_above_one: above as f64 / n,
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())))
}

#[wasm_bindgen(js_name = signCurve)]
pub fn sign_curve_js(k_max: usize, points: usize, span: f64) -> std::result::Result<String, JsValue> {
    to_js(Ok(sign_curve(k_max, points, span)))
}

#[wasm_bindgen(js_name = counterexamplePath)]
pub fn counterexample_path_js(seed: u64, index: u64, steps: usize) -> std::result::Result<String, JsValue> {
    to_js(counterexample_path(seed, index, steps))
}

#[wasm_bindgen(js_name = clockHistogram)]
pub fn clock_histogram_js(
    seed: u64,
    paths: usize,
    steps: usize,
    bins: usize,
    max_t: f64,
) -> std::result::Result<String, JsValue> {
    to_js(clock_histogram(seed, paths, steps, bins, max_t))
}
