//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Everything crosses the boundary as numbers, byte buffers or JSON strings,
//! so the page needs no bundler.

use ellcorr_core::report::{fuchs_records, row_record, SuiteConfig};
use ellcorr_core::weierstrass::{EllipticInvariants, WeierstrassP};
use ellcorr_core::{c64, Complex};
use wasm_bindgen::prelude::*;

/// RGBA domain colouring of `℘(z; g₂, g₃)` on the square `|Re z|, |Im z| ≤ half`.
/// Hue is the argument, brightness cycles with `log₂|℘|`; points too close
/// to a lattice pole are painted white.
#[wasm_bindgen]
pub fn wp_field(g2_re: f64, g2_im: f64, g3_re: f64, g3_im: f64, size: u32, half: f64) -> Vec<u8> {
    let wp = WeierstrassP::new(EllipticInvariants::new(
        c64(g2_re, g2_im),
        c64(g3_re, g3_im),
    ));
    let n = size.max(1) as usize;
    let step = 2.0 * half / n as f64;
    let mut px = Vec::with_capacity(n * n * 4);
    for row in 0..n {
        let y = half - (row as f64 + 0.5) * step;
        for col in 0..n {
            let x = -half + (col as f64 + 0.5) * step;
            let rgb = match wp.wp(c64(x, y)) {
                Ok(w) if w.is_finite() => colour(w),
                _ => [255, 255, 255],
            };
            px.extend_from_slice(&[rgb[0], rgb[1], rgb[2], 255]);
        }
    }
    px
}

fn colour(w: Complex) -> [u8; 3] {
    let hue = (w.arg() / std::f64::consts::TAU).rem_euclid(1.0);
    let shade = w.norm().max(1e-300).log2().rem_euclid(1.0);
    hsv(hue, 0.85, 0.55 + 0.45 * shade)
}

fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let i = (h * 6.0).floor();
    let f = h * 6.0 - i;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - f * s), v * (1.0 - (1.0 - f) * s));
    let (r, g, b) = match i as i32 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r, g, b].map(|c| (c * 255.0).round() as u8)
}

fn config(samples: u32, seed: u64) -> SuiteConfig {
    SuiteConfig {
        samples: samples.max(1) as usize,
        seed,
        ..SuiteConfig::default()
    }
}

/// JSON array with one residual record per canonical row.
#[wasm_bindgen]
pub fn row_residuals(samples: u32, seed: u64, tol: f64) -> String {
    let cfg = SuiteConfig {
        tol,
        ..config(samples, seed)
    };
    let recs: Vec<_> = (1..=6).map(|i| row_record(&cfg, i)).collect();
    serde_json::to_string(&recs).expect("records serialize")
}

/// JSON array of dominant balances and Fuchs indices for one row.
#[wasm_bindgen]
pub fn fuchs_indices(row: u32) -> String {
    let row = row as usize;
    if !(1..=6).contains(&row) {
        return "[]".into();
    }
    serde_json::to_string(&fuchs_records(&config(32, 42), row)).expect("records serialize")
}
