//! Text exports: plain PGM (P2) rasters and CSV tables.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;

use crate::geometry::GridSet;
use crate::rb::SampledFunction;
use crate::tensor::TensorSurface;

/// One pixel per cell, 255 for members, 0 otherwise; the top row is the largest `y`.
pub fn grid_set_pgm(set: &GridSet) -> String {
    let (nx, ny) = set.dims();
    let mut out = format!("P2\n{nx} {ny}\n255\n");
    for j in (0..ny).rev() {
        let row: Vec<&str> = (0..nx).map(|i| if set.contains(i, j) { "255" } else { "0" }).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// `x,y` rows of member cell centers in row-major order.
pub fn grid_set_csv(set: &GridSet) -> String {
    let mut out = String::from("x,y\n");
    for [x, y] in set.centers() {
        writeln!(out, "{x},{y}").unwrap();
    }
    out
}

/// `x,value` rows of a sampled function.
pub fn sampled_csv(f: &SampledFunction) -> String {
    let mut out = String::from("x,value\n");
    for (k, v) in f.values().iter().enumerate() {
        writeln!(out, "{},{v}", f.x(k)).unwrap();
    }
    out
}

/// One line per `x_i`, comma-separated values over `y_j`.
pub fn surface_csv(s: &TensorSurface) -> String {
    let (nx, _) = s.dims();
    let mut out = String::new();
    for i in 0..nx {
        let row: Vec<String> = s.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Heightmap of a surface and the sidecar text describing the gray-level mapping.
///
/// Columns follow `x`, rows follow `y` with the largest `y` on top. Gray
/// levels are `round(255·(v − min)/(max − min))`, or 0 for a constant surface.
pub fn surface_pgm(s: &TensorSurface) -> (String, String) {
    let (nx, ny) = s.dims();
    let (min, max) = s
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = max - min;
    let gray = |v: f64| -> u32 {
        if span > 0.0 {
            (255.0 * (v - min) / span).round() as u32
        } else {
            0
        }
    };
    let mut pgm = format!("P2\n{nx} {ny}\n255\n");
    for j in (0..ny).rev() {
        let row: Vec<String> = (0..nx).map(|i| gray(s.get(i, j)).to_string()).collect();
        pgm.push_str(&row.join(" "));
        pgm.push('\n');
    }
    let mut side = String::new();
    writeln!(side, "min = {min}").unwrap();
    writeln!(side, "max = {max}").unwrap();
    writeln!(side, "gray = round(255 * (value - min) / (max - min))").unwrap();
    writeln!(side, "x_range = {} {}", s.x_range.0, s.x_range.1).unwrap();
    writeln!(side, "y_range = {} {}", s.y_range.0, s.y_range.1).unwrap();
    writeln!(side, "columns = {nx}").unwrap();
    writeln!(side, "rows = {ny}").unwrap();
    (pgm, side)
}
