//! Deterministic synthetic map: an irregular continent with a lake, a
//! narrow water channel and an offshore island, plus two capacity frames.

use kpp_core::domain::{CapacityFrame, GridSpec, MapMask};

use crate::error::Result;

pub const NX: usize = 100;
pub const NY: usize = 50;
pub const DX: f64 = 0.4;

/// Cell center in unit-square coordinates `(a, b)`, `a` eastwards, `b` southwards.
fn unit(grid: &GridSpec, row: usize, col: usize) -> (f64, f64) {
    ((col as f64 + 0.5) / grid.nx as f64, (row as f64 + 0.5) / grid.ny as f64)
}

fn is_land(a: f64, b: f64) -> bool {
    use std::f64::consts::PI;
    let (ea, eb) = ((a - 0.5) / 0.46, (b - 0.5) / 0.44);
    let coast = 1.0 + 0.12 * (6.0 * PI * a).sin() * (4.0 * PI * b).cos();
    let continent = ea * ea + eb * eb <= coast;
    let lake = ((a - 0.62) / 0.05).powi(2) + ((b - 0.6) / 0.1).powi(2) < 1.0;
    let channel = (a - 0.3).abs() < 0.015 && b < 0.45;
    let island = ((a - 0.93) / 0.03).powi(2) + ((b - 0.1) / 0.06).powi(2) < 1.0;
    (continent && !lake && !channel) || island
}

pub fn mask(grid: GridSpec) -> MapMask {
    let cells = (0..grid.ny)
        .flat_map(|row| (0..grid.nx).map(move |col| (row, col)))
        .map(|(row, col)| {
            let (a, b) = unit(&grid, row, col);
            is_land(a, b)
        })
        .collect();
    MapMask::new(grid, cells).expect("mask sized to its grid")
}

/// Early frame: patchy capacity in `[0.25, 1]` on land.
pub fn early_frame(mask: &MapMask, time: f64) -> Result<CapacityFrame> {
    use std::f64::consts::PI;
    frame(mask, time, |a, b| 0.25 + 0.75 * (0.5 + 0.5 * (3.0 * PI * a).sin() * (2.0 * PI * b).cos()))
}

/// Late frame: west-to-east gradient in `[0.1, 1]` on land.
pub fn late_frame(mask: &MapMask, time: f64) -> Result<CapacityFrame> {
    frame(mask, time, |a, _| 0.1 + 0.9 * a)
}

fn frame(mask: &MapMask, time: f64, k: impl Fn(f64, f64) -> f64) -> Result<CapacityFrame> {
    let g = *mask.grid();
    let values = (0..g.ny)
        .flat_map(|row| (0..g.nx).map(move |col| (row, col)))
        .map(|(row, col)| {
            if mask.is_habitable(row, col) {
                let (a, b) = unit(&g, row, col);
                k(a, b).clamp(f64::MIN_POSITIVE, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(CapacityFrame::new(g, time, values)?)
}

/// Land cell nearest to the western interior, used as the default seed.
pub fn seed_cell(mask: &MapMask) -> Option<(usize, usize)> {
    let g = *mask.grid();
    let target = (0.2, 0.5);
    (0..g.ny)
        .flat_map(|row| (0..g.nx).map(move |col| (row, col)))
        .filter(|&(row, col)| mask.is_habitable(row, col))
        .min_by(|&(r1, c1), &(r2, c2)| {
            let d = |r, c| {
                let (a, b) = unit(&g, r, c);
                (a - target.0).powi(2) + (b - target.1).powi(2)
            };
            d(r1, c1).total_cmp(&d(r2, c2))
        })
}
