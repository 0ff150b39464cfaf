//! Indoor/outdoor guess from a coarse color grid.
//!
//! Outdoor evidence is the share of sky-like cells in the top grid row plus
//! the share of vegetation-green cells over the whole grid.

use std::path::Path;

use image::{DynamicImage, GenericImageView};

use super::rules::IndoorOutdoorConstants;
use super::IndoorOutdoor;

#[derive(Debug, Clone, Copy)]
struct CellColor {
    r: f64,
    g: f64,
    b: f64,
}

impl CellColor {
    fn brightness(&self) -> f64 {
        (self.r + self.g + self.b) / 3.0
    }

    fn spread(&self) -> f64 {
        self.r.max(self.g).max(self.b) - self.r.min(self.g).min(self.b)
    }
}

fn grid_means(img: &DynamicImage, grid: u32) -> Option<Vec<Vec<CellColor>>> {
    let (w, h) = img.dimensions();
    if grid == 0 || w < grid || h < grid {
        return None;
    }
    let rgb = img.to_rgb8();
    let mut cells = Vec::with_capacity(grid as usize);
    for row in 0..grid {
        let (y0, y1) = (row * h / grid, (row + 1) * h / grid);
        let mut line = Vec::with_capacity(grid as usize);
        for col in 0..grid {
            let (x0, x1) = (col * w / grid, (col + 1) * w / grid);
            let (mut r, mut g, mut b) = (0u64, 0u64, 0u64);
            for y in y0..y1 {
                for x in x0..x1 {
                    let p = rgb.get_pixel(x, y);
                    r += p[0] as u64;
                    g += p[1] as u64;
                    b += p[2] as u64;
                }
            }
            let n = ((x1 - x0) * (y1 - y0)) as f64 * 255.0;
            line.push(CellColor {
                r: r as f64 / n,
                g: g as f64 / n,
                b: b as f64 / n,
            });
        }
        cells.push(line);
    }
    Some(cells)
}

/// Fraction-based outdoor evidence in [0, 2].
pub fn outdoor_evidence(img: &DynamicImage, k: &IndoorOutdoorConstants) -> Option<f64> {
    let cells = grid_means(img, k.grid)?;
    let m = k.dominance_margin;
    let sky = |c: &CellColor| {
        let blue = c.brightness() >= k.sky_min_brightness && c.b >= c.r + m && c.b >= c.g - m;
        let white = c.brightness() >= k.white_min_brightness && c.spread() <= k.white_max_spread;
        blue || white
    };
    let green = |c: &CellColor| c.g >= c.r + m && c.g >= c.b + m && c.brightness() >= 0.1;
    let top = &cells[0];
    let sky_share = top.iter().filter(|c| sky(c)).count() as f64 / top.len() as f64;
    let total = (k.grid * k.grid) as f64;
    let green_share = cells.iter().flatten().filter(|c| green(c)).count() as f64 / total;
    Some(sky_share + green_share)
}

pub fn classify_image(img: &DynamicImage, k: &IndoorOutdoorConstants) -> IndoorOutdoor {
    match outdoor_evidence(img, k) {
        Some(e) if e > k.outside_above => IndoorOutdoor::Outside,
        Some(e) if e < k.inside_below => IndoorOutdoor::Inside,
        _ => IndoorOutdoor::Unknown,
    }
}

/// Classify the image at `path`; a missing path or undecodable file is
/// `Unknown`.
pub fn classify_indoor_outdoor(path: Option<&Path>, k: &IndoorOutdoorConstants) -> IndoorOutdoor {
    let Some(path) = path else {
        return IndoorOutdoor::Unknown;
    };
    match image::open(path) {
        Ok(img) => classify_image(&img, k),
        Err(e) => {
            log::warn!("cannot decode {}: {e}", path.display());
            IndoorOutdoor::Unknown
        }
    }
}
