//! Generators and independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sur_assoc::ensemble::W_MAX;
use sur_assoc::geometry::{AreaPolygon, PlanarPoint, Ring};
use sur_assoc::osm::Provenance;
use sur_assoc::trainer::{PreparedCandidate, PreparedSample};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn sorted_angles(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // jittered strata keep a minimum angular gap
    let step = TAU / n as f64;
    let phase = rng.random_range(0.0..TAU);
    (0..n)
        .map(|k| phase + step * (k as f64 + rng.random_range(0.1..0.9)))
        .collect()
}

/// Convex polygon: vertices on an ellipse at sorted random angles.
pub fn random_convex(rng: &mut ChaCha8Rng, center: (f64, f64), scale: f64) -> Vec<(f64, f64)> {
    let n = rng.random_range(3..=12);
    let (ax, ay) = (scale * rng.random_range(0.5..1.0), scale * rng.random_range(0.5..1.0));
    sorted_angles(rng, n)
        .into_iter()
        .map(|a| (center.0 + ax * a.cos(), center.1 + ay * a.sin()))
        .collect()
}

/// Star-shaped polygon around `center` with random radii.
pub fn random_star(rng: &mut ChaCha8Rng, center: (f64, f64), scale: f64) -> Vec<(f64, f64)> {
    let n = rng.random_range(5..=16);
    sorted_angles(rng, n)
        .into_iter()
        .map(|a| {
            let r = scale * rng.random_range(0.2..1.0);
            (center.0 + r * a.cos(), center.1 + r * a.sin())
        })
        .collect()
}

/// Convex or star-shaped, sometimes with a small square hole near the center
/// (dropped again if it would cross the outer ring).
pub fn random_polygon(rng: &mut ChaCha8Rng, center: (f64, f64), scale: f64, allow_hole: bool) -> AreaPolygon {
    let outer = if rng.random_bool(0.5) {
        random_convex(rng, center, scale)
    } else {
        random_star(rng, center, scale)
    };
    if allow_hole && rng.random_bool(0.3) {
        let h = scale * 0.04;
        let (cx, cy) = (center.0 + rng.random_range(-h..h), center.1 + rng.random_range(-h..h));
        let hole = [(cx - h, cy - h), (cx - h, cy + h), (cx + h, cy + h), (cx + h, cy - h)];
        if let Ok(p) = AreaPolygon::from_coords(&outer, &[&hole]) {
            return p;
        }
    }
    AreaPolygon::from_coords(&outer, &[]).expect("generated polygon is valid")
}

/// Crossing parity over every ring: an independent even-odd test.
pub fn parity_inside(p: &AreaPolygon, q: (f64, f64)) -> bool {
    let mut inside = false;
    for ring in p.rings() {
        let v = ring.vertices();
        let n = v.len();
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            if (a.y > q.1) != (b.y > q.1) {
                let x = a.x + (q.1 - a.y) * (b.x - a.x) / (b.y - a.y);
                if q.0 < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

fn ring_winding(ring: &Ring, q: (f64, f64)) -> i32 {
    let v = ring.vertices();
    let n = v.len();
    let mut w = 0;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let side = (b.x - a.x) * (q.1 - a.y) - (q.0 - a.x) * (b.y - a.y);
        if a.y <= q.1 {
            if b.y > q.1 && side > 0.0 {
                w += 1;
            }
        } else if b.y <= q.1 && side < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Winding-number containment: inside the outer ring and no hole.
pub fn winding_inside(p: &AreaPolygon, q: (f64, f64)) -> bool {
    ring_winding(p.outer(), q) != 0 && p.holes().iter().all(|h| ring_winding(h, q) == 0)
}

pub fn boundary_distance(p: &AreaPolygon, q: (f64, f64)) -> f64 {
    p.edges()
        .map(|(a, b)| {
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len2 = dx * dx + dy * dy;
            let t = (((q.0 - a.x) * dx + (q.1 - a.y) * dy) / len2).clamp(0.0, 1.0);
            (q.0 - a.x - t * dx).hypot(q.1 - a.y - t * dy)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Crossings of the horizontal line `y` with every edge of `p`, sorted.
fn crossings(p: &AreaPolygon, y: f64, out: &mut Vec<f64>) {
    out.clear();
    for (a, b) in p.edges() {
        if (a.y > y) != (b.y > y) {
            out.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
    }
    out.sort_by(f64::total_cmp);
}

fn inside_count(xs: &[f64], x: f64) -> usize {
    xs.partition_point(|&c| c <= x)
}

/// Monte-Carlo estimate of area(a ∩ b) from `n × n` points, one uniformly
/// placed in each cell of a grid over the overlap of the two bounding boxes
/// (the intersection cannot lie elsewhere). Each row of
/// cells shares a random y so membership reduces to crossing parity along
/// that row.
/// Returns the estimate and the number of sample hits.
pub fn monte_carlo_intersection(a: &AreaPolygon, b: &AreaPolygon, n: usize, rng: &mut ChaCha8Rng) -> (f64, usize) {
    let (alo, ahi) = a.bbox();
    let (blo, bhi) = b.bbox();
    let (x0, y0) = (alo.x.max(blo.x), alo.y.max(blo.y));
    let (x1, y1) = (ahi.x.min(bhi.x), ahi.y.min(bhi.y));
    if x1 <= x0 || y1 <= y0 {
        return (0.0, 0);
    }
    let (cw, ch) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    let mut hits = 0usize;
    for j in 0..n {
        let y = y0 + ch * (j as f64 + rng.random::<f64>());
        crossings(a, y, &mut ca);
        crossings(b, y, &mut cb);
        if ca.is_empty() || cb.is_empty() {
            continue;
        }
        for i in 0..n {
            let x = x0 + cw * (i as f64 + rng.random::<f64>());
            if inside_count(&ca, x) % 2 == 1 && inside_count(&cb, x) % 2 == 1 {
                hits += 1;
            }
        }
    }
    (hits as f64 * cw * ch, hits)
}

pub fn pt(x: f64, y: f64) -> PlanarPoint {
    PlanarPoint::new(x, y)
}

/// The oracle benchmark: classifier `oracle` scores +100 on the true
/// candidate and -100 elsewhere, every other classifier emits uniform noise.
/// The true candidate has R = 1; the others overlap it a little.
pub fn synthetic_benchmark(
    seed: u64,
    samples: usize,
    candidates: usize,
    oracle: usize,
) -> Vec<PreparedSample> {
    let mut rng = rng(seed);
    (0..samples)
        .map(|s| {
            let truth = rng.random_range(0..candidates);
            let cands = (0..candidates)
                .map(|c| {
                    let mut scores: [f64; 8] = std::array::from_fn(|_| rng.random_range(-100.0..=100.0));
                    scores[oracle] = if c == truth { 100.0 } else { -100.0 };
                    PreparedCandidate {
                        provenance: Provenance::Way { id: (s * candidates + c) as i64 },
                        scores,
                        contains: rng.random_bool(0.3),
                        area: rng.random_range(100.0..10_000.0),
                        centroid_distance: rng.random_range(0.0..500.0),
                        ratio: if c == truth { 1.0 } else { rng.random_range(0.0..0.3) },
                    }
                })
                .collect();
            PreparedSample::new(format!("synthetic-{s}"), cands)
        })
        .collect()
}

pub fn random_weights(rng: &mut ChaCha8Rng) -> [f64; 8] {
    loop {
        let w: [f64; 8] = std::array::from_fn(|_| {
            if rng.random_bool(0.25) {
                0.0
            } else {
                rng.random_range(0.0..W_MAX)
            }
        });
        if w.iter().any(|&x| x > 0.0) {
            return w;
        }
    }
}
