//! Area of the boolean intersection of two polygons with holes.
//!
//! A region with holes has the indicator `1_outer - sum(1_hole)`, so the
//! intersection area expands into signed intersection areas of simple ring
//! pairs. Each ring pair is measured by integrating `x dy - y dx` over the
//! boundary of the overlap, which consists of the stretches of each ring's
//! boundary lying inside the other ring. Stretches shared by both boundaries
//! count once when both rings run the same way along them and not at all when
//! they run opposite ways.

use std::cmp::Ordering;

use super::{AreaPolygon, PlanarPoint, Ring, SLIVER_AREA_EPS};

/// Area of `a ∩ b` in square meters, holes respected.
///
/// Symmetric in its arguments, zero for disjoint inputs, and bounded by the
/// smaller of the two areas. Results below [`SLIVER_AREA_EPS`] are zero.
pub fn intersection_area(a: &AreaPolygon, b: &AreaPolygon) -> f64 {
    let (a, b) = if canonical_order(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    let (alo, ahi) = a.bbox();
    let (blo, bhi) = b.bbox();
    if alo.x > bhi.x || blo.x > ahi.x || alo.y > bhi.y || blo.y > ahi.y {
        return 0.0;
    }

    let anchor = a.outer().vertices()[0];
    let prepare = |p: &AreaPolygon| -> Vec<(Vec<PlanarPoint>, f64)> {
        let local = |r: &Ring| -> Vec<PlanarPoint> {
            r.to_ccw().vertices().iter().map(|v| v.sub(&anchor)).collect()
        };
        std::iter::once((local(p.outer()), 1.0))
            .chain(p.holes().iter().map(|h| (local(h), -1.0)))
            .collect()
    };
    let ra = prepare(a);
    let rb = prepare(b);

    let mut total = 0.0;
    for (pa, sa) in &ra {
        for (pb, sb) in &rb {
            total += sa * sb * ring_pair_area(pa, pb);
        }
    }
    let total = total.clamp(0.0, a.area().min(b.area()));
    if total < SLIVER_AREA_EPS {
        0.0
    } else {
        total
    }
}

fn canonical_order(a: &AreaPolygon, b: &AreaPolygon) -> Ordering {
    let key = |p: &AreaPolygon| {
        let v = p.outer().vertices()[0];
        (p.area(), v.x, v.y, p.outer().len(), p.holes().len())
    };
    let (ka, kb) = (key(a), key(b));
    ka.0.total_cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.total_cmp(&kb.2))
        .then(ka.3.cmp(&kb.3))
        .then(ka.4.cmp(&kb.4))
}

fn bounds(v: &[PlanarPoint]) -> (PlanarPoint, PlanarPoint) {
    v.iter().fold(
        (
            PlanarPoint::new(f64::INFINITY, f64::INFINITY),
            PlanarPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        ),
        |(lo, hi), p| {
            (
                PlanarPoint::new(lo.x.min(p.x), lo.y.min(p.y)),
                PlanarPoint::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        },
    )
}

/// Intersection area of two counter-clockwise simple rings.
fn ring_pair_area(p: &[PlanarPoint], q: &[PlanarPoint]) -> f64 {
    let (plo, phi) = bounds(p);
    let (qlo, qhi) = bounds(q);
    if plo.x > qhi.x || qlo.x > phi.x || plo.y > qhi.y || qlo.y > phi.y {
        return 0.0;
    }
    let extent = (phi.x - plo.x)
        .max(phi.y - plo.y)
        .max(qhi.x - qlo.x)
        .max(qhi.y - qlo.y)
        .max(plo.x.abs().max(phi.x.abs()).max(plo.y.abs()).max(phi.y.abs()));
    let eps = 1e-9 * (1.0 + extent);
    let twice = boundary_inside(p, q, true, eps) + boundary_inside(q, p, false, eps);
    (twice / 2.0).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Location {
    Inside,
    Outside,
    SharedSame,
    SharedOpposite,
}

/// Twice the signed area contributed by the parts of `src`'s boundary inside
/// `other`. Shared stretches are included only when `keep_shared` is set and
/// both rings traverse them in the same direction.
fn boundary_inside(src: &[PlanarPoint], other: &[PlanarPoint], keep_shared: bool, eps: f64) -> f64 {
    let n = src.len();
    let m = other.len();
    let mut twice = 0.0;
    let mut params: Vec<f64> = Vec::new();
    for i in 0..n {
        let u = src[i];
        let v = src[(i + 1) % n];
        let d = v.sub(&u);
        let len2 = d.dot(&d);
        let len = len2.sqrt();
        params.clear();
        params.push(0.0);
        params.push(1.0);
        for j in 0..m {
            let c = other[j];
            let e = other[(j + 1) % m];
            let f = e.sub(&c);
            let flen = f.norm();
            let denom = d.cross(&f);
            let cu = c.sub(&u);
            if denom.abs() <= 1e-12 * len * flen {
                if (cu.cross(&d) / len).abs() <= eps {
                    for w in [c, e] {
                        let t = w.sub(&u).dot(&d) / len2;
                        if t > 0.0 && t < 1.0 {
                            params.push(t);
                        }
                    }
                }
                continue;
            }
            let t = cu.cross(&f) / denom;
            let s = cu.cross(&d) / denom;
            let slack = eps / flen.max(eps);
            if t > 0.0 && t < 1.0 && s >= -slack && s <= 1.0 + slack {
                params.push(t);
            }
        }
        params.sort_by(f64::total_cmp);
        params.dedup_by(|x, y| (*x - *y).abs() * len <= eps);
        if *params.last().unwrap() != 1.0 {
            // dedup may have folded the endpoint into a near neighbour
            *params.last_mut().unwrap() = 1.0;
        }
        for w in params.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 <= t0 {
                continue;
            }
            let p0 = PlanarPoint::new(u.x + d.x * t0, u.y + d.y * t0);
            let p1 = PlanarPoint::new(u.x + d.x * t1, u.y + d.y * t1);
            let mid = PlanarPoint::new((p0.x + p1.x) / 2.0, (p0.y + p1.y) / 2.0);
            let include = match locate(&mid, &d, other, eps) {
                Location::Inside => true,
                Location::SharedSame => keep_shared,
                Location::SharedOpposite | Location::Outside => false,
            };
            if include {
                twice += p0.cross(&p1);
            }
        }
    }
    twice
}

fn locate(q: &PlanarPoint, dir: &PlanarPoint, ring: &[PlanarPoint], eps: f64) -> Location {
    let m = ring.len();
    let mut best = f64::INFINITY;
    let mut best_dir = PlanarPoint::default();
    let mut inside = false;
    for j in 0..m {
        let a = ring[j];
        let b = ring[(j + 1) % m];
        let dist = super::point_segment_distance(q, &a, &b);
        if dist < best {
            best = dist;
            best_dir = b.sub(&a);
        }
        if (a.y > q.y) != (b.y > q.y) {
            let x_at = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if q.x < x_at {
                inside = !inside;
            }
        }
    }
    if best <= eps {
        if best_dir.dot(dir) > 0.0 {
            Location::SharedSame
        } else {
            Location::SharedOpposite
        }
    } else if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x0: f64, y0: f64, s: f64) -> AreaPolygon {
        AreaPolygon::from_coords(&[(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)], &[]).unwrap()
    }

    #[test]
    fn closed_form_cases() {
        let u = sq(0.0, 0.0, 1.0);
        assert!((intersection_area(&u, &u) - 1.0).abs() < 1e-12);
        assert!((intersection_area(&u, &sq(0.5, 0.0, 1.0)) - 0.5).abs() < 1e-12);
        assert_eq!(intersection_area(&u, &sq(2.0, 2.0, 1.0)), 0.0);
        assert!((intersection_area(&u, &sq(-0.5, -0.5, 2.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_touching_squares_do_not_overlap() {
        let u = sq(0.0, 0.0, 1.0);
        assert_eq!(intersection_area(&u, &sq(1.0, 0.0, 1.0)), 0.0);
        assert_eq!(intersection_area(&u, &sq(1.0, 1.0, 1.0)), 0.0);
        assert_eq!(intersection_area(&u, &sq(1.0, 0.5, 1.0)), 0.0);
    }

    #[test]
    fn reversed_orientation_is_irrelevant() {
        let a = sq(0.0, 0.0, 2.0);
        let b = AreaPolygon::simple(sq(1.0, 1.0, 2.0).outer().reversed()).unwrap();
        assert!((intersection_area(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holes_are_respected() {
        let donut = AreaPolygon::from_coords(
            &[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)],
            &[&[(4.0, 4.0), (6.0, 4.0), (6.0, 6.0), (4.0, 6.0)]],
        )
        .unwrap();
        assert!((intersection_area(&donut, &donut) - 96.0).abs() < 1e-9);
        // fully inside the hole
        assert_eq!(intersection_area(&donut, &sq(4.5, 4.5, 1.0)), 0.0);
        // half over the hole
        assert!((intersection_area(&donut, &sq(3.0, 4.0, 2.0)) - 2.0).abs() < 1e-9);
        // two donuts with identical holes offset by one
        let other = donut.translate(1.0, 0.0);
        // outer overlap 90, minus both holes (4 each) inside it, plus hole overlap 2
        assert!((intersection_area(&donut, &other) - (90.0 - 8.0 + 2.0)).abs() < 1e-9);
    }

    #[test]
    fn concave_shapes() {
        // U shape with the opening at the top, square filling the gap
        let u = AreaPolygon::from_coords(
            &[(0.0, 0.0), (3.0, 0.0), (3.0, 3.0), (2.0, 3.0), (2.0, 1.0), (1.0, 1.0), (1.0, 3.0), (0.0, 3.0)],
            &[],
        )
        .unwrap();
        assert_eq!(intersection_area(&u, &sq(1.0, 1.0, 1.0)), 0.0);
        assert!((intersection_area(&u, &sq(0.0, 2.0, 3.0)) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_exactly() {
        let a = AreaPolygon::from_coords(&[(0.0, 0.0), (3.0, 0.3), (2.5, 2.0), (0.2, 2.7)], &[]).unwrap();
        let b = AreaPolygon::from_coords(&[(1.0, -1.0), (4.0, 1.0), (1.5, 3.0)], &[]).unwrap();
        assert_eq!(intersection_area(&a, &b), intersection_area(&b, &a));
    }
}
