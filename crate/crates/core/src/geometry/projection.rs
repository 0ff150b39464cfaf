//! WGS84 coordinates and the local equirectangular frame used for all metric math.

use serde::{Deserialize, Serialize};

use super::{GeometryError, PlanarPoint};

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Largest coordinate offset (degrees) from the projection origin that the
/// local frame accepts.
pub const LOCAL_RANGE_DEG: f64 = 1.0;

/// A WGS84 coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeometryError> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(GeometryError::InvalidInput(format!(
                "non-finite coordinate ({lat}, {lon})"
            )));
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeometryError::InvalidInput(format!(
                "latitude {lat} outside [-90, 90]"
            )));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(GeometryError::InvalidInput(format!(
                "longitude {lon} outside [-180, 180]"
            )));
        }
        Ok(Self { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    /// Whether `other` is close enough to serve in this point's local frame.
    pub fn within_local_range(&self, other: &GeoPoint) -> bool {
        (other.lat - self.lat).abs() < LOCAL_RANGE_DEG
            && (other.lon - self.lon).abs() < LOCAL_RANGE_DEG
    }
}

fn meters_per_degree() -> f64 {
    EARTH_RADIUS_M * std::f64::consts::PI / 180.0
}

/// Project `p` into the equirectangular frame centered on `origin`.
pub fn project(origin: GeoPoint, p: GeoPoint) -> Result<PlanarPoint, GeometryError> {
    if !origin.within_local_range(&p) {
        return Err(GeometryError::OutOfLocalRange {
            lat: p.lat,
            lon: p.lon,
        });
    }
    let k = meters_per_degree();
    let x = (p.lon - origin.lon) * origin.lat.to_radians().cos() * k;
    let y = (p.lat - origin.lat) * k;
    Ok(PlanarPoint::new(x, y))
}

/// Inverse of [`project`].
pub fn unproject(origin: GeoPoint, q: PlanarPoint) -> GeoPoint {
    let k = meters_per_degree();
    let lat = origin.lat + q.y / k;
    let cos = origin.lat.to_radians().cos();
    // At the poles every x collapses onto the origin meridian.
    let lon = if cos.abs() < 1e-12 {
        origin.lon
    } else {
        origin.lon + q.x / (cos * k)
    };
    GeoPoint {
        lat: lat.clamp(-90.0, 90.0),
        lon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn origin_maps_to_zero() {
        let o = gp(53.55, 9.99);
        let q = project(o, o).unwrap();
        assert_eq!((q.x, q.y), (0.0, 0.0));
    }

    #[test]
    fn equator_thousandth_degree() {
        let q = project(gp(0.0, 0.0), gp(0.0, 0.001)).unwrap();
        let expected = 0.001 * std::f64::consts::PI / 180.0 * 6_371_000.0;
        assert!((q.x - expected).abs() < 1e-9);
        assert!((q.x - 111.19).abs() < 0.01);
        assert_eq!(q.y, 0.0);
    }

    #[test]
    fn sixty_degrees_halves_x() {
        let q = project(gp(60.0, 0.0), gp(60.0, 0.001)).unwrap();
        assert!((q.x - 55.60).abs() < 0.01, "{}", q.x);
    }

    #[test]
    fn rejects_invalid_coordinates() {
        assert!(GeoPoint::new(91.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -180.5).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn rejects_far_points() {
        let err = project(gp(0.0, 0.0), gp(1.5, 0.0)).unwrap_err();
        assert!(matches!(err, GeometryError::OutOfLocalRange { .. }));
    }

    #[test]
    fn unproject_inverts_project() {
        let o = gp(53.55, 9.99);
        let p = gp(53.553, 9.985);
        let back = unproject(o, project(o, p).unwrap());
        assert!((back.lat() - p.lat()).abs() < 1e-12);
        assert!((back.lon() - p.lon()).abs() < 1e-12);
    }
}
