//! Perspective camera with view-space linear depth.

use crate::geom::{self, Aabb, Vec3};
use serde::{Deserialize, Serialize};

use super::RenderError;

/// How the camera is placed relative to the mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CameraSpec {
    /// Turntable around the bounding-box center; `distance` is in units of
    /// the bounding-sphere radius, `z` is up.
    Orbit {
        azimuth_deg: f64,
        elevation_deg: f64,
        distance: f64,
        fov_y_deg: f64,
    },
    LookAt {
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        fov_y_deg: f64,
    },
}

impl Default for CameraSpec {
    fn default() -> Self {
        CameraSpec::Orbit {
            azimuth_deg: 35.0,
            elevation_deg: 25.0,
            distance: 2.6,
            fov_y_deg: 40.0,
        }
    }
}

impl CameraSpec {
    pub fn validate(&self) -> Result<(), RenderError> {
        let fov = match *self {
            CameraSpec::Orbit {
                azimuth_deg,
                elevation_deg,
                distance,
                fov_y_deg,
            } => {
                if !(azimuth_deg.is_finite() && elevation_deg.abs() < 90.0 && distance > 0.0) {
                    return Err(RenderError::InvalidParam(
                        "orbit needs finite azimuth, |elevation| < 90 and distance > 0".into(),
                    ));
                }
                fov_y_deg
            }
            CameraSpec::LookAt {
                eye,
                target,
                up,
                fov_y_deg,
            } => {
                let forward = geom::normalize(geom::sub(target, eye));
                let side = forward.and_then(|f| geom::normalize(geom::cross(f, up)));
                if side.is_none() {
                    return Err(RenderError::InvalidParam(
                        "look-at camera needs eye ≠ target and up not parallel to the view".into(),
                    ));
                }
                fov_y_deg
            }
        };
        if fov > 0.0 && fov < 179.0 {
            Ok(())
        } else {
            Err(RenderError::InvalidParam("fov_y_deg must lie in (0, 179)".into()))
        }
    }

    /// Places the camera for a mesh with the given bounds and image size.
    pub fn resolve(&self, bounds: &Aabb, width: u32, height: u32) -> Camera {
        let center = bounds.center();
        let radius = (bounds.diagonal() / 2.0).max(1e-9);
        let (eye, target, up, fov) = match *self {
            CameraSpec::Orbit {
                azimuth_deg,
                elevation_deg,
                distance,
                fov_y_deg,
            } => {
                let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
                let dir = [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()];
                let eye = geom::add(center, geom::scale(dir, distance * radius));
                (eye, center, [0.0, 0.0, 1.0], fov_y_deg)
            }
            CameraSpec::LookAt {
                eye,
                target,
                up,
                fov_y_deg,
            } => (eye, target, up, fov_y_deg),
        };
        Camera::look_at(eye, target, up, fov, width, height, (center, radius))
    }
}

/// A resolved camera: orthonormal frame, projection and depth range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub eye: Vec3,
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub width: u32,
    pub height: u32,
    /// `tan(fov_y / 2)`.
    pub tan_half_fov: f64,
    pub near: f64,
    pub far: f64,
}

/// A point transformed to screen space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projected {
    /// Pixel coordinates, `y` down; pixel `(i, j)` has its center at
    /// `(i + 0.5, j + 0.5)`.
    pub x: f64,
    pub y: f64,
    /// View-space distance along the forward axis.
    pub z: f64,
}

impl Camera {
    /// Camera at `eye` looking at `target`; near and far planes enclose the
    /// sphere `(center, radius)`.
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        fov_y_deg: f64,
        width: u32,
        height: u32,
        (center, radius): (Vec3, f64),
    ) -> Camera {
        let forward = geom::normalize(geom::sub(target, eye)).unwrap_or([0.0, 0.0, -1.0]);
        let right = geom::normalize(geom::cross(forward, up))
            .or_else(|| geom::normalize(geom::cross(forward, [1.0, 0.0, 0.0])))
            .unwrap_or([1.0, 0.0, 0.0]);
        let up = geom::cross(right, forward);
        let zc = geom::dot(geom::sub(center, eye), forward);
        let near = (zc - 1.01 * radius).max(1e-3 * radius);
        let far = (zc + 1.01 * radius).max(near + radius);
        Camera {
            eye,
            forward,
            right,
            up,
            width,
            height,
            tan_half_fov: (fov_y_deg.to_radians() / 2.0).tan(),
            near,
            far,
        }
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    pub fn to_view(&self, p: Vec3) -> Vec3 {
        let d = geom::sub(p, self.eye);
        [
            geom::dot(d, self.right),
            geom::dot(d, self.up),
            geom::dot(d, self.forward),
        ]
    }

    /// Screen position of a view-space point with `z > 0`.
    pub fn view_to_screen(&self, v: Vec3) -> Projected {
        let sy = self.tan_half_fov * v[2];
        let sx = sy * self.aspect();
        Projected {
            x: (v[0] / sx + 1.0) * 0.5 * self.width as f64,
            y: (1.0 - v[1] / sy) * 0.5 * self.height as f64,
            z: v[2],
        }
    }

    pub fn project(&self, p: Vec3) -> Projected {
        self.view_to_screen(self.to_view(p))
    }

    /// View depth mapped linearly so that the near plane is 0 and the far
    /// plane is 1.
    pub fn normalized_depth(&self, z: f64) -> f64 {
        (z - self.near) / (self.far - self.near)
    }

    /// Ray through a point in pixel coordinates; the direction is unit.
    pub fn ray(&self, px: f64, py: f64) -> (Vec3, Vec3) {
        let nx = (2.0 * px / self.width as f64 - 1.0) * self.tan_half_fov * self.aspect();
        let ny = (1.0 - 2.0 * py / self.height as f64) * self.tan_half_fov;
        let d = geom::add(
            self.forward,
            geom::add(geom::scale(self.right, nx), geom::scale(self.up, ny)),
        );
        (self.eye, geom::normalize(d).expect("forward is unit"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> Camera {
        Camera::look_at(
            [0.0, 0.0, 5.0],
            [0.0; 3],
            [0.0, 1.0, 0.0],
            90.0,
            200,
            100,
            ([0.0; 3], 1.0),
        )
    }

    #[test]
    fn center_projects_to_image_center() {
        let p = cam().project([0.0, 0.0, 0.0]);
        assert!((p.x - 100.0).abs() < 1e-12 && (p.y - 50.0).abs() < 1e-12);
        assert!((p.z - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ray_round_trips_through_projection() {
        let c = cam();
        let (o, d) = c.ray(30.5, 70.25);
        let p = c.project(geom::add(o, geom::scale(d, 3.7)));
        assert!((p.x - 30.5).abs() < 1e-9 && (p.y - 70.25).abs() < 1e-9);
    }

    #[test]
    fn up_is_screen_up() {
        let c = cam();
        assert!(c.project([0.0, 0.5, 0.0]).y < 50.0);
        assert!(c.project([0.5, 0.0, 0.0]).x > 100.0);
    }

    #[test]
    fn depth_range_encloses_sphere() {
        let c = cam();
        assert!(c.normalized_depth(4.0) > 0.0 && c.normalized_depth(6.0) < 1.0);
        assert!((c.near - 3.99).abs() < 1e-12);
    }

    #[test]
    fn orbit_looks_at_center() {
        let b = Aabb::from_points(&[[0.0; 3], [2.0, 2.0, 2.0]]).unwrap();
        let c = CameraSpec::default().resolve(&b, 64, 64);
        let p = c.project([1.0, 1.0, 1.0]);
        assert!((p.x - 32.0).abs() < 1e-9 && (p.y - 32.0).abs() < 1e-9);
    }
}
