//! Object-space lens placement by picking the boundary surface.

use crate::geom::{self, Vec3};
use crate::mesh::HexMesh;

use super::camera::Camera;
use super::params::ObjectLens;

/// Ray parameter of the intersection with a triangle, if any.
fn ray_triangle(origin: Vec3, dir: Vec3, tri: [Vec3; 3]) -> Option<f64> {
    let e1 = geom::sub(tri[1], tri[0]);
    let e2 = geom::sub(tri[2], tri[0]);
    let p = geom::cross(dir, e2);
    let det = geom::dot(e1, p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = geom::sub(origin, tri[0]);
    let u = geom::dot(s, p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = geom::cross(s, e1);
    let v = geom::dot(dir, q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = geom::dot(e2, q) * inv;
    (t > 0.0).then_some(t)
}

/// Nearest hit of a ray with the mesh boundary surface.
pub fn pick_surface(mesh: &HexMesh, origin: Vec3, dir: Vec3) -> Option<(f64, Vec3)> {
    let mut best: Option<f64> = None;
    for f in mesh.boundary_faces() {
        let c = mesh.face_corners(f);
        for tri in [[c[0], c[1], c[2]], [c[0], c[2], c[3]]] {
            if let Some(t) = ray_triangle(origin, dir, tri) {
                if best.is_none_or(|b| t < b) {
                    best = Some(t);
                }
            }
        }
    }
    best.map(|t| (t, geom::add(origin, geom::scale(dir, t))))
}

/// Object lens anchored where the viewing ray through pixel `(px, py)`
/// first meets the boundary surface. The ray is stored with the lens so
/// later depth changes move the lens along it, whatever the camera does
/// afterwards. `None` on a miss.
pub fn pick_object_lens(
    mesh: &HexMesh,
    camera: &Camera,
    px: f64,
    py: f64,
    radius: f64,
) -> Option<ObjectLens> {
    let (origin, dir) = camera.ray(px, py);
    let (_, anchor) = pick_surface(mesh, origin, dir)?;
    Some(ObjectLens {
        anchor,
        ray_origin: origin,
        ray_dir: dir,
        depth: 0.0,
        radius,
    })
}
