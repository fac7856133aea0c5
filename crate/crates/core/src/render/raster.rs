//! Triangle setup and scan conversion.
//!
//! Screen positions are snapped to 1/256 pixel and edge functions are
//! evaluated exactly in integers, so the top-left rule assigns every pixel
//! center on a shared edge to exactly one of the two triangles. Attributes
//! are interpolated perspective-correctly.

use crate::geom::{self, Vec3};
use smallvec::SmallVec;

use super::camera::Camera;

/// Sub-pixel resolution of snapped screen coordinates.
pub const SUBPIXEL: i64 = 256;

/// A triangle corner with the attributes carried through clipping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClipVertex {
    pub world: Vec3,
    pub view: Vec3,
    pub importance: f64,
}

impl ClipVertex {
    pub fn new(camera: &Camera, world: Vec3, importance: f64) -> ClipVertex {
        ClipVertex {
            world,
            view: camera.to_view(world),
            importance,
        }
    }

    fn lerp(a: &ClipVertex, b: &ClipVertex, t: f64) -> ClipVertex {
        ClipVertex {
            world: geom::lerp3(a.world, b.world, t),
            view: geom::lerp3(a.view, b.view, t),
            importance: a.importance + (b.importance - a.importance) * t,
        }
    }
}

/// Clips a triangle to `z ≥ near` in view space; returns 0, 3 or 4 corners.
pub fn clip_near(tri: [ClipVertex; 3], near: f64) -> SmallVec<[ClipVertex; 4]> {
    let mut out = SmallVec::new();
    for k in 0..3 {
        let (a, b) = (&tri[k], &tri[(k + 1) % 3]);
        let (ina, inb) = (a.view[2] >= near, b.view[2] >= near);
        if ina {
            out.push(*a);
        }
        if ina != inb {
            let t = (near - a.view[2]) / (b.view[2] - a.view[2]);
            let mut v = ClipVertex::lerp(a, b, t);
            v.view[2] = near;
            out.push(v);
        }
    }
    out
}

/// Values interpolated at a covered pixel center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interp {
    pub world: Vec3,
    pub importance: f64,
    /// View-space depth.
    pub z: f64,
}

/// A screen-space triangle ready for scan conversion, oriented so its
/// signed doubled area is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    pub x: [i64; 3],
    pub y: [i64; 3],
    area2: i128,
    verts: [ClipVertex; 3],
    /// Inclusive pixel bounds.
    pub bbox: [i64; 4],
}

impl Triangle {
    /// Projects three corners that lie in front of the near plane. Returns
    /// `None` for triangles with zero snapped area.
    pub fn setup(camera: &Camera, verts: [ClipVertex; 3]) -> Option<Triangle> {
        let snap = |v: &ClipVertex| {
            let p = camera.view_to_screen(v.view);
            ((p.x * SUBPIXEL as f64).round() as i64, (p.y * SUBPIXEL as f64).round() as i64)
        };
        let mut verts = verts;
        let mut s = [snap(&verts[0]), snap(&verts[1]), snap(&verts[2])];
        let area = |s: &[(i64, i64); 3]| {
            (s[1].0 - s[0].0) as i128 * (s[2].1 - s[0].1) as i128
                - (s[1].1 - s[0].1) as i128 * (s[2].0 - s[0].0) as i128
        };
        let mut area2 = area(&s);
        if area2 == 0 {
            return None;
        }
        if area2 < 0 {
            s.swap(1, 2);
            verts.swap(1, 2);
            area2 = -area2;
        }
        let (x, y) = (s.map(|p| p.0), s.map(|p| p.1));
        // pixel (i, j) is covered if its center (i + ½, j + ½) is inside
        let lo = |v: i64| (v - SUBPIXEL / 2).div_euclid(SUBPIXEL);
        let hi = |v: i64| (v - SUBPIXEL / 2).div_euclid(SUBPIXEL) + 1;
        let bbox = [
            lo(*x.iter().min().unwrap()),
            lo(*y.iter().min().unwrap()),
            hi(*x.iter().max().unwrap()),
            hi(*y.iter().max().unwrap()),
        ];
        Some(Triangle {
            x,
            y,
            area2,
            verts,
            bbox,
        })
    }

    /// Clips and sets up a triangle; near-plane clipping may yield two.
    pub fn setup_clipped(camera: &Camera, tri: [ClipVertex; 3]) -> SmallVec<[Triangle; 2]> {
        let poly = clip_near(tri, camera.near);
        let mut out = SmallVec::new();
        for k in 1..poly.len().saturating_sub(1) {
            if let Some(t) = Triangle::setup(camera, [poly[0], poly[k], poly[k + 1]]) {
                out.push(t);
            }
        }
        out
    }

    /// Calls `emit(px, py, interp)` for every covered pixel inside the
    /// inclusive-exclusive rectangle `[x0, x1) × [y0, y1)`.
    pub fn rasterize(&self, rect: [i64; 4], mut emit: impl FnMut(i64, i64, Interp)) {
        let [x0, y0, x1, y1] = [
            self.bbox[0].max(rect[0]),
            self.bbox[1].max(rect[1]),
            self.bbox[2].min(rect[2] - 1),
            self.bbox[3].min(rect[3] - 1),
        ];
        if x0 > x1 || y0 > y1 {
            return;
        }
        let (x, y) = (self.x, self.y);
        // edge k lies opposite vertex k
        let ends = [(1, 2), (2, 0), (0, 1)];
        let mut row = [0i128; 3];
        let mut step_x = [0i128; 3];
        let mut step_y = [0i128; 3];
        let mut bias = [0i128; 3];
        let (cx, cy) = (x0 * SUBPIXEL + SUBPIXEL / 2, y0 * SUBPIXEL + SUBPIXEL / 2);
        for (k, &(a, b)) in ends.iter().enumerate() {
            let (dx, dy) = ((x[b] - x[a]) as i128, (y[b] - y[a]) as i128);
            row[k] = dx * (cy - y[a]) as i128 - dy * (cx - x[a]) as i128;
            step_x[k] = -dy * SUBPIXEL as i128;
            step_y[k] = dx * SUBPIXEL as i128;
            // top edges (horizontal, pointing right) and left edges (pointing
            // up in y-down coordinates) own the pixel centers on them
            let top_left = dy < 0 || (dy == 0 && dx > 0);
            bias[k] = if top_left { 0 } else { -1 };
        }
        let inv_area = 1.0 / self.area2 as f64;
        let v = &self.verts;
        let inv_z = [1.0 / v[0].view[2], 1.0 / v[1].view[2], 1.0 / v[2].view[2]];
        for py in y0..=y1 {
            let mut e = row;
            for px in x0..=x1 {
                if e[0] + bias[0] >= 0 && e[1] + bias[1] >= 0 && e[2] + bias[2] >= 0 {
                    let l = [
                        e[0] as f64 * inv_area * inv_z[0],
                        e[1] as f64 * inv_area * inv_z[1],
                        e[2] as f64 * inv_area * inv_z[2],
                    ];
                    let sum = l[0] + l[1] + l[2];
                    let b = [l[0] / sum, l[1] / sum, l[2] / sum];
                    let mut world = [0.0; 3];
                    for (vk, &bk) in v.iter().zip(&b) {
                        world = geom::add(world, geom::scale(vk.world, bk));
                    }
                    emit(
                        px,
                        py,
                        Interp {
                            world,
                            importance: b[0] * v[0].importance
                                + b[1] * v[1].importance
                                + b[2] * v[2].importance,
                            z: 1.0 / sum,
                        },
                    );
                }
                for k in 0..3 {
                    e[k] += step_x[k];
                }
            }
            for k in 0..3 {
                row[k] += step_y[k];
            }
        }
    }
}
