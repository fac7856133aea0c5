//! Procedural hexahedral meshes: structured grids, deformed grids and
//! block-structured meshes with irregular (singular) edges.

use crate::geom::Vec3;
use crate::mesh::{HexMesh, MeshError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Vertex index of lattice point `(i, j, k)` in an `n1 × n2 × n3` grid.
pub fn grid_vertex(dims: [usize; 3], i: usize, j: usize, k: usize) -> usize {
    i + (dims[0] + 1) * (j + (dims[1] + 1) * k)
}

/// Axis-aligned `n1 × n2 × n3` grid with the given cell spacing. Cells are
/// numbered with `i` fastest.
pub fn grid(dims: [usize; 3], spacing: [f64; 3]) -> Result<HexMesh, MeshError> {
    let [n1, n2, n3] = dims;
    let mut vertices = Vec::with_capacity((n1 + 1) * (n2 + 1) * (n3 + 1));
    for k in 0..=n3 {
        for j in 0..=n2 {
            for i in 0..=n1 {
                vertices.push([
                    i as f64 * spacing[0],
                    j as f64 * spacing[1],
                    k as f64 * spacing[2],
                ]);
            }
        }
    }
    let mut cells = Vec::with_capacity(n1 * n2 * n3);
    for k in 0..n3 {
        for j in 0..n2 {
            for i in 0..n1 {
                let v = |di, dj, dk| grid_vertex(dims, i + di, j + dj, k + dk);
                cells.push([
                    v(0, 0, 0),
                    v(1, 0, 0),
                    v(1, 1, 0),
                    v(0, 1, 0),
                    v(0, 0, 1),
                    v(1, 0, 1),
                    v(1, 1, 1),
                    v(0, 1, 1),
                ]);
            }
        }
    }
    HexMesh::build(vertices, cells)
}

/// Closed-form `(vertices, edges, faces, cells)` counts of a structured grid.
pub fn grid_counts(dims: [usize; 3]) -> (usize, usize, usize, usize) {
    let [a, b, c] = dims;
    let v = (a + 1) * (b + 1) * (c + 1);
    let e = a * (b + 1) * (c + 1) + (a + 1) * b * (c + 1) + (a + 1) * (b + 1) * c;
    let f = (a + 1) * b * c + a * (b + 1) * c + a * b * (c + 1);
    (v, e, f, a * b * c)
}

/// Applies `map` to every vertex position, keeping the connectivity.
pub fn deformed(mesh: &HexMesh, map: impl Fn(Vec3) -> Vec3) -> HexMesh {
    let vertices = mesh.vertices().iter().map(|&p| map(p)).collect();
    let mut out = HexMesh::build(vertices, mesh.cells().to_vec())
        .expect("connectivity is unchanged");
    out.scalars = mesh.scalars.clone();
    out
}

/// Moves interior vertices by a seeded uniform offset of at most
/// `amount × mean edge length` per axis.
pub fn jittered(mesh: HexMesh, amount: f64, seed: u64) -> HexMesh {
    let h = mesh.mean_edge_length() * amount;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets: Vec<Vec3> = (0..mesh.num_vertices())
        .map(|v| {
            let o = [
                rng.gen_range(-h..=h),
                rng.gen_range(-h..=h),
                rng.gen_range(-h..=h),
            ];
            if mesh.is_boundary_vertex(v) {
                [0.0; 3]
            } else {
                o
            }
        })
        .collect();
    let vertices = mesh
        .vertices()
        .iter()
        .zip(&offsets)
        .map(|(p, o)| [p[0] + o[0], p[1] + o[1], p[2] + o[2]])
        .collect();
    HexMesh::build(vertices, mesh.cells().to_vec()).expect("connectivity is unchanged")
}

/// Grid twisted about the vertical axis through its center by up to
/// `max_angle` radians at the top.
pub fn twisted_grid(dims: [usize; 3], max_angle: f64) -> Result<HexMesh, MeshError> {
    let spacing = [1.0 / dims[0] as f64, 1.0 / dims[1] as f64, 1.0 / dims[2] as f64];
    let g = grid(dims, spacing)?;
    Ok(deformed(&g, |p| {
        let a = max_angle * p[2];
        let (s, c) = a.sin_cos();
        let (x, y) = (p[0] - 0.5, p[1] - 0.5);
        [0.5 + c * x - s * y, 0.5 + s * x + c * y, p[2]]
    }))
}

/// Deduplicates vertices by position so independently generated blocks
/// share their interface vertices.
struct VertexPool {
    index: HashMap<[i64; 3], usize>,
    vertices: Vec<Vec3>,
}

impl VertexPool {
    fn new() -> Self {
        VertexPool {
            index: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn get(&mut self, p: Vec3) -> usize {
        let key = p.map(|x| (x * 1e9).round() as i64);
        let n = self.vertices.len();
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            n
        })
    }
}

/// Extrudes a 2D quad mesh (counter-clockwise quads) along z.
fn extrude(quads: &[[[f64; 2]; 4]], layers: usize, height: f64) -> Result<HexMesh, MeshError> {
    let mut pool = VertexPool::new();
    let mut cells = Vec::with_capacity(quads.len() * layers);
    for l in 0..layers {
        let z0 = height * l as f64 / layers as f64;
        let z1 = height * (l + 1) as f64 / layers as f64;
        for q in quads {
            let b = q.map(|p| pool.get([p[0], p[1], z0]));
            let t = q.map(|p| pool.get([p[0], p[1], z1]));
            cells.push([b[0], b[1], b[2], b[3], t[0], t[1], t[2], t[3]]);
        }
    }
    HexMesh::build(pool.vertices, cells)
}

/// Bilinear patch subdivided into `nu × nv` quads; corners counter-clockwise.
fn patch(corners: [[f64; 2]; 4], nu: usize, nv: usize, out: &mut Vec<[[f64; 2]; 4]>) {
    let at = |u: usize, v: usize| {
        let (s, t) = (u as f64 / nu as f64, v as f64 / nv as f64);
        let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
        let mut p = [0.0; 2];
        for k in 0..4 {
            p[0] += w[k] * corners[k][0];
            p[1] += w[k] * corners[k][1];
        }
        // snap to reduce round-off between blocks sharing an interface
        p.map(|x| (x * 1e12).round() / 1e12)
    };
    for v in 0..nv {
        for u in 0..nu {
            out.push([at(u, v), at(u + 1, v), at(u + 1, v + 1), at(u, v + 1)]);
        }
    }
}

/// Cylinder meshed as an O-grid: a central `m × m` block surrounded by four
/// `m × rings` blocks, extruded into `layers`. The four vertical lines
/// through the corners of the central block are interior edges of
/// valence 3.
pub fn ogrid_cylinder(m: usize, rings: usize, layers: usize) -> Result<HexMesh, MeshError> {
    let inner = 0.45;
    let mut quads = Vec::new();
    patch(
        [[-inner, -inner], [inner, -inner], [inner, inner], [-inner, inner]],
        m,
        m,
        &mut quads,
    );
    let sq = [[-inner, -inner], [inner, -inner], [inner, inner], [-inner, inner]];
    // Outer blocks: ring between central square side k and the arc k. The
    // arc is sampled per column so the outer boundary is circular.
    for k in 0..4 {
        let (a0, a1) = (sq[k], sq[(k + 1) % 4]);
        let ang0 = std::f64::consts::FRAC_PI_4 * (2 * k as i64 - 3) as f64;
        for u in 0..m {
            let s0 = u as f64 / m as f64;
            let s1 = (u + 1) as f64 / m as f64;
            let lerp = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + (b[0] - a[0]) * s, a[1] + (b[1] - a[1]) * s];
            let arc = |s: f64| {
                let a = ang0 + std::f64::consts::FRAC_PI_2 * s;
                [a.cos(), a.sin()]
            };
            let (i0, i1) = (lerp(a0, a1, s0), lerp(a0, a1, s1));
            let (o0, o1) = (arc(s0), arc(s1));
            patch([i0, o0, o1, i1], rings, 1, &mut quads);
        }
    }
    extrude(&quads, layers, 2.0)
}

/// Triangular prism split into three quad blocks meeting at the centroid,
/// each subdivided `m × m`, extruded into `layers`. The vertical line through
/// the centroid is an interior edge of valence 3; the prism's vertical
/// corner lines have valence 1.
pub fn tri_prism(m: usize, layers: usize) -> Result<HexMesh, MeshError> {
    let t = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.75f64.sqrt()]];
    let c = [(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0];
    let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let mut quads = Vec::new();
    for k in 0..3 {
        let corner = t[k];
        let next = mid(t[k], t[(k + 1) % 3]);
        let prev = mid(t[(k + 2) % 3], t[k]);
        patch([corner, next, c, prev], m, m, &mut quads);
    }
    extrude(&quads, layers, 1.0)
}
