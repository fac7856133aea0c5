//! Per-cell deformation measures and their aggregation to vertices and
//! edges.
//!
//! The scaled Jacobian is sampled at the 8 corners only. Each corner frame
//! uses the three edges leaving the corner, ordered so that an undeformed
//! positively oriented cell has determinant `+1` everywhere.

use crate::geom::{self, Vec3};
use crate::mesh::{HexMesh, HEX_FACES};
use serde::{Deserialize, Serialize};

/// Neighbor corners forming a right-handed frame at each corner.
const CORNER_FRAMES: [[usize; 4]; 8] = [
    [0, 1, 3, 4],
    [1, 2, 0, 5],
    [2, 3, 1, 6],
    [3, 0, 2, 7],
    [4, 7, 5, 0],
    [5, 4, 6, 1],
    [6, 5, 7, 2],
    [7, 6, 4, 3],
];

/// Per-cell scalar with a per-cell flag (degenerate for Jacobians,
/// inverted for volumes).
#[derive(Clone, Debug, PartialEq)]
pub struct CellMetric {
    pub values: Vec<f64>,
    pub flagged: Vec<bool>,
}

impl CellMetric {
    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }
}

/// Scaled Jacobian of one cell: the minimum over corners of the determinant
/// of the unit edge vectors. Returns `(0, true)` if any corner edge has zero
/// length.
pub fn cell_scaled_jacobian(corners: &[Vec3; 8]) -> (f64, bool) {
    let mut min = f64::INFINITY;
    for [c, a, b, d] in CORNER_FRAMES {
        let p = corners[c];
        let e = [
            geom::normalize(geom::sub(corners[a], p)),
            geom::normalize(geom::sub(corners[b], p)),
            geom::normalize(geom::sub(corners[d], p)),
        ];
        match e {
            [Some(e1), Some(e2), Some(e3)] => min = min.min(geom::det3(e1, e2, e3)),
            _ => return (0.0, true),
        }
    }
    (min.clamp(-1.0, 1.0), false)
}

pub fn scaled_jacobian(mesh: &HexMesh) -> CellMetric {
    let (values, flagged) = (0..mesh.num_cells())
        .map(|c| cell_scaled_jacobian(&mesh.cell_corners(c)))
        .unzip();
    CellMetric { values, flagged }
}

/// Signed volume of the 24-tetrahedron decomposition: every face edge is
/// joined with its face centroid and the cell centroid.
pub fn tetrakis_volume(corners: &[Vec3; 8]) -> f64 {
    let cc = geom::centroid(corners);
    let mut vol = 0.0;
    for face in HEX_FACES {
        let quad = face.map(|k| corners[k]);
        let fc = geom::centroid(&quad);
        for k in 0..4 {
            let a = geom::sub(quad[k], cc);
            let b = geom::sub(quad[(k + 1) % 4], cc);
            vol += geom::det3(a, b, geom::sub(fc, cc));
        }
    }
    vol / 6.0
}

/// Cell volumes; `flagged` marks inverted (negative-volume) cells.
pub fn cell_volumes(mesh: &HexMesh) -> CellMetric {
    let values: Vec<f64> = (0..mesh.num_cells())
        .map(|c| tetrakis_volume(&mesh.cell_corners(c)))
        .collect();
    let flagged = values.iter().map(|&v| v < 0.0).collect();
    CellMetric { values, flagged }
}

/// Per-vertex aggregate plus the vertices that needed a fallback.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexValues {
    pub values: Vec<f64>,
    pub fallback: Vec<usize>,
}

/// Maximum of the incident cells' values per vertex. Isolated vertices get
/// 0 and are listed in `fallback`.
pub fn vertex_importance(mesh: &HexMesh, per_cell: &[f64]) -> VertexValues {
    let mut fallback = Vec::new();
    let values = (0..mesh.num_vertices())
        .map(|v| {
            let cells = mesh.vertex_cells(v);
            if cells.is_empty() {
                fallback.push(v);
                0.0
            } else {
                cells
                    .iter()
                    .map(|&c| per_cell[c])
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .collect();
    VertexValues { values, fallback }
}

/// `Σ V·a / Σ V`, or the plain mean when the weights sum to zero.
/// The flag reports the fallback.
pub fn volume_weighted_mean(samples: &[(f64, f64)]) -> (f64, bool) {
    let wsum: f64 = samples.iter().map(|s| s.0).sum();
    if wsum > 0.0 {
        (samples.iter().map(|s| s.0 * s.1).sum::<f64>() / wsum, false)
    } else if samples.is_empty() {
        (0.0, true)
    } else {
        (
            samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64,
            true,
        )
    }
}

/// `Σ V / Σ (V / J)` over samples with `J ≠ 0`. Returns `(0, true)` when no
/// usable sample remains.
pub fn volume_weighted_harmonic(samples: &[(f64, f64)]) -> (f64, bool) {
    let (mut num, mut den) = (0.0, 0.0);
    for &(v, j) in samples {
        if j != 0.0 {
            num += v;
            den += v / j;
        }
    }
    if den == 0.0 {
        (0.0, true)
    } else {
        (num / den, false)
    }
}

fn incident_samples(mesh: &HexMesh, v: usize, volumes: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    mesh.vertex_cells(v)
        .iter()
        .map(|&c| (volumes[c], values[c]))
        .collect()
}

/// Volume-weighted arithmetic mean of the incident cells per vertex.
pub fn weighted_vertex_attribute(mesh: &HexMesh, per_cell: &[f64], volumes: &[f64]) -> VertexValues {
    let mut fallback = Vec::new();
    let values = (0..mesh.num_vertices())
        .map(|v| {
            let (a, fb) = volume_weighted_mean(&incident_samples(mesh, v, volumes, per_cell));
            if fb {
                fallback.push(v);
            }
            a
        })
        .collect();
    VertexValues { values, fallback }
}

/// Volume-weighted harmonic mean of incident Jacobians per vertex;
/// degenerate cells are left out of the sums.
pub fn weighted_jacobian_attribute(
    mesh: &HexMesh,
    jacobians: &CellMetric,
    volumes: &[f64],
) -> VertexValues {
    let mut fallback = Vec::new();
    let values = (0..mesh.num_vertices())
        .map(|v| {
            let samples: Vec<(f64, f64)> = mesh
                .vertex_cells(v)
                .iter()
                .filter(|&&c| !jacobians.flagged[c])
                .map(|&c| (volumes[c], jacobians.values[c]))
                .collect();
            let (j, fb) = volume_weighted_harmonic(&samples);
            if fb {
                fallback.push(v);
            }
            j
        })
        .collect();
    VertexValues { values, fallback }
}

/// Maximum over the cells incident to each edge.
pub fn edge_importance(mesh: &HexMesh, per_cell: &[f64]) -> Vec<f64> {
    (0..mesh.num_edges())
        .map(|e| {
            mesh.edge_cells(e)
                .iter()
                .map(|&c| per_cell[c])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// How per-vertex values for face coloring are formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexAggregation {
    /// Maximum over incident cells.
    #[default]
    Max,
    /// Volume-weighted mean (harmonic for the scaled Jacobian).
    VolumeWeighted,
}

/// Source of per-cell values.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    ScaledJacobian,
    /// A scalar array carried by the mesh, by name.
    Field(String),
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scaled-jacobian" => Ok(Metric::ScaledJacobian),
            _ => match s.strip_prefix("field:") {
                Some(name) if !name.is_empty() => Ok(Metric::Field(name.to_string())),
                _ => Err(format!(
                    "unknown metric {s:?}; expected scaled-jacobian or field:<name>"
                )),
            },
        }
    }
}

/// Per-cell, per-vertex and per-edge scalars of one named quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttributeField {
    pub name: String,
    pub per_cell: Vec<f64>,
    pub per_vertex: Vec<f64>,
    pub per_edge: Vec<f64>,
    /// Attained `(min, max)` over cells.
    pub range: (f64, f64),
}

fn range_of(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Raw metric values and the importance derived from them.
#[derive(Clone, Debug)]
pub struct MetricFields {
    /// The metric as measured, e.g. scaled Jacobian per cell.
    pub raw: AttributeField,
    /// Normalized to `[0, 1]` with 1 = most important (most deformed).
    pub importance: AttributeField,
    pub degenerate_cells: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("mesh has no scalar array named {0:?}")]
    UnknownField(String),
}

/// Computes a metric and the importance field used by the renderer.
///
/// For the scaled Jacobian, importance is `(J_max − J) / (J_max − J_min)`
/// over the mesh; for file fields it is `(a − min) / (max − min)`. A
/// constant metric maps to importance 0 everywhere.
pub fn metric_fields(
    mesh: &HexMesh,
    metric: &Metric,
    aggregation: VertexAggregation,
) -> Result<MetricFields, MetricError> {
    let volumes = cell_volumes(mesh).values;
    let (name, per_cell, raw_vertex, degenerate, invert) = match metric {
        Metric::ScaledJacobian => {
            let jac = scaled_jacobian(mesh);
            let vertex = match aggregation {
                VertexAggregation::Max => vertex_importance(mesh, &jac.values).values,
                VertexAggregation::VolumeWeighted => {
                    weighted_jacobian_attribute(mesh, &jac, &volumes).values
                }
            };
            let degenerate = jac.flagged_count();
            ("scaled_jacobian".to_string(), jac.values, vertex, degenerate, true)
        }
        Metric::Field(name) => {
            let arr = mesh
                .scalars
                .iter()
                .find(|a| &a.name == name)
                .ok_or_else(|| MetricError::UnknownField(name.clone()))?;
            let (per_cell, vertex) = match arr.location {
                crate::mesh::DataLocation::Cell => {
                    let vertex = match aggregation {
                        VertexAggregation::Max => vertex_importance(mesh, &arr.values).values,
                        VertexAggregation::VolumeWeighted => {
                            weighted_vertex_attribute(mesh, &arr.values, &volumes).values
                        }
                    };
                    (arr.values.clone(), vertex)
                }
                crate::mesh::DataLocation::Point => {
                    let per_cell = mesh
                        .cells()
                        .iter()
                        .map(|c| c.iter().map(|&v| arr.values[v]).sum::<f64>() / 8.0)
                        .collect();
                    (per_cell, arr.values.clone())
                }
            };
            (name.clone(), per_cell, vertex, 0, false)
        }
    };
    let range = range_of(&per_cell);
    let span = range.1 - range.0;
    let normalize = |x: f64| {
        if span > 0.0 {
            let t = if invert { range.1 - x } else { x - range.0 };
            (t / span).clamp(0.0, 1.0)
        } else {
            0.0
        }
    };
    let raw = AttributeField {
        name: name.clone(),
        per_edge: edge_importance(mesh, &per_cell),
        per_vertex: raw_vertex.clone(),
        per_cell: per_cell.clone(),
        range,
    };
    let imp_cell: Vec<f64> = per_cell.iter().map(|&x| normalize(x)).collect();
    let imp_vertex = match aggregation {
        VertexAggregation::Max => vertex_importance(mesh, &imp_cell).values,
        VertexAggregation::VolumeWeighted => raw_vertex.iter().map(|&x| normalize(x)).collect(),
    };
    let importance = AttributeField {
        name: format!("{name}_importance"),
        per_edge: edge_importance(mesh, &imp_cell),
        per_vertex: imp_vertex,
        range: range_of(&imp_cell),
        per_cell: imp_cell,
    };
    Ok(MetricFields {
        raw,
        importance,
        degenerate_cells: degenerate,
    })
}

pub const HISTOGRAM_BINS: usize = 32;

/// Summary statistics exported alongside renders.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub histogram: Vec<usize>,
}

pub fn summarize(name: &str, values: &[f64]) -> Summary {
    let (min, max) = range_of(values);
    let mut histogram = vec![0usize; HISTOGRAM_BINS];
    let span = max - min;
    for &v in values {
        let bin = if span > 0.0 {
            (((v - min) / span) * HISTOGRAM_BINS as f64) as usize
        } else {
            0
        };
        histogram[bin.min(HISTOGRAM_BINS - 1)] += 1;
    }
    let mean = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    Summary {
        name: name.to_string(),
        min,
        max,
        mean,
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn cube_corners() -> [Vec3; 8] {
        synth::grid([1, 1, 1], [1.0; 3]).unwrap().cell_corners(0)
    }

    /// Independent corner-frame determinant via explicit cofactor expansion
    /// over all 8 corners, with frames found from cube adjacency rather
    /// than the lookup table.
    fn brute_scaled_jacobian(c: &[Vec3; 8]) -> f64 {
        let adjacent = |a: usize, b: usize| {
            crate::mesh::HEX_EDGES
                .iter()
                .any(|&[x, y]| (x == a && y == b) || (x == b && y == a))
        };
        let mut best = f64::INFINITY;
        for k in 0..8 {
            let nbrs: Vec<usize> = (0..8).filter(|&j| adjacent(k, j)).collect();
            let unit = |j: usize| {
                let d = [c[j][0] - c[k][0], c[j][1] - c[k][1], c[j][2] - c[k][2]];
                let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                [d[0] / n, d[1] / n, d[2] / n]
            };
            let (a, b, d) = (unit(nbrs[0]), unit(nbrs[1]), unit(nbrs[2]));
            let det = a[0] * (b[1] * d[2] - b[2] * d[1]) - a[1] * (b[0] * d[2] - b[2] * d[0])
                + a[2] * (b[0] * d[1] - b[1] * d[0]);
            // orientation of the neighbor triple is fixed by the reference cube
            let (ra, rb, rd) = {
                let r = cube_corners();
                let u = |j: usize| [r[j][0] - r[k][0], r[j][1] - r[k][1], r[j][2] - r[k][2]];
                (u(nbrs[0]), u(nbrs[1]), u(nbrs[2]))
            };
            let ref_sign = geom::det3(ra, rb, rd).signum();
            best = best.min(det * ref_sign);
        }
        best
    }

    #[test]
    fn unit_cube_jacobian_and_volume() {
        let (j, deg) = cell_scaled_jacobian(&cube_corners());
        assert_eq!(j, 1.0);
        assert!(!deg);
        assert!((tetrakis_volume(&cube_corners()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sheared_top_face_gives_inverse_sqrt2() {
        let mut c = cube_corners();
        for p in &mut c[4..] {
            p[0] += 1.0;
        }
        let (j, _) = cell_scaled_jacobian(&c);
        assert!((j - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((brute_scaled_jacobian(&c) - j).abs() < 1e-12);
    }

    #[test]
    fn coincident_corners_are_degenerate() {
        let mut c = cube_corners();
        c[6] = c[5];
        assert_eq!(cell_scaled_jacobian(&c), (0.0, true));
    }

    #[test]
    fn volume_under_shear_and_scale() {
        let sheared = cube_corners().map(|p| [p[0] + p[2], p[1], p[2]]);
        assert!((tetrakis_volume(&sheared) - 1.0).abs() < 1e-9);
        let scaled = cube_corners().map(|p| geom::scale(p, 2.0));
        assert!((tetrakis_volume(&scaled) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn inverted_cell_flagged() {
        let m = synth::grid([1, 1, 1], [1.0; 3]).unwrap().mirrored().unwrap();
        let v = cell_volumes(&m);
        assert!((v.values[0] + 1.0).abs() < 1e-12);
        assert_eq!(v.flagged, vec![true]);
    }

    #[test]
    fn vertex_importance_max_cases() {
        let m = synth::grid([2, 1, 1], [1.0; 3]).unwrap();
        let vi = vertex_importance(&m, &[0.1, 0.8]);
        // the 4 vertices on the shared face x = 1
        let shared: Vec<usize> = (0..12).filter(|&v| m.vertices()[v][0] == 1.0).collect();
        assert_eq!(shared.len(), 4);
        for v in shared {
            assert_eq!(vi.values[v], 0.8);
        }
        let constant = vertex_importance(&m, &[0.4, 0.4]);
        assert!(constant.values.iter().all(|&x| x == 0.4));
        assert!(constant.fallback.is_empty());
    }

    #[test]
    fn isolated_vertex_falls_back_to_zero() {
        let mut verts = synth::grid([1, 1, 1], [1.0; 3]).unwrap().vertices().to_vec();
        verts.push([5.0, 5.0, 5.0]);
        let m = HexMesh::build(verts, vec![[0, 1, 2, 3, 4, 5, 6, 7]]).unwrap();
        let vi = vertex_importance(&m, &[0.7]);
        assert_eq!(vi.values[8], 0.0);
        assert_eq!(vi.fallback, vec![8]);
    }

    #[test]
    fn weighted_means_hand_cases() {
        assert_eq!(volume_weighted_mean(&[(1.0, 2.0), (1.0, 4.0)]), (3.0, false));
        assert_eq!(volume_weighted_mean(&[(1.0, 0.0), (3.0, 4.0)]), (3.0, false));
        assert_eq!(volume_weighted_mean(&[(2.5, 0.3)]), (0.3, false));
        assert_eq!(volume_weighted_mean(&[(0.0, 1.0), (0.0, 3.0)]), (2.0, true));
        let (h, _) = volume_weighted_harmonic(&[(1.0, 0.5), (1.0, 1.0)]);
        assert!((h - 2.0 / 3.0).abs() < 1e-12);
        let (h, _) = volume_weighted_harmonic(&[(2.0, 1.0), (1.0, 0.25)]);
        assert!((h - 0.5).abs() < 1e-12);
        assert_eq!(volume_weighted_harmonic(&[(1.0, 0.0)]), (0.0, true));
        let (h, _) = volume_weighted_harmonic(&[(1.0, 0.3), (5.0, 0.3), (2.0, 0.3)]);
        assert!((h - 0.3).abs() < 1e-15);
    }

    #[test]
    fn weighted_jacobian_on_mesh_skips_degenerate() {
        let m = synth::grid([2, 1, 1], [1.0; 3]).unwrap();
        let jac = CellMetric {
            values: vec![0.0, 0.5],
            flagged: vec![true, false],
        };
        let out = weighted_jacobian_attribute(&m, &jac, &[1.0, 1.0]);
        let left = m.vertices().iter().position(|p| *p == [0.0, 0.0, 0.0]).unwrap();
        let mid = m.vertices().iter().position(|p| *p == [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(out.values[left], 0.0);
        assert!(out.fallback.contains(&left));
        assert_eq!(out.values[mid], 0.5);
    }

    #[test]
    fn edge_importance_is_max_over_incident_cells() {
        let m = synth::grid([2, 2, 1], [1.0; 3]).unwrap();
        let a = [0.3, 0.3, 0.9, 0.1];
        let e = edge_importance(&m, &a);
        let center = m.edge_index(
            synth::grid_vertex([2, 2, 1], 1, 1, 0),
            synth::grid_vertex([2, 2, 1], 1, 1, 1),
        );
        assert_eq!(e[center.unwrap()], 0.9);
        let corner = m.edge_index(0, synth::grid_vertex([2, 2, 1], 0, 0, 1)).unwrap();
        assert_eq!(e[corner], 0.3);
    }

    #[test]
    fn jacobian_importance_points_at_deformed_cells() {
        let mut m = synth::grid([2, 1, 1], [1.0; 3]).unwrap();
        let far_corner = synth::grid_vertex([2, 1, 1], 2, 1, 1);
        let mut verts = m.vertices().to_vec();
        verts[far_corner] = [2.6, 1.4, 1.5];
        m = HexMesh::build(verts, m.cells().to_vec()).unwrap();
        let f = metric_fields(&m, &Metric::ScaledJacobian, VertexAggregation::Max).unwrap();
        assert_eq!(f.importance.per_cell, vec![0.0, 1.0]);
        assert_eq!(f.raw.per_cell[0], 1.0);
        assert!(f.raw.per_cell[1] < 1.0);
        assert_eq!(f.importance.range, (0.0, 1.0));
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("scaled-jacobian".parse::<Metric>(), Ok(Metric::ScaledJacobian));
        assert_eq!(
            "field:stress".parse::<Metric>(),
            Ok(Metric::Field("stress".into()))
        );
        assert!("field:".parse::<Metric>().is_err());
    }

    #[test]
    fn summary_histogram_has_32_bins() {
        let s = summarize("x", &[0.0, 0.5, 1.0, 1.0]);
        assert_eq!(s.histogram.len(), 32);
        assert_eq!(s.histogram[0], 1);
        assert_eq!(s.histogram[16], 1);
        assert_eq!(s.histogram[31], 2);
        assert_eq!((s.min, s.max), (0.0, 1.0));
    }
}
