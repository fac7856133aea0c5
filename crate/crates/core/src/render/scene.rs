//! Mesh-derived render inputs, computed once and shared by every frame.

use std::time::Instant;

use crate::geom::Aabb;
use crate::lod::{build_lod, LodEdgeStructure};
use crate::mesh::HexMesh;
use crate::quality::{metric_fields, AttributeField, Metric, MetricError, VertexAggregation};
use crate::sheets::extract_sheets;

use super::camera::Camera;
use super::params::RenderParams;
use super::shade::{EdgeInput, FaceFragmentInputs};

/// By-products of [`Scene::build_with_info`].
#[derive(Clone, Debug)]
pub struct BuildInfo {
    /// The metric as measured (before normalization to importance).
    pub raw_metric: AttributeField,
    pub degenerate_cells: usize,
    pub metric_ms: f64,
    /// Sheet extraction plus LoD construction.
    pub lod_ms: f64,
}

/// Immutable per-mesh state: the mesh, its importance field, its edge LoD
/// and the per-face fragment inputs derived from them.
#[derive(Clone, Debug)]
pub struct Scene {
    mesh: HexMesh,
    importance: AttributeField,
    lod: LodEdgeStructure,
    sheet_count: usize,
    faces: Vec<FaceFragmentInputs>,
    bounds: Aabb,
    mean_edge_length: f64,
}

impl Scene {
    /// `importance` must be normalized to `[0, 1]` and sized for `mesh`.
    pub fn new(mesh: HexMesh, importance: AttributeField, lod: LodEdgeStructure) -> Scene {
        assert_eq!(importance.per_vertex.len(), mesh.num_vertices());
        assert_eq!(importance.per_edge.len(), mesh.num_edges());
        assert_eq!(lod.e_level.len(), mesh.num_edges());
        let faces = (0..mesh.num_faces())
            .map(|f| {
                let v = mesh.faces()[f];
                let edges = std::array::from_fn(|k| {
                    let (a, b) = (v[k], v[(k + 1) % 4]);
                    let e = mesh.edge_index(a, b).expect("face edges exist");
                    EdgeInput {
                        attr: importance.per_edge[e],
                        level: lod.e_level[e],
                        endpoint_importance: [importance.per_vertex[a], importance.per_vertex[b]],
                    }
                });
                FaceFragmentInputs {
                    corners: mesh.face_corners(f),
                    edges,
                    importance: 0.0,
                }
            })
            .collect();
        let bounds = mesh.bounds().expect("meshes have vertices");
        let mean_edge_length = mesh.mean_edge_length();
        Scene {
            mesh,
            importance,
            lod,
            sheet_count: 0,
            faces,
            bounds,
            mean_edge_length,
        }
    }

    /// Computes the metric, sheets and LoD for `mesh`.
    pub fn build(
        mesh: HexMesh,
        metric: &Metric,
        aggregation: VertexAggregation,
    ) -> Result<Scene, MetricError> {
        Scene::build_with_info(mesh, metric, aggregation).map(|(scene, _)| scene)
    }

    /// Like [`Scene::build`], also returning the raw metric and timings.
    pub fn build_with_info(
        mesh: HexMesh,
        metric: &Metric,
        aggregation: VertexAggregation,
    ) -> Result<(Scene, BuildInfo), MetricError> {
        let t0 = Instant::now();
        let fields = metric_fields(&mesh, metric, aggregation)?;
        let t1 = Instant::now();
        let sheets = extract_sheets(&mesh);
        let lod = build_lod(&mesh, &sheets);
        let t2 = Instant::now();
        let mut scene = Scene::new(mesh, fields.importance, lod);
        scene.sheet_count = sheets.len();
        let info = BuildInfo {
            raw_metric: fields.raw,
            degenerate_cells: fields.degenerate_cells,
            metric_ms: (t1 - t0).as_secs_f64() * 1e3,
            lod_ms: (t2 - t1).as_secs_f64() * 1e3,
        };
        Ok((scene, info))
    }

    pub fn mesh(&self) -> &HexMesh {
        &self.mesh
    }

    pub fn importance(&self) -> &AttributeField {
        &self.importance
    }

    pub fn lod(&self) -> &LodEdgeStructure {
        &self.lod
    }

    /// Number of sheets the LoD was built from (0 if built externally).
    pub fn sheet_count(&self) -> usize {
        self.sheet_count
    }

    pub fn face_inputs(&self, face: usize) -> &FaceFragmentInputs {
        &self.faces[face]
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.mean_edge_length
    }

    pub fn camera(&self, params: &RenderParams) -> Camera {
        params.camera.resolve(&self.bounds, params.width, params.height)
    }
}
