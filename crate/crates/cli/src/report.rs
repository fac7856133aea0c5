//! JSON summaries shared by the CLI and the service.

use hexlens_core::lod::LodEdgeStructure;
use hexlens_core::mesh::{HexMesh, Orientation, SingularClass};
use hexlens_core::quality::{self, Summary};
use hexlens_core::render::{RenderStats, Scene};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshSummary {
    pub cells: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub boundary_faces: usize,
    pub singular_valence1: usize,
    pub singular_other: usize,
    pub orientation: &'static str,
    pub conforming: bool,
}

impl MeshSummary {
    pub fn of(mesh: &HexMesh) -> MeshSummary {
        let singular = mesh.singular_edges();
        let v1 = singular
            .iter()
            .filter(|s| s.class == SingularClass::Valence1)
            .count();
        MeshSummary {
            cells: mesh.num_cells(),
            vertices: mesh.num_vertices(),
            edges: mesh.num_edges(),
            faces: mesh.num_faces(),
            boundary_faces: mesh.boundary_faces().count(),
            singular_valence1: v1,
            singular_other: singular.len() - v1,
            orientation: match mesh.orientation() {
                Orientation::Positive => "positive",
                Orientation::Negative => "negative",
                Orientation::Mixed => "mixed",
            },
            conforming: mesh.is_conforming(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LodSummary {
    pub level_count: u32,
    pub sheets: usize,
    pub merges: usize,
    /// Number of edges drawn at each level.
    pub visible_edges: Vec<usize>,
}

impl LodSummary {
    pub fn of(lod: &LodEdgeStructure, sheets: usize) -> LodSummary {
        LodSummary {
            level_count: lod.level_count,
            sheets,
            merges: lod.merges.len(),
            visible_edges: (0..lod.level_count).map(|k| lod.visible_count(k)).collect(),
        }
    }
}

/// Edge line sets grouped by the highest level at which they are drawn.
/// Level `k` shows every group with `level ≥ k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LodLines {
    pub level_count: u32,
    pub vertices: Vec<[f64; 3]>,
    pub levels: Vec<LevelLines>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelLines {
    pub level: u32,
    pub edges: Vec<[usize; 2]>,
}

impl LodLines {
    pub fn of(mesh: &HexMesh, lod: &LodEdgeStructure) -> LodLines {
        let mut levels: Vec<LevelLines> = (0..lod.level_count)
            .map(|level| LevelLines {
                level,
                edges: Vec::new(),
            })
            .collect();
        for (e, &edge) in mesh.edges().iter().enumerate() {
            levels[lod.e_level[e] as usize].edges.push(edge);
        }
        LodLines {
            level_count: lod.level_count,
            vertices: mesh.vertices().to_vec(),
            levels,
        }
    }
}

/// Rough size of the per-mesh render buffers as a GPU pipeline would hold
/// them: `f32` positions plus per-vertex importance, 4 indices per face,
/// and importance, level and endpoint indices per edge.
pub fn mesh_buffer_bytes(mesh: &HexMesh) -> usize {
    mesh.num_vertices() * (12 + 4) + mesh.num_faces() * 16 + mesh.num_edges() * (4 + 4 + 8)
}

/// Report written by `render --stats`: one row of mesh facts and one of
/// frame timings.
#[derive(Clone, Debug, Serialize)]
pub struct RenderReport {
    pub mesh: String,
    pub cells: usize,
    pub mesh_buffer_bytes: usize,
    pub metric_ms: f64,
    pub lod_ms: f64,
    pub sheets: usize,
    pub level_count: u32,
    pub width: u32,
    pub height: u32,
    pub fragments: u64,
    pub max_fragments_per_pixel: usize,
    pub shading_ms: f64,
    pub composite_ms: f64,
    pub render_ms: f64,
    pub threads: usize,
    pub degenerate_cells: usize,
    pub metric: Summary,
}

impl RenderReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        scene: &Scene,
        metric: Summary,
        degenerate_cells: usize,
        metric_ms: f64,
        lod_ms: f64,
        size: (u32, u32),
        stats: &RenderStats,
    ) -> RenderReport {
        RenderReport {
            mesh: name.to_string(),
            cells: scene.mesh().num_cells(),
            mesh_buffer_bytes: mesh_buffer_bytes(scene.mesh()),
            metric_ms,
            lod_ms,
            sheets: scene.sheet_count(),
            level_count: scene.lod().level_count,
            width: size.0,
            height: size.1,
            fragments: stats.fragments,
            max_fragments_per_pixel: stats.max_fragments_per_pixel,
            shading_ms: stats.shading_ms,
            composite_ms: stats.composite_ms,
            render_ms: stats.total_ms,
            threads: stats.threads,
            degenerate_cells,
            metric,
        }
    }
}

/// Metric summary used by `info` and the reports.
pub fn quality_summary(name: &str, values: &[f64]) -> Summary {
    quality::summarize(name, values)
}
