//! Inspection toolkit for hexahedral meshes: topology and file ingestion,
//! cell quality measures, sheet-based edge level-of-detail, and a
//! deterministic focus+context fragment renderer.

pub mod geom;
pub mod lod;
pub mod mesh;
pub mod quality;
pub mod render;
pub mod sheets;
pub mod synth;

pub use geom::Vec3;
pub use mesh::{HexMesh, MeshError};
pub use lod::{build_lod, LodEdgeStructure};
pub use sheets::{extract_sheets, Sheet};
pub use quality::{AttributeField, Metric, VertexAggregation};
pub use render::{render, LensState, RenderParams, RgbaImage, Scene};
