//! Deterministic focus+context renderer.
//!
//! Every face is split into two triangles and rasterized; each fragment is
//! classified as edge or face, in focus or in context, and shaded. The
//! fragments of a pixel are ordered by depth and alpha-blended.
//! Work is split into independent 64×64 tiles, so the image does not
//! depend on the number of threads.

pub mod camera;
pub mod composite;
pub mod image;
pub mod params;
pub mod pick;
pub mod pipeline;
pub mod raster;
pub mod scene;
pub mod shade;
pub mod silhouette;

pub use camera::{Camera, CameraSpec};
pub use composite::{composite_pixel, sort_and_composite, Fragment, FragmentBuffer};
pub use image::RgbaImage;
pub use params::{Background, ControlPoint, LensState, ObjectLens, RenderParams, TransferFunction};
pub use pick::pick_object_lens;
pub use pipeline::{boundary_depth, rasterize, render, RenderOutput, RenderStats};
pub use scene::{BuildInfo, Scene};
pub use shade::{
    edge_distance, focus_factor, shade_fragment, EdgeInput, FaceFragmentInputs, FragmentKind,
    ShadingParams,
};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("invalid render parameter: {0}")]
    InvalidParam(String),
    #[error("fragment list capacity exceeded: a pixel needs {required} fragments but the cap is {capacity}")]
    CapacityExceeded { capacity: usize, required: usize },
    #[error("png encoding failed: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("png decoding failed: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("cannot start render threads: {0}")]
    ThreadPool(String),
}
