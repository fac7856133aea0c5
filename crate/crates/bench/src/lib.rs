//! Shared fixtures for the benchmarks.

use hexlens_core::render::{LensState, RenderParams};
use hexlens_core::{synth, HexMesh};

/// Jittered O-grid cylinder; `scale` 1 gives 1 716 cells, 2 about 14k.
pub fn cylinder(scale: usize) -> HexMesh {
    let mesh = synth::ogrid_cylinder(6 * scale, 4 * scale, 13 * scale)
        .expect("valid procedural mesh");
    synth::jittered(mesh, 0.15, 7)
}

/// Square grid with `n` cells per axis.
pub fn grid(n: usize) -> HexMesh {
    synth::grid([n; 3], [1.0; 3]).expect("valid procedural mesh")
}

pub fn params(width: u32, height: u32) -> RenderParams {
    RenderParams {
        width,
        height,
        ..RenderParams::default()
    }
}

/// Screen lens covering the middle third of the image.
pub fn center_lens(params: &RenderParams) -> LensState {
    LensState::Screen {
        center: [params.width as f64 / 2.0, params.height as f64 / 2.0],
        radius: params.height as f64 / 3.0,
    }
}
