//! Fixtures shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use hexlens_core::quality::{Metric, VertexAggregation};
use hexlens_core::render::{
    pick_object_lens, render, Background, LensState, RenderParams, RgbaImage, Scene,
};
use hexlens_core::synth;

/// Set to rewrite golden files from the current output.
pub const BLESS_ENV: &str = "HEXLENS_BLESS";

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// The 4×4×4 demo scene: a twisted grid with mildly perturbed interior
/// vertices so the quality field is not uniform.
pub fn demo_scene() -> Scene {
    let mesh = synth::jittered(synth::twisted_grid([4, 4, 4], 0.9).unwrap(), 0.12, 3);
    Scene::build(mesh, &Metric::ScaledJacobian, VertexAggregation::Max).unwrap()
}

pub const GOLDEN_SIZE: (u32, u32) = (320, 180);

fn base_params() -> RenderParams {
    RenderParams {
        width: GOLDEN_SIZE.0,
        height: GOLDEN_SIZE.1,
        ..RenderParams::default()
    }
}

fn center_lens() -> LensState {
    LensState::Screen {
        center: [GOLDEN_SIZE.0 as f64 * 0.5, GOLDEN_SIZE.1 as f64 * 0.5],
        radius: 55.0,
    }
}

pub struct GoldenScene {
    pub name: String,
    pub params: RenderParams,
    pub lens: LensState,
}

/// The curated golden scenes. Every image file `tests/golden/<name>.png`
/// belongs to exactly one entry.
pub fn golden_scenes(scene: &Scene) -> Vec<GoldenScene> {
    let coarsest = scene.lod().level_count - 1;
    let base = base_params();
    let mut out = vec![
        GoldenScene {
            name: "context_only".into(),
            params: base.clone(),
            lens: LensState::Disabled,
        },
        GoldenScene {
            name: "screen_lens".into(),
            params: RenderParams {
                lod: coarsest,
                ..base.clone()
            },
            lens: center_lens(),
        },
    ];
    let camera = scene.camera(&base);
    let picked = pick_object_lens(
        scene.mesh(),
        &camera,
        GOLDEN_SIZE.0 as f64 * 0.5,
        GOLDEN_SIZE.1 as f64 * 0.5,
        0.35,
    )
    .expect("center ray hits the demo mesh");
    out.push(GoldenScene {
        name: "object_lens".into(),
        params: RenderParams {
            lod: coarsest,
            ..base.clone()
        },
        lens: LensState::Object(hexlens_core::render::ObjectLens {
            depth: 0.25,
            ..picked
        }),
    });
    for lod in 0..=coarsest {
        out.push(GoldenScene {
            name: format!("lod_sweep_{lod}"),
            params: RenderParams {
                lod,
                ..base.clone()
            },
            lens: LensState::Disabled,
        });
    }
    for (tag, accent) in [("1_5", 1.5), ("3", 3.0)] {
        out.push(GoldenScene {
            name: format!("accent_{tag}"),
            params: RenderParams {
                lod: coarsest,
                accent,
                face_alpha: 0.3,
                ..base.clone()
            },
            lens: LensState::Disabled,
        });
    }
    out.push(GoldenScene {
        name: "white_background".into(),
        params: RenderParams {
            background: Background::White,
            lod: coarsest,
            ..base
        },
        lens: center_lens(),
    });
    out
}

pub fn render_scene(scene: &Scene, g: &GoldenScene) -> RgbaImage {
    render(scene, &g.params, &g.lens, None).unwrap().image
}

/// Compares an image with its golden file, pixel for pixel after 8-bit
/// quantization. With `HEXLENS_BLESS` set the golden is rewritten. On a
/// mismatch the actual image is saved next to the build output.
pub fn check_golden(name: &str, image: &RgbaImage) -> Result<(), String> {
    let path = golden_dir().join(format!("{name}.png"));
    let png = image.encode_png().map_err(|e| e.to_string())?;
    if std::env::var_os(BLESS_ENV).is_some() {
        std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        std::fs::write(&path, &png).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let bytes = std::fs::read(&path)
        .map_err(|e| format!("{}: {e} (run with {BLESS_ENV}=1 to create)", path.display()))?;
    let expected = RgbaImage::decode_png(&bytes).map_err(|e| e.to_string())?;
    if (expected.width, expected.height) != (image.width, image.height) {
        return Err(format!(
            "{name}: size {}×{} != golden {}×{}",
            image.width, image.height, expected.width, expected.height
        ));
    }
    let (a, b) = (image.to_rgba8(), expected.to_rgba8());
    let differing = a.chunks(4).zip(b.chunks(4)).filter(|(x, y)| x != y).count();
    if differing == 0 {
        return Ok(());
    }
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("{name}.actual.png"));
    let _ = std::fs::write(&out, &png);
    Err(format!(
        "{name}: {differing} pixels differ from the golden (actual saved to {})",
        out.display()
    ))
}
