//! Frame assembly: triangle setup, tile binning, parallel per-tile
//! rasterization, shading, sorting and compositing, then silhouettes.

use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

use super::camera::Camera;
use super::composite::{composite_pixel, Fragment, FragmentBuffer};
use super::image::RgbaImage;
use super::params::{LensState, RenderParams};
use super::raster::{ClipVertex, Triangle};
use super::scene::Scene;
use super::shade::{focus_factor, shade_fragment, FragmentKind, ShadingParams};
use super::silhouette::{overlay_silhouettes, silhouette_mask};
use super::RenderError;

/// Side length of the square tiles rendered independently.
pub const TILE: u32 = 64;

/// Environment variable capping render parallelism.
pub const THREADS_ENV: &str = "HEXLENS_THREADS";

/// Render counters and timings. Timings are summed over tiles (CPU time
/// spent in each stage, not wall clock), apart from `total_ms`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RenderStats {
    pub triangles: usize,
    pub fragments: u64,
    pub max_fragments_per_pixel: usize,
    /// Rasterization and focus+context shading.
    pub shading_ms: f64,
    /// Depth ordering and blending.
    pub composite_ms: f64,
    pub silhouette_pixels: usize,
    pub total_ms: f64,
    pub threads: usize,
}

#[derive(Clone, Debug)]
pub struct RenderOutput {
    pub image: RgbaImage,
    pub stats: RenderStats,
}

struct SetupTriangle {
    tri: Triangle,
    face: u32,
    /// 0 or 1: which half of the face quad.
    half: u8,
    boundary: bool,
}

/// Per-frame state shared read-only by all tiles.
struct Frame<'s> {
    scene: &'s Scene,
    camera: Camera,
    shading: ShadingParams,
    lens: LensState,
    halo_offset: f64,
    triangles: Vec<SetupTriangle>,
}

impl<'s> Frame<'s> {
    fn new(scene: &'s Scene, params: &RenderParams, lens: &LensState) -> Frame<'s> {
        let camera = scene.camera(params);
        let mesh = scene.mesh();
        let imp = &scene.importance().per_vertex;
        let mut triangles = Vec::new();
        for (f, v) in mesh.faces().iter().enumerate() {
            let cv = v.map(|k| ClipVertex::new(&camera, mesh.vertices()[k], imp[k]));
            for (half, tri) in [[cv[0], cv[1], cv[2]], [cv[0], cv[2], cv[3]]].into_iter().enumerate() {
                for t in Triangle::setup_clipped(&camera, tri) {
                    triangles.push(SetupTriangle {
                        tri: t,
                        face: f as u32,
                        half: half as u8,
                        boundary: mesh.is_boundary_face(f),
                    });
                }
            }
        }
        Frame {
            scene,
            camera,
            shading: ShadingParams::resolve(params, scene.mean_edge_length()),
            lens: *lens,
            halo_offset: params.halo_offset,
            triangles,
        }
    }

    /// Shades every fragment of the listed triangles inside `rect`.
    /// Returns `(local pixel, fragment)` pairs in submission order and the
    /// nearest boundary-face depth per pixel (`+∞` where uncovered).
    fn rasterize(&self, rect: [i64; 4], tris: &[u32]) -> (Vec<(u32, Fragment)>, Vec<f32>) {
        let w = (rect[2] - rect[0]) as usize;
        let h = (rect[3] - rect[1]) as usize;
        let mut items = Vec::new();
        let mut depth = vec![f32::INFINITY; w * h];
        for &ti in tris {
            let st = &self.triangles[ti as usize];
            let mut inputs = *self.scene.face_inputs(st.face as usize);
            let seq = (st.face * 2 + st.half as u32) * 2;
            st.tri.rasterize(rect, |px, py, it| {
                let local = (py - rect[1]) as usize * w + (px - rect[0]) as usize;
                let d = self.camera.normalized_depth(it.z).max(0.0);
                if st.boundary {
                    depth[local] = depth[local].min(d as f32);
                }
                let (focus, dist) =
                    focus_factor([px as f64 + 0.5, py as f64 + 0.5], it.world, &self.lens);
                inputs.importance = it.importance;
                let s = shade_fragment(it.world, &inputs, focus, dist, d, &self.shading);
                if s.alpha > 0.0 {
                    let inv = 1.0 / s.alpha;
                    items.push((
                        local as u32,
                        Fragment {
                            depth: d as f32,
                            seq,
                            color: s.color.map(|c| (c * inv) as f32),
                            alpha: s.alpha as f32,
                            kind: s.kind,
                        },
                    ));
                }
                if let Some(alpha) = s.halo {
                    items.push((
                        local as u32,
                        Fragment {
                            depth: (d + self.halo_offset) as f32,
                            seq: seq + 1,
                            color: [1.0; 3],
                            alpha: alpha as f32,
                            kind: FragmentKind::Halo,
                        },
                    ));
                }
            });
        }
        (items, depth)
    }
}

struct TileOut {
    rect: [i64; 4],
    pixels: Vec<[f64; 3]>,
    depth: Vec<f32>,
    fragments: u64,
    max_per_pixel: usize,
    shading: f64,
    composite: f64,
}

/// Thread count from `HEXLENS_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

/// Runs `f` on a pool of `threads` workers, or on the global pool (capped
/// by `HEXLENS_THREADS`) when `None`.
pub fn with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> Result<(R, usize), RenderError> {
    match threads.or_else(threads_from_env) {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RenderError::ThreadPool(e.to_string()))?;
            Ok((pool.install(f), n))
        }
        None => Ok((f(), rayon::current_num_threads())),
    }
}

/// Renders a frame. Output depends only on the scene, params and lens —
/// never on the thread count.
pub fn render(
    scene: &Scene,
    params: &RenderParams,
    lens: &LensState,
    threads: Option<usize>,
) -> Result<RenderOutput, RenderError> {
    params.validate()?;
    lens.validate()?;
    let start = Instant::now();
    let (result, threads) = with_threads(threads, || render_tiles(scene, params, lens))?;
    let (image, mut stats) = result?;
    stats.threads = threads;
    stats.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(RenderOutput { image, stats })
}

fn render_tiles(
    scene: &Scene,
    params: &RenderParams,
    lens: &LensState,
) -> Result<(RgbaImage, RenderStats), RenderError> {
    let (w, h) = (params.width, params.height);
    let frame = Frame::new(scene, params, lens);
    let (tx, ty) = (w.div_ceil(TILE) as i64, h.div_ceil(TILE) as i64);
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); (tx * ty) as usize];
    for (k, st) in frame.triangles.iter().enumerate() {
        let b = st.tri.bbox;
        let (x0, y0) = (b[0].max(0) / TILE as i64, b[1].max(0) / TILE as i64);
        let (x1, y1) = (
            b[2].min(w as i64 - 1) / TILE as i64,
            b[3].min(h as i64 - 1) / TILE as i64,
        );
        for j in y0..=y1 {
            for i in x0..=x1 {
                bins[(j * tx + i) as usize].push(k as u32);
            }
        }
    }
    let background = params.background.rgb();
    let capacity = params.max_fragments_per_pixel;
    let tiles: Vec<TileOut> = (0..bins.len())
        .into_par_iter()
        .map(|t| {
            let (i, j) = (t as i64 % tx, t as i64 / tx);
            let rect = [
                i * TILE as i64,
                j * TILE as i64,
                ((i + 1) * TILE as i64).min(w as i64),
                ((j + 1) * TILE as i64).min(h as i64),
            ];
            let (rw, rh) = ((rect[2] - rect[0]) as u32, (rect[3] - rect[1]) as u32);
            let t0 = Instant::now();
            let (items, depth) = frame.rasterize(rect, &bins[t]);
            let t1 = Instant::now();
            let buf = FragmentBuffer::from_unsorted(rw, rh, &items);
            let max_per_pixel = buf.max_per_pixel();
            let pixels = if max_per_pixel > capacity {
                Vec::new()
            } else {
                (0..rh)
                    .flat_map(|y| (0..rw).map(move |x| (x, y)))
                    .map(|(x, y)| composite_pixel(buf.pixel(x, y), background))
                    .collect()
            };
            TileOut {
                rect,
                pixels,
                depth,
                fragments: buf.total() as u64,
                max_per_pixel,
                shading: (t1 - t0).as_secs_f64() * 1e3,
                composite: t1.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect();

    let mut stats = RenderStats {
        triangles: frame.triangles.len(),
        ..RenderStats::default()
    };
    for t in &tiles {
        stats.fragments += t.fragments;
        stats.max_fragments_per_pixel = stats.max_fragments_per_pixel.max(t.max_per_pixel);
        stats.shading_ms += t.shading;
        stats.composite_ms += t.composite;
    }
    if stats.max_fragments_per_pixel > capacity {
        return Err(RenderError::CapacityExceeded {
            capacity,
            required: stats.max_fragments_per_pixel,
        });
    }

    let mut image = RgbaImage::new(w, h, background);
    let mut depth = vec![f32::INFINITY; (w * h) as usize];
    for t in &tiles {
        let rw = (t.rect[2] - t.rect[0]) as usize;
        for (k, (c, d)) in t.pixels.iter().zip(&t.depth).enumerate() {
            let (x, y) = (t.rect[0] as usize + k % rw, t.rect[1] as usize + k / rw);
            image.pixels[y * w as usize + x] = [c[0] as f32, c[1] as f32, c[2] as f32, 1.0];
            depth[y * w as usize + x] = *d;
        }
    }
    if params.silhouettes {
        let mask = silhouette_mask(&depth, w, h, params.silhouette_threshold as f32);
        stats.silhouette_pixels = overlay_silhouettes(&mut image, &mask);
    }
    Ok((image, stats))
}

/// All fragments of a frame in one buffer, without compositing. Intended
/// for audits and small images.
pub fn rasterize(scene: &Scene, params: &RenderParams, lens: &LensState) -> Result<FragmentBuffer, RenderError> {
    params.validate()?;
    lens.validate()?;
    let frame = Frame::new(scene, params, lens);
    let all: Vec<u32> = (0..frame.triangles.len() as u32).collect();
    let rect = [0, 0, params.width as i64, params.height as i64];
    let (items, _) = frame.rasterize(rect, &all);
    Ok(FragmentBuffer::from_unsorted(params.width, params.height, &items))
}

/// Nearest boundary-face depth per pixel (`+∞` where no boundary face is
/// hit), rendered opaquely.
pub fn boundary_depth(scene: &Scene, params: &RenderParams) -> Vec<f32> {
    let frame = Frame::new(scene, params, &LensState::Disabled);
    let boundary: Vec<u32> = (0..frame.triangles.len() as u32)
        .filter(|&k| frame.triangles[k as usize].boundary)
        .collect();
    let rect = [0, 0, params.width as i64, params.height as i64];
    frame.rasterize(rect, &boundary).1
}
