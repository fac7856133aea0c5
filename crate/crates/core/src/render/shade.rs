//! Per-fragment focus+context shading.
//!
//! A fragment on a face is drawn as an edge when it lies within the edge
//! width of one of the face's drawn edges, and as a translucent face
//! otherwise. In focus, edges whose importance reaches the threshold are
//! drawn even when the current LoD hides them; in context only LoD edges
//! are drawn, and faces next to hidden edges get their opacity boosted so
//! the coarse structure stays readable.

use crate::geom::{self, Vec3};
use serde::{Deserialize, Serialize};

use super::params::{LensState, RenderParams, Rgb, TransferFunction};

/// `t²(3 − 2t)` with `t = clamp((x − a) / (b − a), 0, 1)`.
pub fn smoothstep(a: f64, b: f64, x: f64) -> f64 {
    let t = ((x - a) / (b - a)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Focus for a normalized lens distance: `1 − smoothstep(0.7, 1, dist)`.
pub fn focus_from_dist(dist: f64) -> f64 {
    1.0 - smoothstep(0.7, 1.0, dist)
}

/// `(focus, dist)` of a fragment at pixel position `pixel` and model-space
/// position `world`. A disabled lens gives `(0, 1)`: everything is context.
pub fn focus_factor(pixel: [f64; 2], world: Vec3, lens: &LensState) -> (f64, f64) {
    let dist = match lens {
        LensState::Disabled => return (0.0, 1.0),
        LensState::Screen { center, radius } => {
            (pixel[0] - center[0]).hypot(pixel[1] - center[1]) / radius
        }
        LensState::Object(o) => geom::norm(geom::sub(world, o.point())) / o.radius,
    };
    (focus_from_dist(dist), dist)
}

/// Nearest edge of a face among a subset of its edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeHit {
    /// Distance in model units; `+∞` when the subset is empty.
    pub dist: f64,
    /// Local edge index `k` (edge from corner `k` to corner `k + 1`).
    pub edge: Option<usize>,
    /// Parameter of the closest point along the edge.
    pub t: f64,
}

/// Minimum point-to-segment distance from `p` to the face edges selected by
/// `mask`. Edges left out of the mask never attract fragments, so hidden
/// edges leave no gaps where drawn edges meet.
pub fn edge_distance(p: Vec3, corners: &[Vec3; 4], mask: [bool; 4]) -> EdgeHit {
    let mut best = EdgeHit {
        dist: f64::INFINITY,
        edge: None,
        t: 0.0,
    };
    for k in (0..4).filter(|&k| mask[k]) {
        let (d, t) = geom::point_segment_distance(p, corners[k], corners[(k + 1) % 4]);
        if d < best.dist {
            best = EdgeHit {
                dist: d,
                edge: Some(k),
                t,
            };
        }
    }
    best
}

/// Per-edge data a face fragment needs. Edge `k` runs from corner `k` to
/// corner `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeInput {
    /// Edge importance (maximum over incident cells).
    pub attr: f64,
    /// Highest LoD level at which the edge is drawn.
    pub level: u32,
    /// Importance at the two endpoints, in edge direction.
    pub endpoint_importance: [f64; 2],
}

/// Everything a fragment reads from its face, independent of which of the
/// face's two triangles produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceFragmentInputs {
    pub corners: [Vec3; 4],
    pub edges: [EdgeInput; 4],
    /// Per-vertex importance interpolated at the fragment.
    pub importance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FragmentKind {
    FocusEdge,
    ContextEdge,
    FocusFace,
    ContextFace,
    Halo,
    Silhouette,
}

impl FragmentKind {
    pub fn is_edge(self) -> bool {
        matches!(self, FragmentKind::FocusEdge | FragmentKind::ContextEdge)
    }
}

/// Shading constants resolved for one mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadingParams {
    pub w_base: f64,
    pub delta: f64,
    pub lod: u32,
    pub accent: f64,
    pub face_alpha: f64,
    pub transfer_function: TransferFunction,
    pub halo_width: f64,
    pub desaturation: f64,
    pub focus_darken: f64,
    pub context_brighten: f64,
}

impl ShadingParams {
    /// Takes `w_base` from the params or `0.15 × mean_edge_length`.
    pub fn resolve(params: &RenderParams, mean_edge_length: f64) -> ShadingParams {
        ShadingParams {
            w_base: params.w_base.unwrap_or(0.15 * mean_edge_length),
            delta: params.delta,
            lod: params.lod,
            accent: params.accent,
            face_alpha: params.face_alpha,
            transfer_function: params.transfer_function.clone(),
            halo_width: params.halo_width,
            desaturation: params.desaturation,
            focus_darken: params.focus_darken,
            context_brighten: params.context_brighten,
        }
    }
}

/// Shading result. `color` is premultiplied by `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shaded {
    pub color: Rgb,
    pub alpha: f64,
    pub kind: FragmentKind,
    /// Edge opacity before blending with the face term.
    pub alpha_e: f64,
    /// Face opacity multiplier (1 or the accent strength).
    pub s_e: f64,
    /// Opacity of the white halo fragment to emit behind this one, if any.
    pub halo: Option<f64>,
}

/// Shades one face fragment at model-space position `p`.
///
/// With `w = (1 + 0.3·focus)·w_base`:
/// - an edge is a focus edge if it is within `w` and either visible at the
///   LoD or at least δ important; a context edge needs LoD visibility;
/// - `α_e = lerp(e_context, e_focus, focus)`;
/// - a fragment that is not an edge but lies within `⅔·w_base` of any edge
///   (necessarily a hidden one) has its face opacity multiplied by `s`;
/// - `α_f = α̂_f · min(dist, 1)⁴ · opacity_tf(importance)`;
/// - `C = α_e·C_e + (1 − α_e)·s_e·α_f·C_f`, `α = α_e + (1 − α_e)·s_e·α_f`,
///   with `α` clamped to 1 (and `C` scaled along).
///
/// Edge colors come from the transfer function along the nearest edge,
/// darkened in focus and brightened in context. Focus fragments are
/// desaturated with depth.
pub fn shade_fragment(
    p: Vec3,
    face: &FaceFragmentInputs,
    focus: f64,
    dist: f64,
    depth: f64,
    sp: &ShadingParams,
) -> Shaded {
    let w = (1.0 + 0.3 * focus) * sp.w_base;
    let lod_mask = face.edges.map(|e| e.level >= sp.lod);
    let focus_mask = face.edges.map(|e| e.level >= sp.lod || e.attr >= sp.delta);
    let hit_context = edge_distance(p, &face.corners, lod_mask);
    let hit_focus = edge_distance(p, &face.corners, focus_mask);
    let e_context = if hit_context.dist <= w { 1.0 } else { 0.0 };
    let e_focus = if hit_focus.dist <= w { 1.0 } else { 0.0 };
    let alpha_e = e_context + (e_focus - e_context) * focus;

    let s_e = if alpha_e == 0.0 {
        let nearest_any = edge_distance(p, &face.corners, [true; 4]);
        if nearest_any.dist <= 2.0 / 3.0 * sp.w_base {
            sp.accent
        } else {
            1.0
        }
    } else {
        1.0
    };

    let tf = &sp.transfer_function;
    let (c_face, face_opacity) = tf.eval(face.importance);
    let d = dist.clamp(0.0, 1.0);
    let alpha_f = sp.face_alpha * d.powi(4) * face_opacity;

    let c_edge = if alpha_e > 0.0 {
        let hit = if focus > 0.0 { hit_focus } else { hit_context };
        let k = hit.edge.expect("edge fragments have a nearest edge");
        let [ia, ib] = face.edges[k].endpoint_importance;
        let (c, _) = tf.eval(ia + (ib - ia) * hit.t);
        let factor = sp.context_brighten + (sp.focus_darken - sp.context_brighten) * focus;
        c.map(|x| (x * factor).clamp(0.0, 1.0))
    } else {
        [0.0; 3]
    };

    let face_weight = (1.0 - alpha_e) * s_e * alpha_f;
    let mut color = [0.0; 3];
    for k in 0..3 {
        color[k] = alpha_e * c_edge[k] + face_weight * c_face[k];
    }
    let mut alpha = alpha_e + face_weight;
    if alpha > 1.0 {
        color = geom::scale(color, 1.0 / alpha);
        alpha = 1.0;
    }

    if focus > 0.0 && sp.desaturation > 0.0 {
        let luma = 0.299 * color[0] + 0.587 * color[1] + 0.114 * color[2];
        let s = (sp.desaturation * focus * depth.clamp(0.0, 1.0)).clamp(0.0, 1.0);
        color = color.map(|c| c + (luma - c) * s);
    }

    let kind = match (alpha_e > 0.0, focus > 0.0) {
        (true, true) => FragmentKind::FocusEdge,
        (true, false) => FragmentKind::ContextEdge,
        (false, true) => FragmentKind::FocusFace,
        (false, false) => FragmentKind::ContextFace,
    };
    let in_band = hit_focus.dist > w && hit_focus.dist <= w * (1.0 + sp.halo_width * focus);
    let halo = (focus > 0.0 && in_band).then_some(focus);
    Shaded {
        color,
        alpha,
        kind,
        alpha_e,
        s_e,
        halo,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::params::ObjectLens;

    fn square() -> [Vec3; 4] {
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]
    }

    #[test]
    fn smoothstep_points() {
        assert_eq!(focus_from_dist(0.0), 1.0);
        assert_eq!(focus_from_dist(0.7), 1.0);
        assert_eq!(focus_from_dist(1.0), 0.0);
        assert_eq!(focus_from_dist(3.0), 0.0);
        assert!((focus_from_dist(0.85) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lens_modes() {
        assert_eq!(focus_factor([5.0, 5.0], [0.0; 3], &LensState::Disabled), (0.0, 1.0));
        let screen = LensState::Screen {
            center: [10.0, 10.0],
            radius: 20.0,
        };
        let (f, d) = focus_factor([10.0, 27.0], [0.0; 3], &screen);
        assert!((d - 0.85).abs() < 1e-12 && (f - 0.5).abs() < 1e-12);
        let obj = LensState::Object(ObjectLens::at([1.0, 0.0, 0.0], 2.0));
        let (f, d) = focus_factor([0.0; 2], [1.0, 0.0, 0.0], &obj);
        assert_eq!((f, d), (1.0, 0.0));
    }

    #[test]
    fn edge_distance_cases() {
        let c = square();
        let all = edge_distance([0.0; 3], &c, [true; 4]);
        assert_eq!(all.dist, 0.0);
        assert_eq!(edge_distance([0.5, 0.5, 0.0], &c, [true; 4]).dist, 0.5);
        let masked = edge_distance([0.5, 0.5, 0.0], &c, [false, true, false, true]);
        assert_eq!(masked.dist, 0.5);
        assert!(matches!(masked.edge, Some(1) | Some(3)));
        let none = edge_distance([0.5, 0.5, 0.0], &c, [false; 4]);
        assert!(none.dist.is_infinite() && none.edge.is_none());
        // masking the nearest edge pulls the fragment to the next one
        let p = [0.5, 0.1, 0.0];
        assert!((edge_distance(p, &c, [true; 4]).dist - 0.1).abs() < 1e-15);
        assert!((edge_distance(p, &c, [false, true, true, true]).dist - 0.5).abs() < 1e-15);
    }

    #[test]
    fn halo_only_in_focus() {
        let sp = ShadingParams {
            w_base: 0.1,
            delta: 2.0,
            lod: 0,
            accent: 1.0,
            face_alpha: 0.5,
            transfer_function: TransferFunction::default(),
            halo_width: 0.5,
            desaturation: 0.0,
            focus_darken: 0.8,
            context_brighten: 1.2,
        };
        let e = EdgeInput {
            attr: 0.0,
            level: 0,
            endpoint_importance: [0.0; 2],
        };
        let face = FaceFragmentInputs {
            corners: square(),
            edges: [e; 4],
            importance: 0.5,
        };
        // w = 0.13 at focus 1, band up to 0.195
        let p = [0.5, 0.15, 0.0];
        assert_eq!(shade_fragment(p, &face, 1.0, 0.0, 0.5, &sp).halo, Some(1.0));
        assert_eq!(shade_fragment(p, &face, 0.0, 1.0, 0.5, &sp).halo, None);
        assert_eq!(shade_fragment([0.5, 0.5, 0.0], &face, 1.0, 0.0, 0.5, &sp).halo, None);
    }
}
