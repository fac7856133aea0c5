//! User-tunable render parameters, transfer function and lens state.

use crate::geom::{self, Vec3};
use serde::{Deserialize, Serialize};

use super::camera::CameraSpec;
use super::RenderError;

pub type Rgb = [f64; 3];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    #[default]
    Black,
    White,
}

impl Background {
    pub fn rgb(self) -> Rgb {
        match self {
            Background::Black => [0.0; 3],
            Background::White => [1.0; 3],
        }
    }
}

impl std::str::FromStr for Background {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "black" => Ok(Background::Black),
            "white" => Ok(Background::White),
            _ => Err(format!("unknown background {s:?}; expected black or white")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub t: f64,
    pub color: Rgb,
    pub opacity: f64,
}

/// Piecewise-linear map from importance to color and opacity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ControlPoint>", into = "Vec<ControlPoint>")]
pub struct TransferFunction {
    points: Vec<ControlPoint>,
}

impl Default for TransferFunction {
    /// Blue at importance 0 rising to opaque red at 1.
    fn default() -> Self {
        TransferFunction {
            points: vec![
                ControlPoint {
                    t: 0.0,
                    color: [0.0, 0.0, 1.0],
                    opacity: 0.0,
                },
                ControlPoint {
                    t: 1.0,
                    color: [1.0, 0.0, 0.0],
                    opacity: 1.0,
                },
            ],
        }
    }
}

impl TransferFunction {
    /// Validates and wraps control points: at least two, `t` in `[0, 1]`
    /// and non-decreasing, colors and opacities in `[0, 1]`.
    pub fn new(points: Vec<ControlPoint>) -> Result<Self, RenderError> {
        let bad = |m: String| Err(RenderError::InvalidParam(m));
        if points.len() < 2 {
            return bad("transfer function needs at least 2 control points".into());
        }
        for (k, p) in points.iter().enumerate() {
            let unit = |x: f64| (0.0..=1.0).contains(&x);
            if !unit(p.t) {
                return bad(format!("control point {k}: t = {} outside [0, 1]", p.t));
            }
            if !p.color.iter().all(|&c| unit(c)) || !unit(p.opacity) {
                return bad(format!("control point {k}: color/opacity outside [0, 1]"));
            }
            if k > 0 && p.t < points[k - 1].t {
                return bad(format!("control point {k}: t values are not sorted"));
            }
        }
        Ok(TransferFunction { points })
    }

    /// Same color ramp with a constant opacity.
    pub fn with_constant_opacity(mut self, opacity: f64) -> Self {
        self.points.iter_mut().for_each(|p| p.opacity = opacity);
        self
    }

    pub fn points(&self) -> &[ControlPoint] {
        &self.points
    }

    /// `(color, opacity)` at importance `x`, clamped to the end points.
    pub fn eval(&self, x: f64) -> (Rgb, f64) {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if x.is_nan() || x <= first.t {
            return (first.color, first.opacity);
        }
        if x >= last.t {
            return (last.color, last.opacity);
        }
        let k = pts.partition_point(|p| p.t <= x);
        let (a, b) = (pts[k - 1], pts[k]);
        let s = (x - a.t) / (b.t - a.t);
        (geom::lerp3(a.color, b.color, s), a.opacity + (b.opacity - a.opacity) * s)
    }
}

impl TryFrom<Vec<ControlPoint>> for TransferFunction {
    type Error = RenderError;

    fn try_from(points: Vec<ControlPoint>) -> Result<Self, Self::Error> {
        TransferFunction::new(points)
    }
}

impl From<TransferFunction> for Vec<ControlPoint> {
    fn from(tf: TransferFunction) -> Self {
        tf.points
    }
}

/// Every knob of a render. Missing JSON fields take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderParams {
    pub width: u32,
    pub height: u32,
    pub camera: CameraSpec,
    /// Minimum edge width in model units; `None` means 0.15 × mean edge
    /// length of the mesh.
    pub w_base: Option<f64>,
    /// Edge-importance threshold: in focus, edges with importance ≥ δ are
    /// drawn regardless of LoD.
    pub delta: f64,
    pub lod: u32,
    /// Opacity multiplier for faces next to hidden context edges (≥ 1).
    pub accent: f64,
    /// User face opacity.
    pub face_alpha: f64,
    pub transfer_function: TransferFunction,
    pub background: Background,
    /// Halo band width as a fraction of the edge width, scaled by focus.
    pub halo_width: f64,
    /// Normalized depth offset pushing halos behind their edge.
    pub halo_offset: f64,
    /// Strength of depth desaturation for focus fragments.
    pub desaturation: f64,
    /// Focus edges are darkened by this RGB factor.
    pub focus_darken: f64,
    /// Context edges are brightened by this RGB factor.
    pub context_brighten: f64,
    pub silhouettes: bool,
    pub silhouette_threshold: f64,
    /// Upper bound on fragments per pixel before the render fails.
    pub max_fragments_per_pixel: usize,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            width: 640,
            height: 360,
            camera: CameraSpec::default(),
            w_base: None,
            delta: 0.5,
            lod: 0,
            accent: 1.5,
            face_alpha: 0.5,
            transfer_function: TransferFunction::default(),
            background: Background::Black,
            halo_width: 0.5,
            halo_offset: 0.002,
            desaturation: 0.3,
            focus_darken: 0.8,
            context_brighten: 1.2,
            silhouettes: true,
            silhouette_threshold: 0.01,
            max_fragments_per_pixel: 1 << 16,
        }
    }
}

impl RenderParams {
    pub fn validate(&self) -> Result<(), RenderError> {
        let fail = |m: &str| Err(RenderError::InvalidParam(m.to_string()));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.width == 0 || self.height == 0 {
            return fail("image size must be at least 1×1");
        }
        if self.width > 16384 || self.height > 16384 {
            return fail("image size is limited to 16384 per side");
        }
        if let Some(w) = self.w_base {
            if !(w.is_finite() && w > 0.0) {
                return fail("w_base must be positive");
            }
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return fail("delta must be non-negative");
        }
        if !(self.accent.is_finite() && self.accent >= 1.0) {
            return fail("accent must be at least 1");
        }
        if !unit(self.face_alpha) {
            return fail("face_alpha must lie in [0, 1]");
        }
        if !(self.halo_width.is_finite() && self.halo_width >= 0.0) {
            return fail("halo_width must be non-negative");
        }
        if !(unit(self.halo_offset) && unit(self.desaturation)) {
            return fail("halo_offset and desaturation must lie in [0, 1]");
        }
        if !(self.focus_darken.is_finite() && self.focus_darken >= 0.0)
            || !(self.context_brighten.is_finite() && self.context_brighten >= 0.0)
        {
            return fail("edge color factors must be non-negative");
        }
        if !(self.silhouette_threshold.is_finite() && self.silhouette_threshold > 0.0) {
            return fail("silhouette_threshold must be positive");
        }
        if self.max_fragments_per_pixel == 0 {
            return fail("max_fragments_per_pixel must be positive");
        }
        self.camera.validate()
    }
}

/// Lens in model space: a point on a stored ray plus a radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectLens {
    /// Surface point found by picking.
    pub anchor: Vec3,
    pub ray_origin: Vec3,
    /// Unit direction of the picking ray.
    pub ray_dir: Vec3,
    /// Offset of the lens point from the anchor along the ray.
    pub depth: f64,
    pub radius: f64,
}

impl ObjectLens {
    /// Lens centered on a fixed point, looking along `-z`.
    pub fn at(point: Vec3, radius: f64) -> ObjectLens {
        ObjectLens {
            anchor: point,
            ray_origin: geom::add(point, [0.0, 0.0, 1.0]),
            ray_dir: [0.0, 0.0, -1.0],
            depth: 0.0,
            radius,
        }
    }

    pub fn point(&self) -> Vec3 {
        geom::add(self.anchor, geom::scale(self.ray_dir, self.depth))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LensState {
    #[default]
    Disabled,
    /// Circle in pixel coordinates.
    Screen { center: [f64; 2], radius: f64 },
    Object(ObjectLens),
}

impl LensState {
    pub fn validate(&self) -> Result<(), RenderError> {
        let radius = match self {
            LensState::Disabled => return Ok(()),
            LensState::Screen { center, radius } => {
                if !center.iter().all(|c| c.is_finite()) {
                    return Err(RenderError::InvalidParam("lens center must be finite".into()));
                }
                *radius
            }
            LensState::Object(o) => {
                let finite = |v: Vec3| v.iter().all(|c| c.is_finite());
                if !(finite(o.anchor) && finite(o.ray_origin) && o.depth.is_finite())
                    || geom::normalize(o.ray_dir).is_none()
                {
                    return Err(RenderError::InvalidParam("object lens must be finite".into()));
                }
                o.radius
            }
        };
        if radius.is_finite() && radius > 0.0 {
            Ok(())
        } else {
            Err(RenderError::InvalidParam("lens radius must be positive".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tf_is_blue_to_red() {
        let tf = TransferFunction::default();
        assert_eq!(tf.eval(0.0), ([0.0, 0.0, 1.0], 0.0));
        assert_eq!(tf.eval(1.0), ([1.0, 0.0, 0.0], 1.0));
        assert_eq!(tf.eval(0.5), ([0.5, 0.0, 0.5], 0.5));
        assert_eq!(tf.eval(-3.0).1, 0.0);
        assert_eq!(tf.eval(7.0).1, 1.0);
    }

    #[test]
    fn tf_validation() {
        let p = |t, o| ControlPoint {
            t,
            color: [0.5; 3],
            opacity: o,
        };
        assert!(TransferFunction::new(vec![p(0.0, 0.0)]).is_err());
        assert!(TransferFunction::new(vec![p(0.5, 0.0), p(0.2, 1.0)]).is_err());
        assert!(TransferFunction::new(vec![p(0.0, 0.0), p(1.5, 1.0)]).is_err());
        assert!(TransferFunction::new(vec![p(0.0, 0.0), p(1.0, 1.2)]).is_err());
        let tf = TransferFunction::new(vec![p(0.0, 0.0), p(0.5, 1.0), p(0.5, 0.2), p(1.0, 0.2)])
            .unwrap();
        assert_eq!(tf.eval(0.25).1, 0.5);
        assert_eq!(tf.eval(0.75).1, 0.2);
    }

    #[test]
    fn params_json_defaults_and_round_trip() {
        let p: RenderParams = serde_json::from_str(r#"{"lod": 2, "background": "white"}"#).unwrap();
        assert_eq!(p.lod, 2);
        assert_eq!(p.background, Background::White);
        assert_eq!(p.width, 640);
        let back: RenderParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<RenderParams>(r#"{"bogus": 1}"#).is_err());
        let bad_tf = r#"{"transfer_function": [{"t": 0.0, "color": [0,0,0], "opacity": 0}]}"#;
        assert!(serde_json::from_str::<RenderParams>(bad_tf).is_err());
    }

    #[test]
    fn param_ranges() {
        let ok = RenderParams::default();
        assert!(ok.validate().is_ok());
        for bad in [
            RenderParams { width: 0, ..ok.clone() },
            RenderParams { accent: 0.5, ..ok.clone() },
            RenderParams { face_alpha: 1.5, ..ok.clone() },
            RenderParams { w_base: Some(0.0), ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn lens_json_and_validation() {
        let l: LensState =
            serde_json::from_str(r#"{"mode": "screen", "center": [10, 20], "radius": 5}"#).unwrap();
        assert!(l.validate().is_ok());
        let zero = LensState::Screen {
            center: [0.0; 2],
            radius: 0.0,
        };
        assert!(zero.validate().is_err());
        let o = ObjectLens {
            depth: 0.25,
            ..ObjectLens::at([1.0, 2.0, 3.0], 0.5)
        };
        assert_eq!(o.point(), [1.0, 2.0, 2.75]);
    }
}
