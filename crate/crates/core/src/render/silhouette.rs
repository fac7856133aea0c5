//! Screen-space silhouettes from depth discontinuities of the opaque
//! boundary surface.

use super::image::RgbaImage;

/// Whether the step between neighbors `a` and `b` is a discontinuity.
/// `before` is the pixel preceding `a` and `after` the one following `b` on
/// the same line. The step must exceed `threshold` by more than twice the
/// larger finite flanking step, so surfaces seen at grazing angles, whose
/// depth changes steadily from pixel to pixel, are not outlined. A covered
/// pixel next to an uncovered one (`+∞`) always counts.
fn is_jump(before: Option<f32>, a: f32, b: f32, after: Option<f32>, threshold: f32) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a.is_infinite() != b.is_infinite();
    }
    let flank = |x: Option<f32>, y: f32| match x {
        Some(x) if x.is_finite() => (x - y).abs(),
        _ => 0.0,
    };
    let slope = flank(before, a).max(flank(after, b));
    (a - b).abs() > threshold + 2.0 * slope
}

/// Marks both pixels of every 4-neighbor pair whose depth step is a
/// discontinuity (see [`is_jump`]). Uncovered pixels carry `+∞`, so
/// outlines against the background are found as well as interior
/// overlaps.
pub fn silhouette_mask(depth: &[f32], width: u32, height: u32, threshold: f32) -> Vec<bool> {
    let (w, h) = (width as usize, height as usize);
    let mut mask = vec![false; w * h];
    let at = |x: usize, y: usize| depth[y * w + x];
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                let before = (x > 0).then(|| at(x - 1, y));
                let after = (x + 2 < w).then(|| at(x + 2, y));
                if is_jump(before, at(x, y), at(x + 1, y), after, threshold) {
                    mask[y * w + x] = true;
                    mask[y * w + x + 1] = true;
                }
            }
            if y + 1 < h {
                let before = (y > 0).then(|| at(x, y - 1));
                let after = (y + 2 < h).then(|| at(x, y + 2));
                if is_jump(before, at(x, y), at(x, y + 1), after, threshold) {
                    mask[y * w + x] = true;
                    mask[(y + 1) * w + x] = true;
                }
            }
        }
    }
    mask
}

/// Paints masked pixels white; returns how many were painted.
pub fn overlay_silhouettes(image: &mut RgbaImage, mask: &[bool]) -> usize {
    let mut n = 0;
    for (p, &m) in image.pixels.iter_mut().zip(mask) {
        if m {
            *p = [1.0; 4];
            n += 1;
        }
    }
    n
}
