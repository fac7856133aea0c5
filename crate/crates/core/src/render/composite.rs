//! Per-pixel fragment lists, depth ordering and blending.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use smallvec::SmallVec;

use super::params::Rgb;
use super::shade::FragmentKind;
use super::RenderError;

/// A shaded fragment. `color` is straight (not premultiplied).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fragment {
    /// Normalized depth, non-negative.
    pub depth: f32,
    /// Submission key breaking depth ties; unique within a pixel.
    pub seq: u32,
    pub color: [f32; 3],
    pub alpha: f32,
    pub kind: FragmentKind,
}

impl Fragment {
    /// Sort key: depth first, then submission key. Non-negative floats order
    /// like their bit patterns.
    fn key(&self) -> u64 {
        ((self.depth.max(0.0).to_bits() as u64) << 32) | self.seq as u64
    }
}

/// Fragments of a rectangular pixel region, grouped per pixel.
#[derive(Clone, Debug, Default)]
pub struct FragmentBuffer {
    pub width: u32,
    pub height: u32,
    offsets: Vec<u32>,
    fragments: Vec<Fragment>,
}

impl FragmentBuffer {
    /// Groups `(pixel index, fragment)` pairs by pixel, keeping submission
    /// order within each pixel.
    pub fn from_unsorted(width: u32, height: u32, items: &[(u32, Fragment)]) -> FragmentBuffer {
        let n = (width * height) as usize;
        let mut offsets = vec![0u32; n + 1];
        for &(p, _) in items {
            offsets[p as usize + 1] += 1;
        }
        for k in 0..n {
            offsets[k + 1] += offsets[k];
        }
        let mut cursor = offsets.clone();
        let mut fragments = vec![
            Fragment {
                depth: 0.0,
                seq: 0,
                color: [0.0; 3],
                alpha: 0.0,
                kind: FragmentKind::ContextFace,
            };
            items.len()
        ];
        for &(p, f) in items {
            fragments[cursor[p as usize] as usize] = f;
            cursor[p as usize] += 1;
        }
        FragmentBuffer {
            width,
            height,
            offsets,
            fragments,
        }
    }

    /// Buffer from explicit per-pixel lists in row-major order.
    pub fn from_lists(width: u32, height: u32, lists: Vec<Vec<Fragment>>) -> FragmentBuffer {
        assert_eq!(lists.len(), (width * height) as usize);
        let items: Vec<(u32, Fragment)> = lists
            .into_iter()
            .enumerate()
            .flat_map(|(p, l)| l.into_iter().map(move |f| (p as u32, f)))
            .collect();
        FragmentBuffer::from_unsorted(width, height, &items)
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[Fragment] {
        let p = (y * self.width + x) as usize;
        &self.fragments[self.offsets[p] as usize..self.offsets[p + 1] as usize]
    }

    pub fn total(&self) -> usize {
        self.fragments.len()
    }

    pub fn max_per_pixel(&self) -> usize {
        self.offsets
            .windows(2)
            .map(|w| (w[1] - w[0]) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fragment> {
        self.fragments.iter()
    }
}

/// Blends one pixel's fragments in depth order over `background`.
///
/// Fragments are drawn from a binary heap in ascending `(depth, seq)`
/// order until the first fully opaque one, so fragments hidden behind it
/// are never ordered. The visible prefix is then blended back to front,
/// `C ← α·c + (1 − α)·C`, which equals front-to-back accumulation and
/// makes the result bit-identical to blending the fully sorted list.
pub fn composite_pixel(fragments: &[Fragment], background: Rgb) -> Rgb {
    let mut heap: BinaryHeap<Reverse<(u64, u32)>> = fragments
        .iter()
        .enumerate()
        .map(|(k, f)| Reverse((f.key(), k as u32)))
        .collect();
    let mut visible: SmallVec<[u32; 32]> = SmallVec::new();
    while let Some(Reverse((_, k))) = heap.pop() {
        visible.push(k);
        if fragments[k as usize].alpha >= 1.0 {
            break;
        }
    }
    let mut c = background;
    for &k in visible.iter().rev() {
        let f = &fragments[k as usize];
        let a = f.alpha as f64;
        for i in 0..3 {
            c[i] = a * f.color[i] as f64 + (1.0 - a) * c[i];
        }
    }
    c
}

/// Sorts and blends every pixel of a buffer. Fails when any pixel holds
/// more than `capacity` fragments, reporting the capacity that would have
/// sufficed.
pub fn sort_and_composite(
    buf: &FragmentBuffer,
    background: Rgb,
    capacity: usize,
) -> Result<Vec<Rgb>, RenderError> {
    let required = buf.max_per_pixel();
    if required > capacity {
        return Err(RenderError::CapacityExceeded { capacity, required });
    }
    let mut out = Vec::with_capacity((buf.width * buf.height) as usize);
    for y in 0..buf.height {
        for x in 0..buf.width {
            out.push(composite_pixel(buf.pixel(x, y), background));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frag(depth: f32, seq: u32, color: [f32; 3], alpha: f32) -> Fragment {
        Fragment {
            depth,
            seq,
            color,
            alpha,
            kind: FragmentKind::ContextFace,
        }
    }

    #[test]
    fn single_fragment_over_black() {
        let c = composite_pixel(&[frag(0.5, 0, [1.0, 0.0, 0.0], 0.5)], [0.0; 3]);
        assert_eq!(c, [0.5, 0.0, 0.0]);
    }

    #[test]
    fn two_layers() {
        let front = frag(0.2, 1, [1.0, 0.0, 0.0], 0.5);
        let back = frag(0.7, 0, [0.0, 0.0, 1.0], 1.0);
        assert_eq!(composite_pixel(&[back, front], [0.0; 3]), [0.5, 0.0, 0.5]);
        assert_eq!(composite_pixel(&[front, back], [1.0; 3]), [0.5, 0.0, 0.5]);
    }

    #[test]
    fn empty_pixel_is_background() {
        assert_eq!(composite_pixel(&[], [1.0; 3]), [1.0; 3]);
    }

    #[test]
    fn depth_ties_follow_seq() {
        let a = frag(0.5, 3, [1.0, 0.0, 0.0], 1.0);
        let b = frag(0.5, 2, [0.0, 1.0, 0.0], 1.0);
        assert_eq!(composite_pixel(&[a, b], [0.0; 3]), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn grouping_keeps_submission_order() {
        let items = vec![
            (3, frag(0.1, 0, [0.0; 3], 1.0)),
            (0, frag(0.2, 1, [0.0; 3], 1.0)),
            (3, frag(0.3, 2, [0.0; 3], 1.0)),
        ];
        let b = FragmentBuffer::from_unsorted(2, 2, &items);
        assert_eq!(b.pixel(1, 1).iter().map(|f| f.seq).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(b.pixel(0, 0).len(), 1);
        assert_eq!(b.pixel(1, 0).len(), 0);
        assert_eq!((b.total(), b.max_per_pixel()), (3, 2));
    }

    #[test]
    fn capacity_error_reports_requirement() {
        let lists = vec![vec![frag(0.1, 0, [0.0; 3], 0.1); 5], vec![]];
        let b = FragmentBuffer::from_lists(2, 1, lists);
        match sort_and_composite(&b, [0.0; 3], 4) {
            Err(RenderError::CapacityExceeded { capacity, required }) => {
                assert_eq!((capacity, required), (4, 5))
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
        assert!(sort_and_composite(&b, [0.0; 3], 5).is_ok());
    }
}
