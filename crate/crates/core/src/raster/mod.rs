//! Binary rasters, connectivity conventions and direct topological labels.
//!
//! Foreground uses 8-adjacency and background uses 4-adjacency. This pairing
//! is the one induced by treating pixels as closed unit squares, which is how
//! the cubical filtration in [`crate::persistence`] sees them, so the labels
//! computed here agree with persistence counts at the foreground level set.

pub(crate) mod io;

pub use io::{load_image, read_label_csv, save_image, write_label_csv};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A 2D bit raster, row-major, `true` = foreground.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "bit buffer has {} entries, expected {}",
                bits.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    /// Builds an image from `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    /// Parses rows of `#` (foreground) and `.` (background). Handy for fixtures.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut bits = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(Error::InvalidArgument("ragged ascii image".into()));
            }
            for c in row.chars() {
                match c {
                    '#' => bits.push(true),
                    '.' => bits.push(false),
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "unexpected character {other:?} in ascii image"
                        )))
                    }
                }
            }
        }
        Self::new(width, height, bits)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn invert(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Number of pixels that differ between two equally sized images.
    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(
            (self.width, self.height),
            (other.width, other.height),
            "hamming distance needs equal dimensions"
        );
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Ground-truth Betti numbers of a binary image.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelPair {
    pub beta0: u32,
    pub beta1: u32,
}

impl LabelPair {
    pub fn new(beta0: u32, beta1: u32) -> Self {
        Self { beta0, beta1 }
    }

    pub fn get(&self, dim: usize) -> u32 {
        match dim {
            0 => self.beta0,
            1 => self.beta1,
            _ => panic!("labels exist for dimensions 0 and 1 only, got {dim}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

const N4: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const N8: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Labels the pixels whose value equals `phase` into connected components.
///
/// Labels run 1..=count in row-major order of each component's first pixel;
/// pixels of the other phase get 0.
fn label_phase(img: &BinaryImage, phase: bool, conn: Connectivity) -> (usize, Vec<u32>) {
    let (w, h) = (img.width, img.height);
    let offsets: &[(isize, isize)] = match conn {
        Connectivity::Four => &N4,
        Connectivity::Eight => &N8,
    };
    let mut labels = vec![0u32; w * h];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if img.bits[start] != phase || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let q = ny as usize * w + nx as usize;
                if img.bits[q] == phase && labels[q] == 0 {
                    labels[q] = count;
                    stack.push(q);
                }
            }
        }
    }
    (count as usize, labels)
}

/// Connected components of the foreground under the given adjacency.
pub fn connected_components(img: &BinaryImage, conn: Connectivity) -> (usize, Vec<u32>) {
    label_phase(img, true, conn)
}

/// Direct Betti numbers: 8-connected foreground components and 4-connected
/// background components that do not touch the image border.
pub fn betti_labels(img: &BinaryImage) -> LabelPair {
    let (beta0, _) = label_phase(img, true, Connectivity::Eight);
    let (n_bg, bg) = label_phase(img, false, Connectivity::Four);
    let (w, h) = (img.width, img.height);
    let mut touches_border = vec![false; n_bg + 1];
    for x in 0..w {
        touches_border[bg[x] as usize] = true;
        touches_border[bg[(h - 1) * w + x] as usize] = true;
    }
    for y in 0..h {
        touches_border[bg[y * w] as usize] = true;
        touches_border[bg[y * w + w - 1] as usize] = true;
    }
    let holes = touches_border[1..].iter().filter(|&&t| !t).count();
    LabelPair::new(beta0 as u32, holes as u32)
}

/// Euler characteristic V - E + F of the union of closed foreground squares.
pub fn euler_characteristic(img: &BinaryImage) -> i64 {
    let (w, h) = (img.width, img.height);
    let fg = |x: isize, y: isize| -> bool {
        x >= 0 && y >= 0 && x < w as isize && y < h as isize && img.get(x as usize, y as usize)
    };
    let mut vertices = 0i64;
    for vy in 0..=h as isize {
        for vx in 0..=w as isize {
            if fg(vx - 1, vy - 1) || fg(vx, vy - 1) || fg(vx - 1, vy) || fg(vx, vy) {
                vertices += 1;
            }
        }
    }
    let mut edges = 0i64;
    // horizontal edges sit between pixel rows vy-1 and vy
    for vy in 0..=h as isize {
        for x in 0..w as isize {
            if fg(x, vy - 1) || fg(x, vy) {
                edges += 1;
            }
        }
    }
    for y in 0..h as isize {
        for vx in 0..=w as isize {
            if fg(vx - 1, y) || fg(vx, y) {
                edges += 1;
            }
        }
    }
    vertices - edges + img.count_foreground() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn ring3() -> BinaryImage {
        BinaryImage::from_ascii(&["###", "#.#", "###"]).unwrap()
    }

    /// Independent BFS recount returning only the component count.
    fn bfs_count(img: &BinaryImage, eight: bool) -> usize {
        let (w, h) = (img.width() as i64, img.height() as i64);
        let mut seen = vec![false; (w * h) as usize];
        let mut count = 0;
        for sy in 0..h {
            for sx in 0..w {
                let s = (sy * w + sx) as usize;
                if !img.bits()[s] || seen[s] {
                    continue;
                }
                count += 1;
                seen[s] = true;
                let mut q = VecDeque::from([(sx, sy)]);
                while let Some((x, y)) = q.pop_front() {
                    for dy in -1..=1i64 {
                        for dx in -1..=1i64 {
                            if (dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0) {
                                continue;
                            }
                            let (nx, ny) = (x + dx, y + dy);
                            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                                continue;
                            }
                            let n = (ny * w + nx) as usize;
                            if img.bits()[n] && !seen[n] {
                                seen[n] = true;
                                q.push_back((nx, ny));
                            }
                        }
                    }
                }
            }
        }
        count
    }

    fn random_image(w: usize, h: usize, density: f64, seed: u64) -> BinaryImage {
        use rand::Rng;
        let mut rng = crate::seed::rng(seed);
        BinaryImage::from_fn(w, h, |_, _| rng.random_bool(density))
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(BinaryImage::new(0, 3, vec![]).is_err());
        assert!(BinaryImage::new(2, 2, vec![true; 3]).is_err());
        assert_eq!(BinaryImage::new(1, 1, vec![true]).unwrap().bits(), &[true]);
    }

    #[test]
    fn empty_image_has_no_components() {
        let img = BinaryImage::filled(5, 4, false);
        assert_eq!(connected_components(&img, Connectivity::Eight).0, 0);
        assert_eq!(betti_labels(&img), LabelPair::new(0, 0));
    }

    #[test]
    fn diagonal_pixels_depend_on_adjacency() {
        let img = BinaryImage::from_ascii(&["#.", ".#"]).unwrap();
        assert_eq!(connected_components(&img, Connectivity::Eight).0, 1);
        assert_eq!(connected_components(&img, Connectivity::Four).0, 2);
    }

    #[test]
    fn labels_partition_foreground() {
        let img = BinaryImage::from_ascii(&["#..#", "#..#", "....", "##.."]).unwrap();
        let (count, labels) = connected_components(&img, Connectivity::Four);
        assert_eq!(count, 3);
        assert_eq!(labels, vec![1, 0, 0, 2, 1, 0, 0, 2, 0, 0, 0, 0, 3, 3, 0, 0]);
    }

    #[test]
    fn component_counts_match_bfs_oracle() {
        for seed in 0..100 {
            let img = random_image(8, 8, 0.45, seed);
            assert_eq!(connected_components(&img, Connectivity::Eight).0, bfs_count(&img, true));
            assert_eq!(connected_components(&img, Connectivity::Four).0, bfs_count(&img, false));
        }
    }

    #[test]
    fn ring_has_one_hole() {
        assert_eq!(betti_labels(&ring3()), LabelPair::new(1, 1));
        assert_eq!(betti_labels(&BinaryImage::filled(4, 3, true)), LabelPair::new(1, 0));
    }

    #[test]
    fn border_background_is_never_a_hole() {
        let img = BinaryImage::from_ascii(&["###", "#..", "###"]).unwrap();
        assert_eq!(betti_labels(&img), LabelPair::new(1, 0));
    }

    #[test]
    fn diagonal_gap_does_not_leak_a_hole() {
        // 4-connected background cannot escape through the diagonal corner
        let img = BinaryImage::from_ascii(&[".#..", "#.#.", ".#..", "...."]).unwrap();
        assert_eq!(betti_labels(&img), LabelPair::new(1, 1));
    }

    #[test]
    fn euler_single_pixel_and_ring() {
        assert_eq!(euler_characteristic(&BinaryImage::filled(1, 1, true)), 1);
        // ring: V=16, E=24, F=8
        assert_eq!(euler_characteristic(&ring3()), 0);
    }

    #[test]
    fn euler_matches_betti_on_random_images() {
        use rand::Rng;
        let mut rng = crate::seed::rng(99);
        for i in 0..1000u64 {
            let w = rng.random_range(1..=64);
            let h = rng.random_range(1..=64);
            let img = random_image(w, h, rng.random_range(0.1..0.9), 1000 + i);
            let l = betti_labels(&img);
            assert_eq!(
                l.beta0 as i64 - l.beta1 as i64,
                euler_characteristic(&img),
                "image {i} ({w}x{h})"
            );
        }
    }

    proptest! {
        #[test]
        fn eight_never_exceeds_four(bits in proptest::collection::vec(any::<bool>(), 64)) {
            let img = BinaryImage::new(8, 8, bits).unwrap();
            let c8 = connected_components(&img, Connectivity::Eight).0;
            let c4 = connected_components(&img, Connectivity::Four).0;
            prop_assert!(c8 <= c4);
        }

        #[test]
        fn labelling_is_deterministic(bits in proptest::collection::vec(any::<bool>(), 48)) {
            let img = BinaryImage::new(6, 8, bits).unwrap();
            prop_assert_eq!(
                connected_components(&img, Connectivity::Eight),
                connected_components(&img, Connectivity::Eight)
            );
        }
    }
}
