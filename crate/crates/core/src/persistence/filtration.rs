//! The cubical complex of a pixel grid and its sublevel filtration order.
//!
//! Cells are addressed in the doubled grid of size `(2w + 1) x (2h + 1)`:
//! vertices have both coordinates even, faces (pixels) both odd, horizontal
//! edges an odd x and even y, vertical edges an even x and odd y. Pixel
//! `(px, py)` is the face at `(2px + 1, 2py + 1)`.

use crate::sedt::ScalarField;

/// A cell of the cubical complex with its filtration value.
///
/// `x` and `y` are doubled-grid coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub dim: u8,
    pub x: u32,
    pub y: u32,
    pub value: i64,
}

/// Dense doubled-grid view of a field, with every cell's value and the
/// filtration order.
pub(crate) struct CubicalGrid {
    pub cols: usize,
    pub rows: usize,
    pub values: Vec<i64>,
    /// Doubled-grid indices sorted by (value, dim, row-major index).
    pub order: Vec<u32>,
}

#[inline]
pub(crate) fn cell_dim(x: usize, y: usize) -> u8 {
    (x & 1) as u8 + (y & 1) as u8
}

impl CubicalGrid {
    pub fn new(field: &ScalarField) -> Self {
        let (w, h) = (field.width(), field.height());
        let (cols, rows) = (2 * w + 1, 2 * h + 1);
        assert!(
            cols * rows <= u32::MAX as usize,
            "field too large for 32-bit cell indices"
        );
        let mut values = vec![i64::MAX; cols * rows];
        for py in 0..h {
            for px in 0..w {
                let v = field.get(px, py);
                for y in 2 * py..=2 * py + 2 {
                    let row = &mut values[y * cols + 2 * px..=y * cols + 2 * px + 2];
                    for c in row {
                        if v < *c {
                            *c = v;
                        }
                    }
                }
            }
        }
        let mut keyed: Vec<(i64, u8, u32)> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, cell_dim(i % cols, i / cols), i as u32))
            .collect();
        keyed.sort_unstable();
        let order = keyed.into_iter().map(|(_, _, i)| i).collect();
        Self {
            cols,
            rows,
            values,
            order,
        }
    }

    #[inline]
    pub fn coords(&self, idx: u32) -> (usize, usize) {
        (idx as usize % self.cols, idx as usize / self.cols)
    }

    #[inline]
    pub fn dim(&self, idx: u32) -> u8 {
        let (x, y) = self.coords(idx);
        cell_dim(x, y)
    }

    /// Codimension-1 faces of a cell, as doubled-grid indices.
    pub fn boundary(&self, idx: u32, out: &mut Vec<u32>) {
        out.clear();
        let (x, y) = self.coords(idx);
        let at = |x: usize, y: usize| (y * self.cols + x) as u32;
        if x & 1 == 1 {
            out.push(at(x - 1, y));
            out.push(at(x + 1, y));
        }
        if y & 1 == 1 {
            out.push(at(x, y - 1));
            out.push(at(x, y + 1));
        }
    }

    /// Rank of every cell in the filtration order.
    pub fn ranks(&self) -> Vec<u32> {
        let mut rank = vec![0u32; self.order.len()];
        for (r, &idx) in self.order.iter().enumerate() {
            rank[idx as usize] = r as u32;
        }
        rank
    }
}

/// All cells of the complex in filtration order.
pub fn build_filtration(field: &ScalarField) -> Vec<Cell> {
    let grid = CubicalGrid::new(field);
    grid.order
        .iter()
        .map(|&idx| {
            let (x, y) = grid.coords(idx);
            Cell {
                dim: cell_dim(x, y),
                x: x as u32,
                y: y as u32,
                value: grid.values[idx as usize],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(cells: &[Cell]) -> [usize; 3] {
        let mut c = [0; 3];
        for cell in cells {
            c[cell.dim as usize] += 1;
        }
        c
    }

    #[test]
    fn single_pixel_complex() {
        let f = ScalarField::new(1, 1, vec![7]).unwrap();
        let cells = build_filtration(&f);
        assert_eq!(counts(&cells), [4, 4, 1]);
        assert!(cells.iter().all(|c| c.value == 7));
    }

    #[test]
    fn closed_form_counts() {
        for (w, h) in [(2, 2), (3, 5), (7, 1)] {
            let f = ScalarField::from_fn(w, h, |x, y| (x * 3 + y) as i64);
            let cells = build_filtration(&f);
            assert_eq!(
                counts(&cells),
                [(w + 1) * (h + 1), w * (h + 1) + h * (w + 1), w * h]
            );
        }
        assert_eq!(build_filtration(&ScalarField::from_fn(2, 2, |_, _| 0)).len(), 25);
    }

    #[test]
    fn shared_vertex_takes_minimum() {
        let f = ScalarField::new(2, 1, vec![-2, 5]).unwrap();
        let cells = build_filtration(&f);
        let shared_vertex = cells.iter().find(|c| c.dim == 0 && c.x == 2 && c.y == 0).unwrap();
        assert_eq!(shared_vertex.value, -2);
        let pos = |pred: &dyn Fn(&Cell) -> bool| cells.iter().position(pred).unwrap();
        let v = pos(&|c| c.dim == 0 && c.x == 2 && c.y == 0);
        assert!(v < pos(&|c| c.dim == 2 && c.x == 1));
        assert!(v < pos(&|c| c.dim == 2 && c.x == 3));
    }

    #[test]
    fn order_is_value_dim_anchor_and_faces_precede_cofaces() {
        let f = ScalarField::from_fn(4, 3, |x, y| ((x * 7 + y * 3) % 5) as i64 - 2);
        let cells = build_filtration(&f);
        for pair in cells.windows(2) {
            let key = |c: &Cell| (c.value, c.dim, c.y, c.x);
            assert!(key(&pair[0]) < key(&pair[1]));
        }
        let grid = CubicalGrid::new(&f);
        let rank = grid.ranks();
        let mut faces = Vec::new();
        for idx in 0..grid.values.len() as u32 {
            grid.boundary(idx, &mut faces);
            for &b in &faces {
                assert!(grid.values[b as usize] <= grid.values[idx as usize]);
                assert!(rank[b as usize] < rank[idx as usize]);
            }
        }
    }
}
