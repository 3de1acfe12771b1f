//! Bucketed nearest-direction lookup for many queries against one grid.

use std::collections::HashMap;

use super::coords::Direction;

const CELL: f64 = 0.1;

/// Same answer as a linear scan for the largest dot product (first index
/// on ties), answered from a 3-D grid of unit-vector cells.
#[derive(Clone, Debug)]
pub struct DirectionIndex {
    vectors: Vec<[f64; 3]>,
    cells: HashMap<[i32; 3], Vec<usize>>,
}

fn cell_of(v: [f64; 3]) -> [i32; 3] {
    [
        (v[0] / CELL).floor() as i32,
        (v[1] / CELL).floor() as i32,
        (v[2] / CELL).floor() as i32,
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn scan(
    vectors: &[[f64; 3]],
    t: [f64; 3],
    candidates: impl Iterator<Item = usize>,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for i in candidates {
        let c = dot(t, vectors[i]);
        match best {
            Some((bi, bc)) if c < bc || (c == bc && i > bi) => {}
            _ => best = Some((i, c)),
        }
    }
    best
}

impl DirectionIndex {
    pub fn new(directions: &[Direction]) -> Self {
        let vectors: Vec<[f64; 3]> = directions.iter().map(|d| d.unit_vector()).collect();
        let mut cells: HashMap<[i32; 3], Vec<usize>> = HashMap::new();
        for (i, v) in vectors.iter().enumerate() {
            cells.entry(cell_of(*v)).or_default().push(i);
        }
        DirectionIndex { vectors, cells }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn nearest(&self, target: &Direction) -> usize {
        self.nearest_unit(target.unit_vector())
    }

    /// `v` need not be normalised but must be non-zero.
    pub fn nearest_vector(&self, v: [f64; 3]) -> usize {
        let n = dot(v, v).sqrt();
        self.nearest_unit([v[0] / n, v[1] / n, v[2] / n])
    }

    fn nearest_unit(&self, t: [f64; 3]) -> usize {
        let c = cell_of(t);
        let mut local = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(members) = self.cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        local.extend_from_slice(members);
                    }
                }
            }
        }
        // Any direction within chord CELL of the target sits in the
        // neighbourhood, so a local winner that close is the global one.
        if let Some((i, d)) = scan(&self.vectors, t, local.into_iter()) {
            if 2.0 - 2.0 * d <= CELL * CELL * (1.0 - 1e-9) {
                return i;
            }
        }
        scan(&self.vectors, t, 0..self.vectors.len()).map_or(0, |(i, _)| i)
    }
}
