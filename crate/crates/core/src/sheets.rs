//! Hexahedral sheets: cells connected through topologically parallel
//! edges.

use crate::mesh::HexMesh;
use serde::Serialize;
use std::collections::VecDeque;

/// One sheet: its cells and every edge visited while growing it. Both
/// lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sheet {
    pub id: usize,
    pub cells: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Extracts all sheets.
///
/// The unvisited edge with the smallest index seeds a sheet, which grows
/// breadth-first: every cell incident to a queued edge joins the sheet and
/// contributes the three edges parallel to that edge within the cell. Each
/// edge is visited by exactly one sheet; a cell belongs to up to three
/// sheets (more when a sheet passes through a cell twice).
pub fn extract_sheets(mesh: &HexMesh) -> Vec<Sheet> {
    let mut visited = vec![false; mesh.num_edges()];
    let mut stamp = vec![usize::MAX; mesh.num_cells()];
    let mut sheets = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..mesh.num_edges() {
        if visited[seed] {
            continue;
        }
        let id = sheets.len();
        let mut cells = Vec::new();
        let mut edges = Vec::new();
        visited[seed] = true;
        queue.push_back(seed);
        while let Some(e) = queue.pop_front() {
            edges.push(e);
            for &c in mesh.edge_cells(e) {
                if stamp[c] != id {
                    stamp[c] = id;
                    cells.push(c);
                }
                let local = mesh.local_edge(c, e).expect("incidence is consistent");
                for p in mesh.parallel_edges_local(c, local) {
                    if !visited[p] {
                        visited[p] = true;
                        queue.push_back(p);
                    }
                }
            }
        }
        cells.sort_unstable();
        edges.sort_unstable();
        sheets.push(Sheet { id, cells, edges });
    }
    sheets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn single_cube_has_three_sheets() {
        let m = synth::grid([1, 1, 1], [1.0; 3]).unwrap();
        let s = extract_sheets(&m);
        assert_eq!(s.len(), 3);
        let mut all: Vec<usize> = Vec::new();
        for sh in &s {
            assert_eq!(sh.cells, vec![0]);
            assert_eq!(sh.edges.len(), 4);
            all.extend(&sh.edges);
        }
        all.sort_unstable();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn grid_2x1x1_has_four_sheets() {
        let m = synth::grid([2, 1, 1], [1.0; 3]).unwrap();
        let s = extract_sheets(&m);
        let mut sizes: Vec<usize> = s.iter().map(|s| s.cells.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 2, 2]);
    }

    #[test]
    fn cube_grids_have_3n_slabs() {
        for n in 2..=3 {
            let m = synth::grid([n, n, n], [1.0; 3]).unwrap();
            let s = extract_sheets(&m);
            assert_eq!(s.len(), 3 * n);
            assert!(s.iter().all(|sh| sh.cells.len() == n * n));
            // a slab is n×n×1: all its cells share one lattice coordinate
            for sh in &s {
                let coords: Vec<[usize; 3]> = sh
                    .cells
                    .iter()
                    .map(|&c| [c % n, (c / n) % n, c / (n * n)])
                    .collect();
                assert!((0..3).any(|axis| coords.iter().all(|x| x[axis] == coords[0][axis])));
            }
        }
    }

    #[test]
    fn sheets_visit_every_edge_once_and_cover_cells() {
        let m = synth::ogrid_cylinder(3, 2, 2).unwrap();
        let s = extract_sheets(&m);
        let mut count = vec![0; m.num_edges()];
        let mut covered = vec![false; m.num_cells()];
        for sh in &s {
            sh.edges.iter().for_each(|&e| count[e] += 1);
            sh.cells.iter().for_each(|&c| covered[c] = true);
        }
        assert!(count.iter().all(|&k| k == 1));
        assert!(covered.iter().all(|&c| c));
    }
}
