//! Hexahedral mesh data model and derived topology.
//!
//! Cells use the VTK hexahedron corner ordering: corners `0..4` form the
//! bottom quad counter-clockwise when seen from above, corners `4..8` the top
//! quad in the same order, with corner `k + 4` above corner `k`.
//!
//! ```text
//!        7 -------- 6
//!       /|         /|
//!      4 -------- 5 |
//!      | 3 -------|-2
//!      |/         |/
//!      0 -------- 1
//! ```
//!
//! Edges and faces are identified by their sorted vertex tuple and are
//! numbered in ascending key order, so index assignment is reproducible.

mod error;
mod io;

pub use error::MeshError;
pub use io::{
    load_mesh, load_mesh_path, load_mesh_str, write_mesh, write_vtk, DataLocation, MeshFormat,
    ScalarArray,
};

use crate::geom::{self, Vec3};
use serde::Serialize;

/// Local corner pairs of the 12 cell edges.
pub const HEX_EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Parallel class of each local edge. Class 0 runs along corner 0→1,
/// class 1 along 1→2, class 2 along 0→4.
pub const HEX_EDGE_CLASS: [usize; 12] = [0, 1, 0, 1, 0, 1, 0, 1, 2, 2, 2, 2];

/// Local corners of the 6 cell faces, wound so the normal points outwards
/// for a positively oriented cell.
pub const HEX_FACES: [[usize; 4]; 6] = [
    [0, 3, 2, 1],
    [4, 5, 6, 7],
    [0, 1, 5, 4],
    [1, 2, 6, 5],
    [2, 3, 7, 6],
    [3, 0, 4, 7],
];

/// Compressed row storage for one-to-many incidence maps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Incidence {
    offsets: Vec<usize>,
    items: Vec<usize>,
}

impl Incidence {
    fn from_pairs(rows: usize, mut pairs: Vec<(usize, usize)>) -> Incidence {
        pairs.sort_unstable();
        let mut offsets = vec![0usize; rows + 1];
        for &(r, _) in &pairs {
            offsets[r + 1] += 1;
        }
        for r in 0..rows {
            offsets[r + 1] += offsets[r];
        }
        Incidence {
            offsets,
            items: pairs.into_iter().map(|(_, c)| c).collect(),
        }
    }

    #[inline]
    pub fn get(&self, row: usize) -> &[usize] {
        &self.items[self.offsets[row]..self.offsets[row + 1]]
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Sign of the cells' volumes under the corner convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Positive,
    Negative,
    Mixed,
}

#[derive(Clone, Debug)]
pub struct HexMesh {
    vertices: Vec<Vec3>,
    cells: Vec<[usize; 8]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 4]>,
    cell_edges: Vec<[usize; 12]>,
    cell_faces: Vec<[usize; 6]>,
    face_edges: Vec<[usize; 4]>,
    face_cells: Vec<[usize; 2]>,
    edge_cells: Incidence,
    edge_faces: Incidence,
    vertex_cells: Incidence,
    face_boundary: Vec<bool>,
    edge_boundary: Vec<bool>,
    vertex_boundary: Vec<bool>,
    orientation: Orientation,
    conforming: bool,
    /// Scalar arrays carried over from the source file.
    pub scalars: Vec<ScalarArray>,
}

/// Marker for a missing second cell in [`HexMesh::face_cells`].
pub const NO_CELL: usize = usize::MAX;

/// Incident-cell count of an edge plus its boundary flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeValence {
    pub edge: usize,
    pub valence: usize,
    pub boundary: bool,
}

impl EdgeValence {
    /// Regular edges have 2 cells on the boundary and 4 in the interior.
    pub fn is_singular(&self) -> bool {
        !matches!((self.boundary, self.valence), (true, 2) | (false, 4))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularClass {
    /// Frame edge with a single incident cell; never hidden by the LoD.
    Valence1,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SingularEdge {
    pub edge: usize,
    pub valence: usize,
    pub boundary: bool,
    pub class: SingularClass,
}

impl HexMesh {
    /// Builds all derived topology from raw vertices and cells.
    pub fn build(vertices: Vec<Vec3>, cells: Vec<[usize; 8]>) -> Result<HexMesh, MeshError> {
        build_topology(vertices, cells)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 8]] {
        &self.cells
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Face corner indices in the cyclic order of the lowest-index owning cell.
    pub fn faces(&self) -> &[[usize; 4]] {
        &self.faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Edges of a cell, indexed like [`HEX_EDGES`].
    pub fn cell_edges(&self, cell: usize) -> &[usize; 12] {
        &self.cell_edges[cell]
    }

    /// Faces of a cell, indexed like [`HEX_FACES`].
    pub fn cell_faces(&self, cell: usize) -> &[usize; 6] {
        &self.cell_faces[cell]
    }

    /// Edges of a face; edge `k` joins face corners `k` and `k + 1`.
    pub fn face_edges(&self, face: usize) -> &[usize; 4] {
        &self.face_edges[face]
    }

    /// Cells sharing a face; boundary faces have [`NO_CELL`] in slot 1.
    pub fn face_cells(&self, face: usize) -> &[usize; 2] {
        &self.face_cells[face]
    }

    pub fn edge_cells(&self, edge: usize) -> &[usize] {
        self.edge_cells.get(edge)
    }

    pub fn edge_faces(&self, edge: usize) -> &[usize] {
        self.edge_faces.get(edge)
    }

    pub fn vertex_cells(&self, vertex: usize) -> &[usize] {
        self.vertex_cells.get(vertex)
    }

    pub fn is_boundary_face(&self, face: usize) -> bool {
        self.face_boundary[face]
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.edge_boundary[edge]
    }

    pub fn is_boundary_vertex(&self, vertex: usize) -> bool {
        self.vertex_boundary[vertex]
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.face_boundary[f])
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// False when some boundary edge does not have exactly two boundary
    /// faces, as happens for hanging nodes or cells touching along an edge.
    pub fn is_conforming(&self) -> bool {
        self.conforming
    }

    pub fn cell_corners(&self, cell: usize) -> [Vec3; 8] {
        self.cells[cell].map(|v| self.vertices[v])
    }

    pub fn face_corners(&self, face: usize) -> [Vec3; 4] {
        self.faces[face].map(|v| self.vertices[v])
    }

    pub fn edge_valence(&self, edge: usize) -> EdgeValence {
        EdgeValence {
            edge,
            valence: self.edge_cells(edge).len(),
            boundary: self.edge_boundary[edge],
        }
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { [a, b] } else { [b, a] };
        self.edges.binary_search(&key).ok()
    }

    pub fn mean_edge_length(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .edges
            .iter()
            .map(|&[a, b]| geom::norm(geom::sub(self.vertices[b], self.vertices[a])))
            .sum();
        total / self.edges.len() as f64
    }

    pub fn bounds(&self) -> Option<geom::Aabb> {
        geom::Aabb::from_points(&self.vertices)
    }

    /// Same mesh with every cell's bottom and top quads swapped, which
    /// inverts the orientation of all cells.
    pub fn mirrored(&self) -> Result<HexMesh, MeshError> {
        let cells = self
            .cells
            .iter()
            .map(|c| [c[4], c[5], c[6], c[7], c[0], c[1], c[2], c[3]])
            .collect();
        let mut mesh = build_topology(self.vertices.clone(), cells)?;
        mesh.scalars = self.scalars.clone();
        Ok(mesh)
    }

    /// Returns the mesh with positive orientation if every cell is
    /// inverted, otherwise the mesh unchanged.
    pub fn with_positive_orientation(self) -> Result<HexMesh, MeshError> {
        if self.orientation == Orientation::Negative {
            self.mirrored()
        } else {
            Ok(self)
        }
    }

    /// Every edge whose (boundary, valence) pair is neither (true, 2) nor
    /// (false, 4).
    pub fn singular_edges(&self) -> Vec<SingularEdge> {
        (0..self.edges.len())
            .map(|e| self.edge_valence(e))
            .filter(EdgeValence::is_singular)
            .map(|v| SingularEdge {
                edge: v.edge,
                valence: v.valence,
                boundary: v.boundary,
                class: if v.valence == 1 {
                    SingularClass::Valence1
                } else {
                    SingularClass::Other
                },
            })
            .collect()
    }

    /// The three edges of `cell` in the same parallel class as `edge`.
    pub fn topologically_parallel_edges(
        &self,
        cell: usize,
        edge: usize,
    ) -> Result<[usize; 3], MeshError> {
        let local = self.cell_edges[cell]
            .iter()
            .position(|&e| e == edge)
            .ok_or(MeshError::EdgeNotInCell { edge, cell })?;
        Ok(self.parallel_edges_local(cell, local))
    }

    pub(crate) fn parallel_edges_local(&self, cell: usize, local: usize) -> [usize; 3] {
        let class = HEX_EDGE_CLASS[local];
        let mut out = [0; 3];
        let mut n = 0;
        for k in 0..12 {
            if k != local && HEX_EDGE_CLASS[k] == class {
                out[n] = self.cell_edges[cell][k];
                n += 1;
            }
        }
        out
    }

    /// Local index of `edge` within `cell`, if present.
    pub fn local_edge(&self, cell: usize, edge: usize) -> Option<usize> {
        self.cell_edges[cell].iter().position(|&e| e == edge)
    }
}

/// Builds deduplicated edges/faces and all incidence maps.
pub fn build_topology(vertices: Vec<Vec3>, cells: Vec<[usize; 8]>) -> Result<HexMesh, MeshError> {
    let nv = vertices.len();
    for (c, cell) in cells.iter().enumerate() {
        for &v in cell {
            if v >= nv {
                return Err(MeshError::IndexOutOfRange {
                    cell: c,
                    index: v,
                    count: nv,
                });
            }
        }
        let mut sorted = *cell;
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(MeshError::DegenerateCell(c));
        }
    }
    {
        let mut keys: Vec<([usize; 8], usize)> = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let mut k = *cell;
                k.sort_unstable();
                (k, c)
            })
            .collect();
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(MeshError::DuplicateCell {
                first: w[0].1,
                second: w[1].1,
            });
        }
    }

    // Edges: sorted (key, cell, local) triples, then dedup in key order.
    let mut edge_refs: Vec<([usize; 2], usize, usize)> = Vec::with_capacity(cells.len() * 12);
    for (c, cell) in cells.iter().enumerate() {
        for (l, [a, b]) in HEX_EDGES.iter().enumerate() {
            let (a, b) = (cell[*a], cell[*b]);
            edge_refs.push(([a.min(b), a.max(b)], c, l));
        }
    }
    edge_refs.sort_unstable();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut cell_edges = vec![[0usize; 12]; cells.len()];
    let mut edge_cell_pairs = Vec::with_capacity(edge_refs.len());
    for (key, c, l) in edge_refs {
        if edges.last() != Some(&key) {
            edges.push(key);
        }
        let e = edges.len() - 1;
        cell_edges[c][l] = e;
        edge_cell_pairs.push((e, c));
    }

    let mut face_refs: Vec<([usize; 4], usize, usize)> = Vec::with_capacity(cells.len() * 6);
    for (c, cell) in cells.iter().enumerate() {
        for (l, f) in HEX_FACES.iter().enumerate() {
            let mut key = f.map(|k| cell[k]);
            key.sort_unstable();
            face_refs.push((key, c, l));
        }
    }
    face_refs.sort_unstable();
    let mut face_keys: Vec<[usize; 4]> = Vec::new();
    let mut faces: Vec<[usize; 4]> = Vec::new();
    let mut face_edges: Vec<[usize; 4]> = Vec::new();
    let mut face_cells: Vec<[usize; 2]> = Vec::new();
    let mut cell_faces = vec![[0usize; 6]; cells.len()];
    for (key, c, l) in face_refs {
        if face_keys.last() != Some(&key) {
            face_keys.push(key);
            let corners = HEX_FACES[l];
            faces.push(corners.map(|k| cells[c][k]));
            let mut fe = [0usize; 4];
            for k in 0..4 {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                let local = HEX_EDGES
                    .iter()
                    .position(|&[x, y]| (x == a && y == b) || (x == b && y == a))
                    .expect("face corners are joined by cell edges");
                fe[k] = cell_edges[c][local];
            }
            face_edges.push(fe);
            face_cells.push([c, NO_CELL]);
        } else {
            let f = faces.len() - 1;
            if face_cells[f][1] != NO_CELL {
                return Err(MeshError::NonManifoldFace {
                    face: faces[f],
                    cells: vec![face_cells[f][0], face_cells[f][1], c],
                });
            }
            face_cells[f][1] = c;
        }
        cell_faces[c][l] = faces.len() - 1;
    }

    let face_boundary: Vec<bool> = face_cells.iter().map(|fc| fc[1] == NO_CELL).collect();
    let mut edge_face_pairs = Vec::with_capacity(faces.len() * 4);
    for (f, fe) in face_edges.iter().enumerate() {
        for &e in fe {
            edge_face_pairs.push((e, f));
        }
    }
    let edge_faces = Incidence::from_pairs(edges.len(), edge_face_pairs);
    let edge_cells = Incidence::from_pairs(edges.len(), edge_cell_pairs);

    let mut edge_boundary = vec![false; edges.len()];
    let mut conforming = true;
    for e in 0..edges.len() {
        let nb = edge_faces
            .get(e)
            .iter()
            .filter(|&&f| face_boundary[f])
            .count();
        edge_boundary[e] = nb > 0;
        if nb != 0 && nb != 2 {
            conforming = false;
        }
    }
    let mut vertex_boundary = vec![false; nv];
    for (f, face) in faces.iter().enumerate() {
        if face_boundary[f] {
            for &v in face {
                vertex_boundary[v] = true;
            }
        }
    }
    let mut vertex_cell_pairs = Vec::with_capacity(cells.len() * 8);
    for (c, cell) in cells.iter().enumerate() {
        for &v in cell {
            vertex_cell_pairs.push((v, c));
        }
    }
    let vertex_cells = Incidence::from_pairs(nv, vertex_cell_pairs);

    let orientation = {
        let (mut pos, mut neg) = (false, false);
        for cell in &cells {
            let v = crate::quality::tetrakis_volume(&cell.map(|k| vertices[k]));
            if v > 0.0 {
                pos = true;
            } else if v < 0.0 {
                neg = true;
            }
        }
        match (pos, neg) {
            (_, false) => Orientation::Positive,
            (false, true) => Orientation::Negative,
            (true, true) => Orientation::Mixed,
        }
    };

    Ok(HexMesh {
        vertices,
        cells,
        edges,
        faces,
        cell_edges,
        cell_faces,
        face_edges,
        face_cells,
        edge_cells,
        edge_faces,
        vertex_cells,
        face_boundary,
        edge_boundary,
        vertex_boundary,
        orientation,
        conforming,
        scalars: Vec::new(),
    })
}
