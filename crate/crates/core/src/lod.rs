//! Edge level-of-detail from agglomerative merging of sheet components.
//!
//! Every sheet seeds one component holding all of the sheet's cells, so
//! components may overlap where sheets cross. Pairs of components are
//! merged greedily: adjacent pairs before hybrid pairs before intersecting
//! pairs, then by descending merge weight, then by ascending id pair. When
//! a merge turns shared boundary faces into interior faces, the edges of
//! those faces stop being drawn from the next level on.

use crate::mesh::{HexMesh, NO_CELL};
use crate::sheets::Sheet;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::{self, Write};

#[derive(Debug, thiserror::Error)]
pub enum LodError {
    #[error("cannot relate component {0} with itself")]
    SameComponent(usize),
}

/// How two components meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Shared boundary faces, no shared cells.
    Adjacent,
    /// Shared boundary faces and shared cells.
    Hybrid,
    /// Shared cells only.
    Intersecting,
    None,
}

impl Relation {
    /// Merge precedence; higher merges first.
    pub fn rank(self) -> u8 {
        match self {
            Relation::Adjacent => 3,
            Relation::Hybrid => 2,
            Relation::Intersecting => 1,
            Relation::None => 0,
        }
    }

    fn from_counts(shared_cells: usize, shared_faces: usize) -> Relation {
        match (shared_cells > 0, shared_faces > 0) {
            (false, true) => Relation::Adjacent,
            (true, true) => Relation::Hybrid,
            (true, false) => Relation::Intersecting,
            (false, false) => Relation::None,
        }
    }
}

/// A group of cells with its boundary faces (faces with exactly one
/// incident cell in the group, mesh-boundary faces included).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    /// Sorted cell indices.
    pub cells: Vec<usize>,
    /// Sorted face indices.
    pub boundary: Vec<usize>,
    pub sheets: Vec<usize>,
}

impl Component {
    pub fn new(mesh: &HexMesh, id: usize, mut cells: Vec<usize>, sheets: Vec<usize>) -> Component {
        cells.sort_unstable();
        cells.dedup();
        let contains = |c: usize| c != NO_CELL && cells.binary_search(&c).is_ok();
        let mut boundary: Vec<usize> = cells
            .iter()
            .flat_map(|&c| mesh.cell_faces(c).iter().copied())
            .filter(|&f| {
                let [a, b] = *mesh.face_cells(f);
                contains(a) != contains(b)
            })
            .collect();
        boundary.sort_unstable();
        Component {
            id,
            cells,
            boundary,
            sheets,
        }
    }

    pub fn contains(&self, cell: usize) -> bool {
        cell != NO_CELL && self.cells.binary_search(&cell).is_ok()
    }
}

/// Exact merge weight `shared / ((|∂Ci| + |∂Cj|)·(|Ci| + |Cj|))`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MergeWeight {
    pub num: u64,
    pub den: u64,
}

impl MergeWeight {
    /// The weight in lowest terms (`0/1` for zero).
    pub fn reduced(self) -> MergeWeight {
        if self.num == 0 {
            return MergeWeight { num: 0, den: 1 };
        }
        let (mut a, mut b) = (self.num, self.den);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        MergeWeight {
            num: self.num / a,
            den: self.den / a,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for MergeWeight {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MergeWeight {}

impl PartialOrd for MergeWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MergeWeight {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

pub fn merge_weight(a: &Component, b: &Component, shared_faces: usize) -> MergeWeight {
    MergeWeight {
        num: shared_faces as u64,
        den: ((a.boundary.len() + b.boundary.len()) * (a.cells.len() + b.cells.len())) as u64,
    }
}

/// Relation of a component pair with the faces and cells behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRelation {
    pub relation: Relation,
    pub shared_cells: usize,
    /// Faces on both boundaries that become interior to the union.
    pub shared_faces: Vec<usize>,
}

/// Classifies a pair directly from the two cell and boundary sets.
pub fn classify_relation(
    mesh: &HexMesh,
    a: &Component,
    b: &Component,
) -> Result<PairRelation, LodError> {
    if a.id == b.id {
        return Err(LodError::SameComponent(a.id));
    }
    let shared_cells = a.cells.iter().filter(|&&c| b.contains(c)).count();
    let shared_faces: Vec<usize> = a
        .boundary
        .iter()
        .copied()
        .filter(|&f| {
            let [x, y] = *mesh.face_cells(f);
            let in_union = |c| a.contains(c) || b.contains(c);
            b.boundary.binary_search(&f).is_ok() && in_union(x) && in_union(y)
        })
        .collect();
    Ok(PairRelation {
        relation: Relation::from_counts(shared_cells, shared_faces.len()),
        shared_cells,
        shared_faces,
    })
}

/// One step of the merge history.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub a: usize,
    pub b: usize,
    pub merged: usize,
    pub relation: Relation,
    pub weight: MergeWeight,
    /// Level during which the merge happened; edges it hides have this
    /// `e_level`.
    pub level: u32,
    pub cells: usize,
}

/// Per-edge LoD levels and the merge history that produced them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LodEdgeStructure {
    /// Highest level at which each edge is drawn.
    pub e_level: Vec<u32>,
    pub level_count: u32,
    pub initial_components: usize,
    pub merges: Vec<MergeRecord>,
}

impl LodEdgeStructure {
    pub fn is_visible(&self, edge: usize, lod: u32) -> bool {
        self.e_level[edge] >= lod
    }

    pub fn visible_count(&self, lod: u32) -> usize {
        self.e_level.iter().filter(|&&l| l >= lod).count()
    }

    /// Line-set export: one OBJ group per level holding the edges whose
    /// `e_level` equals that level (drawing level `k` means drawing groups
    /// `k..level_count`).
    pub fn write_obj<W: Write>(&self, mesh: &HexMesh, mut out: W) -> io::Result<()> {
        writeln!(out, "# edge level-of-detail: {} levels", self.level_count)?;
        for p in mesh.vertices() {
            writeln!(out, "v {} {} {}", p[0], p[1], p[2])?;
        }
        for level in 0..self.level_count {
            writeln!(out, "g level_{level}")?;
            for (e, &[a, b]) in mesh.edges().iter().enumerate() {
                if self.e_level[e] == level {
                    writeln!(out, "l {} {}", a + 1, b + 1)?;
                }
            }
        }
        Ok(())
    }

    /// Merge history as pretty JSON.
    pub fn merge_log_json(&self) -> String {
        serde_json::to_string_pretty(&self.merges).expect("merge records serialize")
    }
}

#[derive(PartialEq, Eq)]
struct Candidate {
    rank: u8,
    weight: MergeWeight,
    pair: (usize, usize),
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then(self.weight.cmp(&other.weight))
            .then(other.pair.cmp(&self.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Component bookkeeping for the merge loop.
struct Forest<'m> {
    mesh: &'m HexMesh,
    comps: Vec<Option<Component>>,
    /// Live component ids per cell.
    members: Vec<SmallVec<[u32; 4]>>,
}

impl Forest<'_> {
    fn comp(&self, id: usize) -> &Component {
        self.comps[id].as_ref().expect("live component")
    }

    fn is_member(&self, cell: usize, id: usize) -> bool {
        cell != NO_CELL && self.members[cell].contains(&(id as u32))
    }

    /// `(shared cells, shared faces)` of `id` with every live component it
    /// meets, found by walking only `id`'s cells and boundary.
    fn neighbors(&self, id: usize) -> BTreeMap<usize, (usize, usize)> {
        let comp = self.comp(id);
        let mut out: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for &c in &comp.cells {
            for &j in &self.members[c] {
                if j as usize != id {
                    out.entry(j as usize).or_default().0 += 1;
                }
            }
        }
        for &f in &comp.boundary {
            let [x, y] = *self.mesh.face_cells(f);
            let (inner, outer) = if self.is_member(x, id) { (x, y) } else { (y, x) };
            if outer == NO_CELL {
                continue;
            }
            for &j in &self.members[outer] {
                let j = j as usize;
                if j != id && !self.is_member(inner, j) {
                    out.entry(j).or_default().1 += 1;
                }
            }
        }
        out
    }

    fn push_candidates(&self, id: usize, heap: &mut BinaryHeap<Candidate>) {
        for (j, (cells, faces)) in self.neighbors(id) {
            let relation = Relation::from_counts(cells, faces);
            if relation == Relation::None {
                continue;
            }
            heap.push(Candidate {
                rank: relation.rank(),
                weight: merge_weight(self.comp(id), self.comp(j), faces),
                pair: (id.min(j), id.max(j)),
            });
        }
    }

    /// Faces of `a`'s boundary that are interior to `a ∪ b` and on `b`'s
    /// boundary.
    fn shared_faces(&self, a: usize, b: usize) -> Vec<usize> {
        self.comp(a)
            .boundary
            .iter()
            .copied()
            .filter(|&f| {
                let [x, y] = *self.mesh.face_cells(f);
                let (inner, outer) = if self.is_member(x, a) { (x, y) } else { (y, x) };
                self.is_member(outer, b) && !self.is_member(inner, b)
            })
            .collect()
    }

    fn merge(&mut self, a: usize, b: usize) -> usize {
        let ca = self.comps[a].take().expect("live component");
        let cb = self.comps[b].take().expect("live component");
        let id = self.comps.len();
        for &c in &ca.cells {
            self.members[c].retain(|j| *j as usize != a);
        }
        for &c in &cb.cells {
            self.members[c].retain(|j| *j as usize != b);
        }
        let mut cells = ca.cells;
        cells.extend(cb.cells);
        let mut sheets = ca.sheets;
        sheets.extend(cb.sheets);
        sheets.sort_unstable();
        let comp = Component::new(self.mesh, id, cells, sheets);
        for &c in &comp.cells {
            self.members[c].push(id as u32);
        }
        self.comps.push(Some(comp));
        id
    }
}

/// Builds the edge LoD from extracted sheets.
///
/// Levels: merges run at level 0 until one produces a component with more
/// than twice the cells of the largest component present when the level
/// began; that merge closes the level. After the last merge an open level
/// that hid edges is closed too, and the final level is the coarsest.
/// Singular edges are never hidden by merges; non-valence-1 singular
/// edges disappear only at the coarsest level.
pub fn build_lod(mesh: &HexMesh, sheets: &[Sheet]) -> LodEdgeStructure {
    let mut forest = Forest {
        mesh,
        comps: Vec::with_capacity(2 * sheets.len()),
        members: vec![SmallVec::new(); mesh.num_cells()],
    };
    for s in sheets {
        let comp = Component::new(mesh, s.id, s.cells.clone(), vec![s.id]);
        for &c in &comp.cells {
            forest.members[c].push(comp.id as u32);
        }
        forest.comps.push(Some(comp));
    }
    // merged components get fresh ids after the sheet ids
    debug_assert!(sheets.iter().enumerate().all(|(k, s)| s.id == k));

    let mut heap = BinaryHeap::new();
    for id in 0..forest.comps.len() {
        for (j, (cells, faces)) in forest.neighbors(id) {
            let relation = Relation::from_counts(cells, faces);
            if j > id && relation != Relation::None {
                heap.push(Candidate {
                    rank: relation.rank(),
                    weight: merge_weight(forest.comp(id), forest.comp(j), faces),
                    pair: (id, j),
                });
            }
        }
    }

    let singular: Vec<bool> = (0..mesh.num_edges())
        .map(|e| mesh.edge_valence(e).is_singular())
        .collect();
    let mut hidden_at: Vec<Option<u32>> = vec![None; mesh.num_edges()];
    let mut level = 0u32;
    let mut level_base = forest
        .comps
        .iter()
        .flatten()
        .map(|c| c.cells.len())
        .max()
        .unwrap_or(0);
    let mut level_hid_edges = false;
    let mut merges = Vec::new();

    while let Some(Candidate { rank, weight, pair: (a, b) }) = heap.pop() {
        if forest.comps[a].is_none() || forest.comps[b].is_none() {
            continue;
        }
        let relation = match rank {
            3 => Relation::Adjacent,
            2 => Relation::Hybrid,
            _ => Relation::Intersecting,
        };
        if relation != Relation::Intersecting {
            for f in forest.shared_faces(a, b) {
                for &e in mesh.face_edges(f) {
                    if !singular[e] && hidden_at[e].is_none() {
                        hidden_at[e] = Some(level);
                        level_hid_edges = true;
                    }
                }
            }
        }
        let merged = forest.merge(a, b);
        let size = forest.comp(merged).cells.len();
        merges.push(MergeRecord {
            a,
            b,
            merged,
            relation,
            weight: weight.reduced(),
            level,
            cells: size,
        });
        if size > 2 * level_base {
            level += 1;
            level_base = size;
            level_hid_edges = false;
        }
        forest.push_candidates(merged, &mut heap);
    }
    if level_hid_edges {
        level += 1;
    }

    let coarsest = level;
    let e_level = (0..mesh.num_edges())
        .map(|e| match hidden_at[e] {
            Some(l) => l,
            None if singular[e] && mesh.edge_cells(e).len() != 1 && coarsest > 0 => coarsest - 1,
            None => coarsest,
        })
        .collect();
    LodEdgeStructure {
        e_level,
        level_count: coarsest + 1,
        initial_components: sheets.len(),
        merges,
    }
}
