//! ASCII readers for MEDIT `.mesh` and legacy VTK unstructured grids, and
//! writers for MEDIT and VTK with attached scalar arrays.
//!
//! MEDIT hexahedra list the bottom quad then the top quad, the same layout
//! as the internal corner convention, so no corner permutation is applied.
//! The orientation actually found in the file is reported through
//! [`HexMesh::orientation`].

use super::{HexMesh, MeshError};
use crate::geom::Vec3;
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Medit,
    VtkLegacy,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "mesh" => Some(MeshFormat::Medit),
            "vtk" => Some(MeshFormat::VtkLegacy),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataLocation {
    Cell,
    Point,
}

/// A named scalar array read from `CELL_DATA` / `POINT_DATA`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarArray {
    pub name: String,
    pub location: DataLocation,
    pub values: Vec<f64>,
}

pub fn load_mesh<R: Read>(mut source: R, format: MeshFormat) -> Result<HexMesh, MeshError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    load_mesh_str(&text, format)
}

pub fn load_mesh_str(text: &str, format: MeshFormat) -> Result<HexMesh, MeshError> {
    match format {
        MeshFormat::Medit => parse_medit(text),
        MeshFormat::VtkLegacy => parse_vtk(text),
    }
}

pub fn load_mesh_path(path: &Path) -> Result<HexMesh, MeshError> {
    let format = MeshFormat::from_path(path)
        .ok_or_else(|| MeshError::UnknownFormat(path.display().to_string()))?;
    load_mesh(std::fs::File::open(path)?, format)
}

struct Tokens<'a> {
    toks: Vec<(&'a str, usize)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(lines: impl Iterator<Item = (usize, &'a str)>, comment: Option<char>) -> Self {
        let mut toks = Vec::new();
        for (n, line) in lines {
            let line = match comment.and_then(|c| line.find(c)) {
                Some(i) => &line[..i],
                None => line,
            };
            toks.extend(line.split_whitespace().map(|t| (t, n)));
        }
        Tokens { toks, pos: 0 }
    }

    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).map(|t| t.0)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(0, |t| t.1)
    }

    fn next(&mut self, what: &'static str) -> Result<&'a str, MeshError> {
        let t = self.toks.get(self.pos).ok_or(MeshError::UnexpectedEof(what))?;
        self.pos += 1;
        Ok(t.0)
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &'static str) -> Result<T, MeshError> {
        let line = self.line();
        let t = self.next(what)?;
        t.parse().map_err(|_| MeshError::Parse {
            line,
            msg: format!("expected {what}, found {t:?}"),
        })
    }

    fn skip(&mut self, n: usize, what: &'static str) -> Result<(), MeshError> {
        if self.pos + n > self.toks.len() {
            return Err(MeshError::UnexpectedEof(what));
        }
        self.pos += n;
        Ok(())
    }
}

/// Tokens per entry of MEDIT sections that are read past without use.
fn medit_section_width(keyword: &str) -> Option<usize> {
    Some(match keyword {
        "Edges" => 3,
        "Triangles" => 4,
        "Quadrilaterals" => 5,
        "Corners" | "RequiredVertices" | "Ridges" | "RequiredEdges" => 1,
        "Normals" | "Tangents" => 3,
        "NormalAtVertices" => 2,
        "NormalAtTriangleVertices" | "NormalAtQuadrilateralVertices" | "TangentAtEdges" => 3,
        _ => return None,
    })
}

fn parse_medit(text: &str) -> Result<HexMesh, MeshError> {
    let mut t = Tokens::new(text.lines().enumerate().map(|(i, l)| (i + 1, l)), Some('#'));
    match t.peek() {
        Some(k) if k.eq_ignore_ascii_case("MeshVersionFormatted") => {
            t.next("header")?;
            let line = t.line();
            let v: u32 = t.parse("format version")?;
            if !(1..=4).contains(&v) {
                return Err(MeshError::MalformedHeader {
                    line,
                    msg: format!("unsupported MeshVersionFormatted {v}"),
                });
            }
        }
        _ => {
            return Err(MeshError::MalformedHeader {
                line: t.line(),
                msg: "expected MeshVersionFormatted".into(),
            })
        }
    }
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut cells: Vec<[usize; 8]> = Vec::new();
    let mut dimension = None;
    while let Some(kw) = t.peek() {
        let line = t.line();
        t.next("keyword")?;
        match kw {
            "Dimension" => {
                let d: usize = t.parse("dimension")?;
                if d != 3 {
                    return Err(MeshError::MalformedHeader {
                        line,
                        msg: format!("dimension {d} is not supported"),
                    });
                }
                dimension = Some(d);
            }
            "Vertices" => {
                if dimension.is_none() {
                    return Err(MeshError::MalformedHeader {
                        line,
                        msg: "Vertices before Dimension".into(),
                    });
                }
                let n: usize = t.parse("vertex count")?;
                vertices.reserve(n);
                for _ in 0..n {
                    let p = [
                        t.parse("coordinate")?,
                        t.parse("coordinate")?,
                        t.parse("coordinate")?,
                    ];
                    t.skip(1, "vertex reference")?;
                    vertices.push(p);
                }
            }
            "Hexahedra" => {
                let n: usize = t.parse("hexahedron count")?;
                cells.reserve(n);
                for _ in 0..n {
                    let line = t.line();
                    let mut c = [0usize; 8];
                    for slot in &mut c {
                        let one_based: usize = t.parse("vertex index")?;
                        if one_based == 0 {
                            return Err(MeshError::Parse {
                                line,
                                msg: "vertex index 0 in 1-based section".into(),
                            });
                        }
                        *slot = one_based - 1;
                    }
                    t.skip(1, "hexahedron reference")?;
                    cells.push(c);
                }
            }
            "Tetrahedra" | "Prisms" | "Pyramids" => {
                let n: usize = t.parse("element count")?;
                if n > 0 {
                    return Err(MeshError::UnsupportedCellType(kw.to_ascii_lowercase()));
                }
            }
            "End" => break,
            other => {
                let width = medit_section_width(other).ok_or_else(|| MeshError::Parse {
                    line,
                    msg: format!("unknown section {other:?}"),
                })?;
                let n: usize = t.parse("entry count")?;
                t.skip(n * width, "section entries")?;
            }
        }
    }
    if cells.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    HexMesh::build(vertices, cells)
}

fn vtk_cell_type_name(t: u32) -> String {
    let name = match t {
        1 => "vertex",
        3 => "line",
        5 => "triangle",
        9 => "quad",
        10 => "tetra",
        13 => "wedge",
        14 => "pyramid",
        _ => return format!("vtk type {t}"),
    };
    name.to_string()
}

fn parse_vtk(text: &str) -> Result<HexMesh, MeshError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header = |expect: &str| -> Result<(usize, &str), MeshError> {
        loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() && expect != "title" => continue,
                Some((n, l)) => return Ok((n, l.trim())),
                None => return Err(MeshError::UnexpectedEof("VTK header")),
            }
        }
    };
    let (n, l) = header("version")?;
    if !l.starts_with("# vtk DataFile Version") {
        return Err(MeshError::MalformedHeader {
            line: n,
            msg: "missing '# vtk DataFile Version' line".into(),
        });
    }
    header("title")?;
    let (n, l) = header("encoding")?;
    if !l.eq_ignore_ascii_case("ASCII") {
        return Err(MeshError::MalformedHeader {
            line: n,
            msg: format!("only ASCII files are supported, found {l:?}"),
        });
    }
    let (n, l) = header("dataset")?;
    let ds: Vec<&str> = l.split_whitespace().collect();
    if ds.len() != 2 || !ds[0].eq_ignore_ascii_case("DATASET") || ds[1] != "UNSTRUCTURED_GRID" {
        return Err(MeshError::MalformedHeader {
            line: n,
            msg: format!("expected DATASET UNSTRUCTURED_GRID, found {l:?}"),
        });
    }
    let mut t = Tokens::new(lines, None);

    let mut vertices: Vec<Vec3> = Vec::new();
    let mut conn: Vec<Vec<usize>> = Vec::new();
    let mut types: Vec<u32> = Vec::new();
    let mut scalars = Vec::new();
    let mut location: Option<(DataLocation, usize)> = None;
    while let Some(kw) = t.peek() {
        let line = t.line();
        t.next("keyword")?;
        match kw.to_ascii_uppercase().as_str() {
            "POINTS" => {
                let n: usize = t.parse("point count")?;
                t.next("point data type")?;
                vertices.reserve(n);
                for _ in 0..n {
                    vertices.push([
                        t.parse("coordinate")?,
                        t.parse("coordinate")?,
                        t.parse("coordinate")?,
                    ]);
                }
            }
            "CELLS" => {
                let n: usize = t.parse("cell count")?;
                let _size: usize = t.parse("cell list size")?;
                for _ in 0..n {
                    let k: usize = t.parse("cell vertex count")?;
                    let mut c = Vec::with_capacity(k);
                    for _ in 0..k {
                        c.push(t.parse("vertex index")?);
                    }
                    conn.push(c);
                }
            }
            "CELL_TYPES" => {
                let n: usize = t.parse("cell type count")?;
                for _ in 0..n {
                    types.push(t.parse("cell type")?);
                }
            }
            "CELL_DATA" => location = Some((DataLocation::Cell, t.parse("cell data count")?)),
            "POINT_DATA" => location = Some((DataLocation::Point, t.parse("point data count")?)),
            "SCALARS" => {
                let (loc, count) = location.ok_or_else(|| MeshError::Parse {
                    line,
                    msg: "SCALARS outside CELL_DATA/POINT_DATA".into(),
                })?;
                let name = t.next("array name")?.to_string();
                t.next("array type")?;
                let mut ncomp = 1usize;
                if let Some(Ok(k)) = t.peek().map(str::parse::<usize>) {
                    t.next("component count")?;
                    ncomp = k;
                }
                if t.peek() == Some("LOOKUP_TABLE") {
                    t.skip(2, "lookup table name")?;
                }
                let mut values = Vec::with_capacity(count);
                for i in 0..count * ncomp {
                    let v: f64 = t.parse("scalar value")?;
                    if i % ncomp == 0 {
                        values.push(v);
                    }
                }
                if ncomp == 1 {
                    scalars.push(ScalarArray {
                        name,
                        location: loc,
                        values,
                    });
                }
            }
            "FIELD" => {
                let (loc, _) = location.ok_or_else(|| MeshError::Parse {
                    line,
                    msg: "FIELD outside CELL_DATA/POINT_DATA".into(),
                })?;
                t.next("field name")?;
                let arrays: usize = t.parse("field array count")?;
                for _ in 0..arrays {
                    let name = t.next("array name")?.to_string();
                    let ncomp: usize = t.parse("component count")?;
                    let ntup: usize = t.parse("tuple count")?;
                    t.next("array type")?;
                    let mut values = Vec::with_capacity(ntup);
                    for i in 0..ncomp * ntup {
                        let v: f64 = t.parse("field value")?;
                        if i % ncomp == 0 {
                            values.push(v);
                        }
                    }
                    if ncomp == 1 {
                        scalars.push(ScalarArray {
                            name,
                            location: loc,
                            values,
                        });
                    }
                }
            }
            "VECTORS" | "NORMALS" | "TENSORS" => {
                let (_, count) = location.ok_or_else(|| MeshError::Parse {
                    line,
                    msg: format!("{kw} outside CELL_DATA/POINT_DATA"),
                })?;
                t.skip(2, "array header")?;
                let per = if kw.eq_ignore_ascii_case("TENSORS") { 9 } else { 3 };
                t.skip(count * per, "array values")?;
            }
            "LOOKUP_TABLE" => {
                t.next("table name")?;
                let n: usize = t.parse("table size")?;
                t.skip(4 * n, "table entries")?;
            }
            "METADATA" => {
                // INFORMATION blocks are not needed; skip to the next keyword
                while let Some(k) = t.peek() {
                    if matches!(k, "CELLS" | "CELL_TYPES" | "CELL_DATA" | "POINT_DATA") {
                        break;
                    }
                    t.next("metadata")?;
                }
            }
            "OFFSETS" | "CONNECTIVITY" => {
                return Err(MeshError::Parse {
                    line,
                    msg: "VTK 5 offset/connectivity cell layout is not supported".into(),
                })
            }
            _ => {
                return Err(MeshError::Parse {
                    line,
                    msg: format!("unexpected keyword {kw:?}"),
                })
            }
        }
    }
    if types.len() != conn.len() {
        return Err(MeshError::Parse {
            line: t.line(),
            msg: format!(
                "{} cells but {} cell types",
                conn.len(),
                types.len()
            ),
        });
    }
    if let Some(&bad) = types.iter().find(|&&ty| ty != 12) {
        return Err(MeshError::UnsupportedCellType(vtk_cell_type_name(bad)));
    }
    if conn.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    let mut cells = Vec::with_capacity(conn.len());
    for (i, c) in conn.iter().enumerate() {
        let arr: [usize; 8] = c.as_slice().try_into().map_err(|_| MeshError::Parse {
            line: 0,
            msg: format!("hexahedron {i} lists {} vertices", c.len()),
        })?;
        cells.push(arr);
    }
    let mut mesh = HexMesh::build(vertices, cells)?;
    for s in &scalars {
        let expect = match s.location {
            DataLocation::Cell => mesh.num_cells(),
            DataLocation::Point => mesh.num_vertices(),
        };
        if s.values.len() != expect {
            return Err(MeshError::Parse {
                line: 0,
                msg: format!(
                    "array {:?} has {} values, expected {expect}",
                    s.name,
                    s.values.len()
                ),
            });
        }
    }
    mesh.scalars = scalars;
    Ok(mesh)
}

/// Serializes the mesh as MEDIT ASCII with 1-based indices.
pub fn write_mesh(mesh: &HexMesh) -> String {
    let mut out = String::with_capacity(64 * (mesh.num_vertices() + mesh.num_cells()));
    out.push_str("MeshVersionFormatted 2\nDimension 3\n\nVertices\n");
    let _ = writeln!(out, "{}", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {} {} 0", p[0], p[1], p[2]);
    }
    out.push_str("\nHexahedra\n");
    let _ = writeln!(out, "{}", mesh.num_cells());
    for c in mesh.cells() {
        for v in c {
            let _ = write!(out, "{} ", v + 1);
        }
        out.push_str("0\n");
    }
    out.push_str("\nEnd\n");
    out
}

/// Serializes the mesh as a legacy VTK unstructured grid with the given
/// scalar arrays attached as `CELL_DATA` / `POINT_DATA`.
pub fn write_vtk(mesh: &HexMesh, arrays: &[ScalarArray]) -> String {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nhexlens export\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    let _ = writeln!(out, "CELLS {} {}", mesh.num_cells(), mesh.num_cells() * 9);
    for c in mesh.cells() {
        out.push('8');
        for v in c {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "CELL_TYPES {}", mesh.num_cells());
    for _ in 0..mesh.num_cells() {
        out.push_str("12\n");
    }
    for (loc, header, count) in [
        (DataLocation::Cell, "CELL_DATA", mesh.num_cells()),
        (DataLocation::Point, "POINT_DATA", mesh.num_vertices()),
    ] {
        let group: Vec<&ScalarArray> = arrays.iter().filter(|a| a.location == loc).collect();
        if group.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{header} {count}");
        for a in group {
            let name: String = a
                .name
                .chars()
                .map(|c| if c.is_whitespace() { '_' } else { c })
                .collect();
            let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in &a.values {
                let _ = writeln!(out, "{v}");
            }
        }
    }
    out
}
