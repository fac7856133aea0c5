use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unexpected end of input while reading {0}")]
    UnexpectedEof(&'static str),
    #[error("unsupported cell type: {0}")]
    UnsupportedCellType(String),
    #[error("cell {cell}: vertex index {index} out of range ({count} vertices)")]
    IndexOutOfRange {
        cell: usize,
        index: usize,
        count: usize,
    },
    #[error("mesh contains no hexahedra")]
    EmptyMesh,
    #[error("cells {first} and {second} reference the same vertex set")]
    DuplicateCell { first: usize, second: usize },
    #[error("cell {0} is degenerate (repeated vertex index)")]
    DegenerateCell(usize),
    #[error("face {face:?} is shared by more than two cells {cells:?}")]
    NonManifoldFace { face: [usize; 4], cells: Vec<usize> },
    #[error("edge {edge} is not an edge of cell {cell}")]
    EdgeNotInCell { edge: usize, cell: usize },
    #[error("unknown mesh format for {0}")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
