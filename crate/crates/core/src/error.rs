use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate triangle {index}: signed area {area:e} below tolerance {tolerance:e}")]
    DegenerateTriangle { index: usize, area: f64, tolerance: f64 },

    #[error("non-conforming mesh: edge ({0}, {1}) is shared by {2} triangles")]
    NonConformingEdge(usize, usize, usize),

    #[error("triangle {triangle} references node {node} but only {count} nodes exist")]
    NodeIndexOutOfRange { triangle: usize, node: usize, count: usize },

    #[error("node {0} has a non-manifold triangle fan")]
    NonManifoldNode(usize),

    #[error("dual cell {cell} is not star-shaped about its center of mass (face {face}, distance {distance:e})")]
    NonStarShapedCell { cell: usize, face: usize, distance: f64 },

    #[error("mesh file parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("negative average depth in cell {cell}: {depth:e}")]
    NegativeDepth { cell: usize, depth: f64 },

    #[error("non-finite {what} at cell {cell}")]
    NonFinite { what: &'static str, cell: usize },

    #[error("positivity violated after stage {stage} at t = {time}: cell {cell}, {field} = {value:e}")]
    PositivityViolation {
        stage: usize,
        time: f64,
        cell: usize,
        field: &'static str,
        value: f64,
    },

    #[error("max-min principle violated at cell {cell}: c = {value} outside [{min}, {max}]")]
    MaxMinViolation { cell: usize, value: f64, min: f64, max: f64 },

    #[error("time step underflow: dt = {dt:e} at t = {time}")]
    TimeStepUnderflow { dt: f64, time: f64 },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("oracle root solve did not converge: {0}")]
    Oracle(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
