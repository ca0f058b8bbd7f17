//! CSV and VTK writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::DualMesh;
use crate::reconstruction::{CellLimiter, Topography};
use crate::state::{FieldState, StepDiagnostics};

pub const FIELD_HEADER: &str = "j,x_c,y_c,B,h,u,v,c,w";
pub const DIAGNOSTICS_HEADER: &str = "step,t,dt,dt_h,dt_c,dt_s,vol,mass_s,min_h,max_c,min_c";

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Field dump file name for time `t`, fixed width so that names sort by time.
pub fn field_file_name(t: f64) -> String {
    format!("out_{t:012.6}.csv")
}

pub fn write_fields(path: &Path, mesh: &DualMesh, topo: &Topography, state: &FieldState, eps: f64) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{FIELD_HEADER}").map_err(io)?;
    for (j, cell) in mesh.cells.iter().enumerate() {
        let (u, v) = state.velocity(j, eps);
        let b = topo.cell[j];
        writeln!(
            w,
            "{j},{},{},{},{},{},{},{},{}",
            cell.centroid.x,
            cell.centroid.y,
            b,
            state.h[j],
            u,
            v,
            state.c[j],
            state.h[j] + b
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn diagnostics_row(d: &StepDiagnostics) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        d.step, d.t, d.dt, d.dt_h, d.dt_c, d.dt_s, d.volume, d.solute_mass, d.min_h, d.max_c, d.min_c
    )
}

/// Appends diagnostics rows to a CSV file, writing the header first.
pub struct DiagnosticsLog {
    path: PathBuf,
    w: BufWriter<File>,
}

impl DiagnosticsLog {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut w = create(&path)?;
        writeln!(w, "{DIAGNOSTICS_HEADER}").map_err(|e| Error::io(&path, e))?;
        Ok(DiagnosticsLog { path, w })
    }

    pub fn push(&mut self, d: &StepDiagnostics) -> Result<()> {
        writeln!(self.w, "{}", diagnostics_row(d)).map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.w.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_limiters(path: &Path, limiters: &[CellLimiter]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "j,alpha,beta,level").map_err(io)?;
    for (j, l) in limiters.iter().enumerate() {
        writeln!(w, "{j},{},{},{}", l.alpha, l.beta, u8::from(l.level)).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Legacy ASCII VTK of the dual cells with cell data.
pub fn write_vtk(path: &Path, mesh: &DualMesh, topo: &Topography, state: &FieldState, eps: f64) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "# vtk DataFile Version 3.0\ndual cells t={}\nASCII\nDATASET UNSTRUCTURED_GRID", state.t).map_err(io)?;
    writeln!(w, "POINTS {} double", mesh.vertices.len()).map_err(io)?;
    for p in &mesh.vertices {
        writeln!(w, "{} {} 0", p.x, p.y).map_err(io)?;
    }
    let size: usize = mesh.cells.iter().map(|c| c.face_count() + 1).sum();
    writeln!(w, "CELLS {} {size}", mesh.len()).map_err(io)?;
    for j in 0..mesh.len() {
        let faces = mesh.cell_faces(j);
        write!(w, "{}", faces.len()).map_err(io)?;
        for f in faces {
            write!(w, " {}", f.vertices[0]).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.len()).map_err(io)?;
    for _ in 0..mesh.len() {
        writeln!(w, "7").map_err(io)?;
    }
    writeln!(w, "CELL_DATA {}", mesh.len()).map_err(io)?;
    type Scalar<'a> = (&'static str, Box<dyn Fn(usize) -> f64 + 'a>);
    let scalars: [Scalar; 5] = [
        ("h", Box::new(|j| state.h[j])),
        ("w", Box::new(|j| state.h[j] + topo.cell[j])),
        ("B", Box::new(|j| topo.cell[j])),
        ("c", Box::new(|j| state.c[j])),
        ("speed", Box::new(|j| {
            let (u, v) = state.velocity(j, eps);
            u.hypot(v)
        })),
    ];
    for (name, f) in scalars.iter() {
        writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default").map_err(io)?;
        for j in 0..mesh.len() {
            writeln!(w, "{}", f(j)).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}
