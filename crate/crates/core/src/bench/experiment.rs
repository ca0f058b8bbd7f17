//! Experiment descriptions, built-in benchmark set-ups and the run driver.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::norms::{error_norms, ErrorReport};
use crate::bench::oracles::{advection_diffusion, disk_advection, gaussian_diffusion, DamBreak, PointRelease};
use crate::boundary::{BoundaryKind, BoundaryPolicy, SideBoundaries};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{build_dual, generate, io, mesh_quality_report, DualMesh, GridPattern, MeshQuality, RectDomain};
use crate::output::{field_file_name, write_fields, write_limiters, write_vtk, DiagnosticsLog};
use crate::reconstruction::{CellLimiter, Topography};
use crate::state::{FieldState, SchemeConfig, StepDiagnostics};
use crate::timestepping::{RunObserver, RunSummary, Solver};

pub const BUILTIN_EXPERIMENTS: [&str; 6] =
    ["example1-dry", "example1-wet", "example2", "example3", "example4", "example5"];

/// Bed elevation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Bed {
    #[default]
    Flat,
    /// Two small cones at `(30, -9)` and `(30, 9)` and a large one at `(47.5, 0)`.
    ThreeHumps,
    /// `B = sx x + sy y`.
    Plane { sx: f64, sy: f64 },
}

impl Bed {
    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            Bed::Flat => 0.0,
            Bed::ThreeHumps => three_humps(p),
            Bed::Plane { sx, sy } => sx * p.x + sy * p.y,
        }
    }
}

pub fn three_humps(p: Point) -> f64 {
    let small = |yc: f64| 1.0 - 0.125 * ((p.x - 30.0).powi(2) + (p.y - yc).powi(2)).sqrt();
    let big = 3.0 - 0.3 * ((p.x - 47.5).powi(2) + p.y * p.y).sqrt();
    0.0f64.max(small(-9.0)).max(big).max(small(9.0))
}

/// Initial depth and velocity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HydroInit {
    /// Still water of depth `h_left` for `x <= x0` and `h_right` beyond.
    DamBreak { x0: f64, h_left: f64, h_right: f64 },
    Uniform { h: f64, u: f64, v: f64 },
    /// Still water with a flat surface at `level` wherever the bed is lower.
    LakeAtRest { level: f64 },
}

/// Initial concentration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SoluteInit {
    Constant { c: f64 },
    /// `left` for `x <= x_split`, `right` beyond.
    Step { x_split: f64, left: f64, right: f64 },
    /// The reference solution at the start time.
    FromReference,
}

/// Analytic solution a run is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Reference {
    /// Depth of the one-dimensional dam break.
    DamBreak { x0: f64, h_left: f64, h_right: f64 },
    GaussianDiffusion { sigma: f64, gamma: f64, x0: f64, y0: f64 },
    PointRelease { mass: f64, depth: f64, gamma: f64, u: f64, v: f64, x0: f64, y0: f64 },
    /// Translated indicator of a disk.
    Disk { x0: f64, y0: f64, radius: f64, u: f64, v: f64 },
}

impl Reference {
    /// Name of the compared field.
    pub fn field(&self) -> &'static str {
        match self {
            Reference::DamBreak { .. } => "h",
            _ => "c",
        }
    }

    pub fn eval(&self, p: Point, t: f64, g: f64) -> Result<f64> {
        Ok(match *self {
            Reference::DamBreak { x0, h_left, h_right } => DamBreak::new(h_left, h_right, x0, g)?.eval(p.x, t).0,
            Reference::GaussianDiffusion { sigma, gamma, x0, y0 } => gaussian_diffusion(p.x, p.y, t, sigma, gamma, x0, y0),
            Reference::PointRelease { mass, depth, gamma, u, v, x0, y0 } => {
                advection_diffusion(p, t, &PointRelease { mass, depth, gamma, u, v, x0, y0 })?
            }
            Reference::Disk { x0, y0, radius, u, v } => disk_advection(p, t, Point::new(x0, y0), radius, u, v),
        })
    }

    /// Reference values at every cell center of mass.
    pub fn sample(&self, mesh: &DualMesh, t: f64, g: f64) -> Result<Vec<f64>> {
        if let Reference::DamBreak { x0, h_left, h_right } = *self {
            let d = DamBreak::new(h_left, h_right, x0, g)?;
            return Ok(mesh.cells.iter().map(|c| d.eval(c.centroid.x, t).0).collect());
        }
        mesh.cells.iter().map(|c| self.eval(c.centroid, t, g)).collect()
    }
}

/// Everything needed to set up and run one simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    /// `[x0, x1, y0, y1]`.
    pub domain: [f64; 4],
    pub target_cell_area: f64,
    #[serde(default)]
    pub pattern: GridPattern,
    /// Triangulation file; overrides the generated rectangle mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_file: Option<PathBuf>,
    #[serde(default)]
    pub bed: Bed,
    pub hydro: HydroInit,
    pub solute: SoluteInit,
    #[serde(default)]
    pub boundary: SideBoundaries,
    /// Inflow state for `inflow`-marked nodes of a mesh file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflow: Option<BoundaryKind>,
    #[serde(default)]
    pub start_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
    #[serde(default)]
    pub scheme: SchemeConfig,
}

impl ExperimentSpec {
    pub fn builtin(name: &str) -> Result<Self> {
        let walls = SideBoundaries::uniform(BoundaryKind::Wall);
        let open = SideBoundaries::uniform(BoundaryKind::Outflow);
        let stream = |w: f64, u: f64, v: f64| SideBoundaries {
            left: BoundaryKind::Inflow { w, u, v, c: 0.0 },
            bottom: BoundaryKind::Inflow { w, u, v, c: 0.0 },
            right: BoundaryKind::Outflow,
            top: BoundaryKind::Outflow,
        };
        let scheme = |end_time: f64, gamma: f64, interval: f64| SchemeConfig {
            end_time,
            gamma,
            output_interval: Some(interval),
            ..SchemeConfig::default()
        };
        let dam = |h_right: f64| ExperimentSpec {
            name: name.to_string(),
            domain: [0.0, 10.0, 0.0, 5.0],
            target_cell_area: 4.962e-3,
            pattern: GridPattern::Equilateral,
            mesh_file: None,
            bed: Bed::Flat,
            hydro: HydroInit::DamBreak { x0: 5.0, h_left: 1.0, h_right },
            solute: SoluteInit::Constant { c: 1.0 },
            boundary: open,
            inflow: None,
            start_time: 0.0,
            reference: Some(Reference::DamBreak { x0: 5.0, h_left: 1.0, h_right }),
            scheme: scheme(1.0, 0.0, 0.25),
        };
        let spec = match name {
            "example1-dry" => dam(0.0),
            "example1-wet" => dam(0.1),
            "example2" => ExperimentSpec {
                domain: [0.0, 10.0, 0.0, 10.0],
                target_cell_area: 1.243e-3,
                hydro: HydroInit::Uniform { h: 1.0, u: 0.5, v: 0.5 },
                solute: SoluteInit::FromReference,
                boundary: stream(1.0, 0.5, 0.5),
                reference: Some(Reference::Disk { x0: 1.5, y0: 1.5, radius: 1.0, u: 0.5, v: 0.5 }),
                scheme: scheme(12.0, 0.0, 1.0),
                ..dam(0.0)
            },
            "example3" => ExperimentSpec {
                domain: [-2.0, 2.0, -2.0, 2.0],
                target_cell_area: 7.292e-4,
                hydro: HydroInit::Uniform { h: 0.01, u: 0.0, v: 0.0 },
                solute: SoluteInit::FromReference,
                boundary: open,
                reference: Some(Reference::GaussianDiffusion { sigma: 0.1, gamma: 0.01, x0: 0.0, y0: 0.0 }),
                scheme: SchemeConfig { nu: 1.0, ..scheme(15.0, 0.01, 7.5) },
                ..dam(0.0)
            },
            "example4" => ExperimentSpec {
                domain: [-1.0, 1.0, -1.0, 1.0],
                target_cell_area: 4.97e-5,
                hydro: HydroInit::Uniform { h: 1.0, u: 0.5, v: 0.5 },
                solute: SoluteInit::FromReference,
                boundary: stream(1.0, 0.5, 0.5),
                start_time: 0.1,
                reference: Some(Reference::PointRelease {
                    mass: 0.1,
                    depth: 1.0,
                    gamma: 0.01,
                    u: 0.5,
                    v: 0.5,
                    x0: -0.45,
                    y0: -0.45,
                }),
                scheme: SchemeConfig { nu: 1.0, ..scheme(1.5, 0.01, 0.1) },
                ..dam(0.0)
            },
            "example5" => ExperimentSpec {
                domain: [0.0, 75.0, -15.0, 15.0],
                target_cell_area: 2.98e-2,
                bed: Bed::ThreeHumps,
                hydro: HydroInit::DamBreak { x0: 16.0, h_left: 1.875, h_right: 0.0 },
                solute: SoluteInit::Step { x_split: 10.0, left: 1.0, right: 0.0 },
                boundary: walls,
                reference: None,
                scheme: SchemeConfig { manning: 0.018, ..scheme(18.0, 0.0, 2.0) },
                ..dam(0.0)
            },
            other => return Err(Error::UnknownExperiment(other.to_string())),
        };
        Ok(ExperimentSpec { name: name.to_string(), ..spec })
    }

    /// Parses a TOML experiment. A top-level `base = "<builtin>"` key starts
    /// from that experiment and overrides only the keys present in the file;
    /// a table carrying its own `kind` replaces the base table outright.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let merged = match table.remove("base") {
            Some(toml::Value::String(base)) => {
                let mut b = toml::Table::try_from(Self::builtin(&base)?).map_err(|e| Error::Config(e.to_string()))?;
                b.insert("name".into(), toml::Value::String(base));
                merge(&mut b, table);
                b
            }
            Some(_) => return Err(Error::Config("`base` must be a string".into())),
            None => table,
        };
        let spec: Self = toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::from_toml_str(&text)?;
        if let Some(m) = &spec.mesh_file {
            if m.is_relative() {
                spec.mesh_file = Some(path.parent().unwrap_or(Path::new(".")).join(m));
            }
        }
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let [x0, x1, y0, y1] = self.domain;
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::Config(format!("empty domain {:?}", self.domain)));
        }
        if !(self.target_cell_area > 0.0) {
            return Err(Error::Config("target cell area must be positive".into()));
        }
        if self.start_time > self.scheme.end_time {
            return Err(Error::Config("start time lies after the end time".into()));
        }
        self.scheme.validate()
    }

    pub fn rect(&self) -> RectDomain {
        let [x0, x1, y0, y1] = self.domain;
        RectDomain::new(x0, x1, y0, y1)
    }

    /// Sets the target area so the generated mesh has about `cells` cells.
    pub fn with_cells(mut self, cells: usize) -> Self {
        self.target_cell_area = self.rect().area() / cells as f64;
        self
    }

    pub fn build_mesh(&self) -> Result<DualMesh> {
        let tri = match &self.mesh_file {
            Some(path) => io::read_mesh(path)?,
            None => generate::structured(self.rect(), self.target_cell_area, self.pattern),
        };
        build_dual(&tri)
    }

    pub fn topography(&self, mesh: &DualMesh) -> Topography {
        match self.bed {
            Bed::Flat => Topography::flat(mesh),
            bed => Topography::from_fn(mesh, |p| bed.eval(p)),
        }
    }

    pub fn boundary_policy(&self, mesh: &DualMesh) -> Result<BoundaryPolicy> {
        if self.mesh_file.is_some() {
            BoundaryPolicy::from_markers(mesh, self.inflow)
        } else {
            Ok(BoundaryPolicy::from_sides(mesh, &self.boundary))
        }
    }

    /// Cell averages sampled at the centers of mass (depths of a lake at rest
    /// are integrated over the cell's midpoint beds so the surface is exactly flat).
    pub fn initial_state(&self, mesh: &DualMesh, topo: &Topography) -> Result<FieldState> {
        let mut st = FieldState::zeros(mesh.len());
        st.t = self.start_time;
        for (j, cell) in mesh.cells.iter().enumerate() {
            let x = cell.centroid;
            let (h, u, v) = match self.hydro {
                HydroInit::DamBreak { x0, h_left, h_right } => (if x.x <= x0 { h_left } else { h_right }, 0.0, 0.0),
                HydroInit::Uniform { h, u, v } => (h, u, v),
                HydroInit::LakeAtRest { level } => {
                    let h = cell.faces().map(|k| mesh.faces[k].mu * (level - topo.face[k]).max(0.0)).sum();
                    (h, 0.0, 0.0)
                }
            };
            let c = match self.solute {
                SoluteInit::Constant { c } => c,
                SoluteInit::Step { x_split, left, right } => {
                    if x.x <= x_split {
                        left
                    } else {
                        right
                    }
                }
                SoluteInit::FromReference => {
                    let r = self
                        .reference
                        .ok_or_else(|| Error::Config("solute taken from the reference but none is set".into()))?;
                    r.eval(x, self.start_time, self.scheme.g)?
                }
            };
            if h < 0.0 || c < 0.0 {
                return Err(Error::Config(format!("negative initial depth or concentration in cell {j}")));
            }
            st.h[j] = h;
            st.p[j] = h * u;
            st.q[j] = h * v;
            st.c[j] = c;
            st.s[j] = h * c;
        }
        Ok(st)
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) if !o.contains_key("kind") => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Where and what to write during a run.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub vtk: bool,
    pub limiters: bool,
    /// Keep every step's diagnostics in memory.
    pub keep_diagnostics: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub spec: ExperimentSpec,
    pub mesh: DualMesh,
    pub topo: Topography,
    pub quality: MeshQuality,
    pub state: FieldState,
    pub summary: RunSummary,
    pub error: Option<ErrorReport>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub eps: f64,
}

struct Writer<'a> {
    opts: &'a RunOptions,
    mesh: &'a DualMesh,
    topo: &'a Topography,
    eps: f64,
    log: Option<DiagnosticsLog>,
    kept: Vec<StepDiagnostics>,
}

impl RunObserver for Writer<'_> {
    fn on_step(&mut self, d: &StepDiagnostics, _state: &FieldState) -> Result<()> {
        if let Some(log) = &mut self.log {
            log.push(d)?;
        }
        if self.opts.keep_diagnostics {
            self.kept.push(*d);
        }
        Ok(())
    }

    fn on_output(&mut self, state: &FieldState, limiters: &[CellLimiter]) -> Result<()> {
        let Some(dir) = &self.opts.out_dir else { return Ok(()) };
        let name = field_file_name(state.t);
        write_fields(&dir.join(&name), self.mesh, self.topo, state, self.eps)?;
        if self.opts.vtk {
            write_vtk(&dir.join(name.replace(".csv", ".vtk")), self.mesh, self.topo, state, self.eps)?;
        }
        if self.opts.limiters {
            write_limiters(&dir.join(name.replace("out_", "limiters_")), limiters)?;
        }
        if let Some(log) = &mut self.log {
            log.flush()?;
        }
        Ok(())
    }
}

/// Builds the mesh and initial state of `spec`, integrates to its end time
/// and compares against the reference solution when one exists.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ExperimentOutcome> {
    spec.validate()?;
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mesh = spec.build_mesh()?;
    let topo = spec.topography(&mesh);
    let policy = spec.boundary_policy(&mesh)?;
    let mut state = spec.initial_state(&mesh, &topo)?;
    let quality = mesh_quality_report(&mesh);

    let (summary, kept, eps) = {
        let mut solver = Solver::new(&mesh, topo.clone(), policy, spec.scheme.clone())?;
        let log = match &opts.out_dir {
            Some(dir) => Some(DiagnosticsLog::create(dir.join("diagnostics.csv"))?),
            None => None,
        };
        let mut w = Writer { opts, mesh: &mesh, topo: &topo, eps: solver.eps, log, kept: Vec::new() };
        let summary = solver.run(&mut state, &mut w)?;
        if let Some(log) = &mut w.log {
            log.flush()?;
        }
        (summary, w.kept, solver.eps)
    };

    let error = match &spec.reference {
        Some(r) => {
            let exact = r.sample(&mesh, state.t, spec.scheme.g)?;
            let numeric = if r.field() == "h" { &state.h } else { &state.c };
            Some(error_norms(r.field(), state.t, &mesh, numeric, &exact, None))
        }
        None => None,
    };
    if let (Some(dir), Some(e)) = (&opts.out_dir, &error) {
        let path = dir.join("error_report.csv");
        std::fs::write(&path, format!("{}\n{}\n", ErrorReport::CSV_HEADER, e.csv_row())).map_err(|e| Error::io(&path, e))?;
    }
    Ok(ExperimentOutcome {
        spec: spec.clone(),
        mesh,
        topo,
        quality,
        state,
        summary,
        error,
        diagnostics: kept,
        eps,
    })
}
