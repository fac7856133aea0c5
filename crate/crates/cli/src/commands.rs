//! Implementations of the CLI subcommands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use hexlens_core::mesh::{load_mesh_path, write_mesh, write_vtk, DataLocation, HexMesh, ScalarArray};
use hexlens_core::quality::{metric_fields, Metric, Summary, VertexAggregation};
use hexlens_core::render::{render, CameraSpec, LensState, ObjectLens, RenderParams, Scene};
use hexlens_core::{build_lod, extract_sheets, synth};
use serde::Serialize;

use crate::args::{GenerateArgs, InfoArgs, LodArgs, RenderArgs, Shape};
use crate::report::{quality_summary, LodSummary, MeshSummary, RenderReport};
use crate::CliError;

pub fn load(path: &Path) -> Result<HexMesh, CliError> {
    load_mesh_path(path).map_err(|source| CliError::Mesh {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(CliError::io(path))
}

/// Pretty-prints a report to stdout; a closed pipe is not an error.
pub fn print_json<T: Serialize>(value: &T) {
    let json = serde_json::to_string_pretty(value).expect("reports serialize");
    let _ = writeln!(std::io::stdout().lock(), "{json}");
}

/// Render parameters from an optional JSON file, overridden by flags.
pub fn render_params(args: &RenderArgs) -> Result<RenderParams, CliError> {
    let mut p = match &args.params {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(CliError::io(path))?;
            serde_json::from_str(&text).map_err(|source| CliError::Json {
                path: path.clone(),
                source,
            })?
        }
        None => RenderParams::default(),
    };
    if let Some((w, h)) = args.size {
        p.width = w;
        p.height = h;
    }
    if let Some(v) = args.lod {
        p.lod = v;
    }
    if let Some(v) = args.delta {
        p.delta = v;
    }
    if let Some(v) = args.wbase {
        p.w_base = Some(v);
    }
    if let Some(v) = args.accent {
        p.accent = v;
    }
    if let Some(v) = args.face_alpha {
        p.face_alpha = v;
    }
    if let Some(v) = args.background {
        p.background = v;
    }
    if args.no_silhouettes {
        p.silhouettes = false;
    }
    if let Some([az, el]) = args.orbit {
        p.camera = match p.camera {
            CameraSpec::Orbit {
                distance, fov_y_deg, ..
            } => CameraSpec::Orbit {
                azimuth_deg: az,
                elevation_deg: el,
                distance,
                fov_y_deg,
            },
            CameraSpec::LookAt { .. } => {
                return Err(CliError::Usage(
                    "--orbit cannot be combined with a look-at camera".into(),
                ))
            }
        };
    }
    p.validate()?;
    Ok(p)
}

pub fn lens(args: &RenderArgs) -> LensState {
    match (args.lens, args.lens_obj) {
        (Some([cx, cy, r]), _) => LensState::Screen {
            center: [cx, cy],
            radius: r,
        },
        (None, Some([x, y, z, r])) => LensState::Object(ObjectLens::at([x, y, z], r)),
        (None, None) => LensState::Disabled,
    }
}

pub fn run_render(args: &RenderArgs) -> Result<RenderReport, CliError> {
    let params = render_params(args)?;
    let lens = lens(args);
    lens.validate()?;
    let mesh = load(&args.mesh)?;
    let (scene, info) = Scene::build_with_info(mesh, &args.metric, args.aggregation.into())?;
    let out = render(&scene, &params, &lens, args.threads)?;
    write_file(&args.output, out.image.encode_png()?)?;
    if let Some(raw) = &args.raw {
        let file = fs::File::create(raw).map_err(CliError::io(raw))?;
        out.image
            .write_raw(BufWriter::new(file))
            .map_err(CliError::io(raw))?;
    }
    let report = RenderReport::new(
        &args.mesh.display().to_string(),
        &scene,
        quality_summary(&info.raw_metric.name, &info.raw_metric.per_cell),
        info.degenerate_cells,
        info.metric_ms,
        info.lod_ms,
        (params.width, params.height),
        &out.stats,
    );
    if let Some(path) = &args.stats {
        let json = serde_json::to_string_pretty(&report).expect("reports serialize");
        write_file(path, json)?;
    }
    Ok(report)
}

pub fn run_lod(args: &LodArgs) -> Result<LodSummary, CliError> {
    let mesh = load(&args.mesh)?;
    let sheets = extract_sheets(&mesh);
    let lod = build_lod(&mesh, &sheets);
    if let Some(path) = &args.export {
        let file = fs::File::create(path).map_err(CliError::io(path))?;
        lod.write_obj(&mesh, BufWriter::new(file))
            .map_err(CliError::io(path))?;
    }
    if let Some(path) = &args.log {
        write_file(path, lod.merge_log_json())?;
    }
    Ok(LodSummary::of(&lod, sheets.len()))
}

#[derive(Clone, Debug, Serialize)]
pub struct InfoReport {
    pub mesh: MeshSummary,
    pub quality: Summary,
    pub degenerate_cells: usize,
}

pub fn run_info(args: &InfoArgs) -> Result<InfoReport, CliError> {
    let mesh = load(&args.mesh)?;
    let fields = metric_fields(
        &mesh,
        &Metric::ScaledJacobian,
        VertexAggregation::Max,
    )?;
    if let Some(path) = &args.vtk {
        let arrays = [
            ScalarArray {
                name: "scaled_jacobian".into(),
                location: DataLocation::Cell,
                values: fields.raw.per_cell.clone(),
            },
            ScalarArray {
                name: "importance".into(),
                location: DataLocation::Point,
                values: fields.importance.per_vertex.clone(),
            },
        ];
        write_file(path, write_vtk(&mesh, &arrays))?;
    }
    Ok(InfoReport {
        mesh: MeshSummary::of(&mesh),
        quality: quality_summary(&fields.raw.name, &fields.raw.per_cell),
        degenerate_cells: fields.degenerate_cells,
    })
}

pub fn run_generate(args: &GenerateArgs) -> Result<MeshSummary, CliError> {
    let built = match args.shape {
        Shape::Grid => synth::grid(args.dims, [1.0; 3]),
        Shape::Twisted => synth::twisted_grid(args.dims, args.angle),
        Shape::Ogrid => synth::ogrid_cylinder(args.m, args.rings, args.layers),
        Shape::Prism => synth::tri_prism(args.m, args.layers),
    };
    let mut mesh = built.map_err(|source| CliError::Mesh {
        path: args.output.clone(),
        source,
    })?;
    if args.jitter > 0.0 {
        mesh = synth::jittered(mesh, args.jitter, args.seed);
    }
    let text = match args.output.extension().and_then(|e| e.to_str()) {
        Some("vtk") => write_vtk(&mesh, &[]),
        Some("mesh") => write_mesh(&mesh),
        _ => {
            return Err(CliError::Usage(format!(
                "{}: output must end in .mesh or .vtk",
                args.output.display()
            )))
        }
    };
    write_file(&args.output, text)?;
    Ok(MeshSummary::of(&mesh))
}
