//! Command-line interface definition.

use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hexlens_core::quality::{Metric, VertexAggregation};
use hexlens_core::render::Background;

#[derive(Debug, Parser)]
#[command(name = "hexlens", version, about = "Focus+context inspection of hexahedral meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a mesh to PNG.
    Render(RenderArgs),
    /// Build the edge level-of-detail and export it.
    Lod(LodArgs),
    /// Print a JSON summary of a mesh: counts, singular edges, quality.
    Info(InfoArgs),
    /// Write a procedural mesh.
    Generate(GenerateArgs),
    /// Run the HTTP/WebSocket session service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Aggregation {
    #[default]
    Max,
    VolumeWeighted,
}

impl From<Aggregation> for VertexAggregation {
    fn from(a: Aggregation) -> Self {
        match a {
            Aggregation::Max => VertexAggregation::Max,
            Aggregation::VolumeWeighted => VertexAggregation::VolumeWeighted,
        }
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub mesh: PathBuf,
    #[arg(short, long, default_value = "out.png")]
    pub output: PathBuf,
    /// Image size as WIDTHxHEIGHT.
    #[arg(long, value_parser = parse_size)]
    pub size: Option<(u32, u32)>,
    /// `scaled-jacobian` or `field:<name>` for a scalar array in the file.
    #[arg(long, default_value = "scaled-jacobian")]
    pub metric: Metric,
    #[arg(long, value_enum, default_value_t)]
    pub aggregation: Aggregation,
    #[arg(long)]
    pub lod: Option<u32>,
    /// Edge-importance threshold δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Minimum edge width in model units.
    #[arg(long)]
    pub wbase: Option<f64>,
    /// Accentuation strength s.
    #[arg(long)]
    pub accent: Option<f64>,
    #[arg(long)]
    pub face_alpha: Option<f64>,
    /// Screen lens as `cx,cy,r` in pixels.
    #[arg(long, value_parser = parse_floats::<3>, conflicts_with = "lens_obj")]
    pub lens: Option<[f64; 3]>,
    /// Object lens as `x,y,z,r` in model units.
    #[arg(long, value_parser = parse_floats::<4>)]
    pub lens_obj: Option<[f64; 4]>,
    #[arg(long)]
    pub background: Option<Background>,
    /// Camera orbit as `azimuth,elevation` in degrees.
    #[arg(long, value_parser = parse_floats::<2>)]
    pub orbit: Option<[f64; 2]>,
    /// JSON file with render parameters; flags override its values.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Write a JSON report with counts and timings.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Also write the float RGBA image.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    #[arg(long)]
    pub no_silhouettes: bool,
    /// Render threads (default: `HEXLENS_THREADS` or all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LodArgs {
    pub mesh: PathBuf,
    /// OBJ line set with one group per level.
    #[arg(long)]
    pub export: Option<PathBuf>,
    /// JSON merge log.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub mesh: PathBuf,
    /// Write per-cell and per-vertex quality as a VTK file.
    #[arg(long)]
    pub vtk: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    /// Axis-aligned grid with unit cells.
    Grid,
    /// Unit-cube grid twisted about its vertical axis.
    Twisted,
    /// O-grid cylinder with valence-3 interior edges.
    Ogrid,
    /// Triangular prism split into three blocks.
    Prism,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub shape: Shape,
    /// `.mesh` or `.vtk`.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Grid cells per axis as `n1,n2,n3`.
    #[arg(long, value_parser = parse_dims, default_value = "4,4,4")]
    pub dims: [usize; 3],
    /// Twist angle in radians at the top of a twisted grid.
    #[arg(long, default_value_t = 0.8)]
    pub angle: f64,
    /// O-grid and prism block resolution.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// O-grid radial cell count.
    #[arg(long, default_value_t = 3)]
    pub rings: usize,
    #[arg(long, default_value_t = 4)]
    pub layers: usize,
    /// Interior vertex jitter as a fraction of the mean edge length.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Directory from which sessions may load meshes by path.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Upload cap in MiB.
    #[arg(long, default_value_t = 512)]
    pub max_upload_mib: usize,
}

pub fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(w)?, parse(h)?))
}

pub fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

pub fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let f = parse_floats::<3>(s)?;
    if f.iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
        return Err(format!("dimensions must be positive integers, got {s:?}"));
    }
    Ok(f.map(|x| x as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_and_lists() {
        assert_eq!(parse_size("640x360"), Ok((640, 360)));
        assert!(parse_size("640").is_err());
        assert_eq!(parse_floats::<3>("1, 2.5,3"), Ok([1.0, 2.5, 3.0]));
        assert!(parse_floats::<3>("1,2").is_err());
        assert_eq!(parse_dims("2,3,4"), Ok([2, 3, 4]));
        assert!(parse_dims("2,0,4").is_err());
    }

    #[test]
    fn render_flags_parse() {
        let cli = Cli::try_parse_from([
            "hexlens", "render", "m.mesh", "--size", "320x200", "--lens", "10,20,30",
            "--metric", "field:stress", "--background", "white",
        ])
        .unwrap();
        let Command::Render(r) = cli.command else { panic!() };
        assert_eq!(r.size, Some((320, 200)));
        assert_eq!(r.lens, Some([10.0, 20.0, 30.0]));
        assert_eq!(r.metric, Metric::Field("stress".into()));
        assert_eq!(r.background, Some(Background::White));
        assert!(Cli::try_parse_from([
            "hexlens", "render", "m.mesh", "--lens", "1,2,3", "--lens-obj", "1,2,3,4"
        ])
        .is_err());
    }
}
