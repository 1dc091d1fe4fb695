//! Points CSV, model sidecar JSON and partition tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use diamond_core::ensemble::DiamondModel;
use diamond_core::partition::{region_area, Partition};
use diamond_core::{ModelSpec, PointSet, Provenance, RegionKind, UnitVec};
use serde::{Deserialize, Serialize};

pub const POINTS_HEADER: &str = "index,parallel,i,x,y,z,phi,z_height";

/// Model metadata written next to a points file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub spec: ModelSpec,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub r: Vec<u64>,
    /// Parallel heights `z_1..z_p` as exact rationals.
    pub z: Vec<String>,
    /// Collar heights `h_1..h_M` as exact rationals.
    pub h: Vec<String>,
    pub theta: Vec<f64>,
}

impl Sidecar {
    pub fn new(model: &DiamondModel, partition: &Partition) -> Self {
        Sidecar {
            spec: model.spec().clone(),
            m: model.m(),
            n: model.num_points(),
            r: model.r().to_vec(),
            z: model.heights().iter().map(ToString::to_string).collect(),
            h: partition
                .heights()
                .iter()
                .map(ToString::to_string)
                .collect(),
            theta: model.thetas().to_vec(),
        }
    }
}

/// `pts.csv` -> `pts.json`.
pub fn sidecar_path(points: &Path) -> PathBuf {
    points.with_extension("json")
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn points_csv(model: &DiamondModel, points: &PointSet) -> String {
    let p = model.num_parallels();
    let mut out = String::from(POINTS_HEADER);
    out.push('\n');
    for (k, (x, tag)) in points.iter().enumerate() {
        let (parallel, i, height) = match *tag {
            Provenance::NorthPole => (0, 0, 1.0),
            Provenance::SouthPole => (p + 1, 0, -1.0),
            Provenance::Parallel { j, i } => (j, i, model.z_f64(j)),
            Provenance::Free => (0, 0, x.z),
        };
        let phi = match tag {
            Provenance::NorthPole | Provenance::SouthPole => 0.0,
            _ => x.longitude(),
        };
        writeln!(
            out,
            "{k},{parallel},{i},{},{},{},{},{}",
            num(x.x),
            num(x.y),
            num(x.z),
            num(phi),
            num(height)
        )
        .unwrap();
    }
    out
}

/// Reads a points CSV. With `parallels = Some(p)` the rows are tagged by
/// provenance (parallel `0` and `p + 1` are the poles); otherwise they are
/// free points.
pub fn read_points_csv(path: &Path, parallels: Option<usize>) -> Result<PointSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == POINTS_HEADER => {}
        Some(h) => bail!(
            "{}: unexpected header {h:?}, want {POINTS_HEADER:?}",
            path.display()
        ),
        None => bail!("{}: empty points file", path.display()),
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 8 {
            bail!(
                "{}: row {} has {} fields, want 8",
                path.display(),
                n + 1,
                f.len()
            );
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .with_context(|| format!("row {}: bad number {s:?}", n + 1))
        };
        let parallel: usize = f[1]
            .parse()
            .with_context(|| format!("row {}: bad parallel", n + 1))?;
        let i: usize = f[2]
            .parse()
            .with_context(|| format!("row {}: bad index", n + 1))?;
        let (x, y, z) = (parse(f[3])?, parse(f[4])?, parse(f[5])?);
        if ((x * x + y * y + z * z) - 1.0).abs() > 1e-9 {
            bail!("row {}: point is not on the unit sphere", n + 1);
        }
        rows.push((parallel, i, UnitVec { x, y, z }));
    }
    if rows.is_empty() {
        bail!("{}: no points", path.display());
    }
    let tags = rows
        .iter()
        .map(|&(parallel, i, _)| match parallels {
            None => Ok(Provenance::Free),
            Some(_) if parallel == 0 => Ok(Provenance::NorthPole),
            Some(p) if parallel == p + 1 => Ok(Provenance::SouthPole),
            Some(p) if parallel <= p => Ok(Provenance::Parallel { j: parallel, i }),
            Some(p) => bail!("parallel {parallel} out of range for a model with {p} parallels"),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointSet::with_provenance(
        rows.into_iter().map(|r| r.2).collect(),
        tags,
    ))
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub const PARTITION_HEADER: &str =
    "id,kind,parallel,sector,phi_lo,phi_hi,h_lo,h_hi,area,area_fraction";

pub fn partition_csv(partition: &Partition) -> String {
    let mut out = String::from(PARTITION_HEADER);
    out.push('\n');
    for r in partition.regions() {
        let (kind, sector) = match r.kind {
            RegionKind::NorthCap => ("north_cap", 0),
            RegionKind::SouthCap => ("south_cap", 0),
            RegionKind::Rectangle { i, .. } => ("rectangle", i),
            RegionKind::Equatorial { i } => ("equatorial", i),
        };
        writeln!(
            out,
            "{},{kind},{},{sector},{},{},{},{},{},{}",
            r.id,
            r.parallel,
            num(r.phi_lo),
            num(r.phi_hi),
            num(r.h_lo),
            num(r.h_hi),
            num(region_area(r)),
            r.area_fraction_exact()
        )
        .unwrap();
    }
    out
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
