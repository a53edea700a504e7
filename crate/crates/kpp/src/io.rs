//! Plain-text grid files, frame manifests, snapshots and front traces.
//!
//! Grid file: line 1 is `nx ny dx`, followed by `ny` lines of `nx`
//! whitespace-separated values. The first value line is the northernmost
//! row and maps to row 0 of the in-memory field.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kpp_core::capacity::SigmoidSchedule;
use kpp_core::domain::{CapacityFrame, Field2D, GridSpec, MapMask};
use kpp_core::reference::FrontTrace;

use crate::error::{Error, Result};

/// Grid geometry plus row-major values as read from a grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, w: BufWriter<File>) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .sync_all()
        .map_err(|e| Error::io(path, e))
}

/// Parses grid-file text; `origin` only labels error messages.
pub fn parse_grid(text: &str, origin: &Path) -> Result<GridFile> {
    parse_grid_checked(text, origin, |_| None)
}

/// Like [`parse_grid`], rejecting any value for which `check` returns a message.
fn parse_grid_checked(
    text: &str,
    origin: &Path,
    check: impl Fn(f64) -> Option<String>,
) -> Result<GridFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 1, "empty file, expected header `nx ny dx`"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::parse(origin, line_no, format!("header must be `nx ny dx`, got {header:?}")));
    }
    let count = |s: &str, name: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(origin, line_no, format!("{name} is not a count: {s:?}")))
    };
    let nx = count(fields[0], "nx")?;
    let ny = count(fields[1], "ny")?;
    let dx: f64 = fields[2]
        .parse()
        .map_err(|_| Error::parse(origin, line_no, format!("dx is not a number: {:?}", fields[2])))?;
    let grid = GridSpec::new(nx, ny, dx).map_err(|e| Error::parse(origin, line_no, e.to_string()))?;

    let mut values = Vec::with_capacity(grid.cells());
    let mut rows = 0;
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if rows == ny {
            return Err(Error::parse(origin, line_no, format!("more than {ny} value rows")));
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(origin, line_no, format!("not a number: {tok:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(origin, line_no, format!("non-finite value {tok}")));
            }
            if let Some(msg) = check(v) {
                return Err(Error::parse(origin, line_no, msg));
            }
            values.push(v);
        }
        let found = values.len() - before;
        if found != nx {
            return Err(Error::parse(origin, line_no, format!("expected {nx} values, found {found}")));
        }
        rows += 1;
    }
    if rows != ny {
        return Err(Error::parse(
            origin,
            text.lines().count().max(1),
            format!("expected {ny} value rows, found {rows}"),
        ));
    }
    Ok(GridFile { grid, values })
}

pub fn load_grid_file(path: impl AsRef<Path>) -> Result<GridFile> {
    let path = path.as_ref();
    parse_grid(&read_text(path)?, path)
}

/// Writes a grid file with shortest round-trip number formatting.
pub fn write_grid_file(path: impl AsRef<Path>, grid: &GridSpec, values: &[f64]) -> Result<()> {
    let path = path.as_ref();
    if values.len() != grid.cells() {
        return Err(Error::Core(kpp_core::Error::GridMismatch(format!(
            "{} values for a {}x{} grid",
            values.len(),
            grid.nx,
            grid.ny
        ))));
    }
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{} {} {}", grid.nx, grid.ny, grid.dx).map_err(io)?;
    for row in values.chunks(grid.nx) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    finish(path, w)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<MapMask> {
    let path = path.as_ref();
    let file = parse_grid_checked(&read_text(path)?, path, |v| {
        (v != 0.0 && v != 1.0).then(|| format!("mask values must be 0 or 1, found {v}"))
    })?;
    Ok(MapMask::new(file.grid, file.values.iter().map(|&v| v == 1.0).collect())?)
}

pub fn load_capacity(path: impl AsRef<Path>, time: f64) -> Result<CapacityFrame> {
    let file = load_grid_file(path)?;
    Ok(CapacityFrame::new(file.grid, time, file.values)?)
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Field2D> {
    let file = load_grid_file(path)?;
    Ok(Field2D::from_values(file.grid, file.values)?)
}

/// One manifest line: `<time> <path>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub time: f64,
    pub path: PathBuf,
}

/// Reads a frame manifest; relative paths resolve against the manifest's
/// directory. Blank lines and `#` comments are skipped.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out: Vec<ManifestEntry> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (t, p) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::parse(path, line_no, "expected `<time> <path>`"))?;
        let time: f64 = t
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("time is not a number: {t:?}")))?;
        if !time.is_finite() {
            return Err(Error::parse(path, line_no, "time must be finite"));
        }
        if let Some(last) = out.last() {
            if !(time > last.time) {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("times must increase strictly ({} then {time})", last.time),
                ));
            }
        }
        let p = Path::new(p.trim());
        let resolved = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        out.push(ManifestEntry { time, path: resolved });
    }
    if out.is_empty() {
        return Err(Error::parse(path, 1, "manifest lists no frames"));
    }
    Ok(out)
}

/// Loads every frame of a manifest and checks that all share one land pattern.
pub fn load_schedule(manifest: impl AsRef<Path>, nu: f64) -> Result<SigmoidSchedule> {
    let entries = read_manifest(manifest)?;
    let mut frames = Vec::with_capacity(entries.len());
    for e in &entries {
        frames.push(load_capacity(&e.path, e.time)?);
    }
    let mask = MapMask::from_capacity(&frames[0]);
    for f in &frames[1..] {
        mask.check_capacity(f)?;
    }
    Ok(SigmoidSchedule::new(frames, nu)?)
}

/// A field at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: Field2D,
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `# t=.. nx=.. ny=.. dx=..` then one comma-separated line per row,
/// 17 significant digits.
pub fn write_snapshot_csv(snapshot: &Snapshot, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let g = snapshot.field.grid();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "# t={} nx={} ny={} dx={}", sci(snapshot.time), g.nx, g.ny, g.dx).map_err(io)?;
    for row in snapshot.field.values().chunks(g.nx) {
        let line: Vec<String> = row.iter().map(|&v| sci(v)).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    finish(path, w)
}

pub fn read_snapshot_csv(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| Error::parse(path, 1, "missing `# t=.. nx=.. ny=.. dx=..` header"))?;
    let (mut t, mut nx, mut ny, mut dx) = (None, None, None, None);
    for kv in header.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse(path, 1, format!("bad header entry {kv:?}")))?;
        let bad = || Error::parse(path, 1, format!("bad value for {k}: {v:?}"));
        match k {
            "t" => t = Some(v.parse::<f64>().map_err(|_| bad())?),
            "nx" => nx = Some(v.parse::<usize>().map_err(|_| bad())?),
            "ny" => ny = Some(v.parse::<usize>().map_err(|_| bad())?),
            "dx" => dx = Some(v.parse::<f64>().map_err(|_| bad())?),
            _ => return Err(Error::parse(path, 1, format!("unknown header key {k:?}"))),
        }
    }
    let missing = |k| Error::parse(path, 1, format!("header lacks {k}"));
    let grid = GridSpec::new(nx.ok_or_else(|| missing("nx"))?, ny.ok_or_else(|| missing("ny"))?, dx.ok_or_else(|| missing("dx"))?)
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    let mut values = Vec::with_capacity(grid.cells());
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("not a number: {tok:?}")))?;
            values.push(v);
        }
        if values.len() - before != grid.nx {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {} values, found {}", grid.nx, values.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != grid.ny {
        return Err(Error::parse(path, text.lines().count(), format!("expected {} rows, found {rows}", grid.ny)));
    }
    Ok(Snapshot { time: t.ok_or_else(|| missing("t"))?, field: Field2D::from_values(grid, values)? })
}

/// Gray level `round(255 ln(1 + 10 u/scale) / ln 11)`, clamped to `0..=255`.
pub fn pgm_level(u: f64, scale: f64) -> u8 {
    let x = (u / scale).max(0.0);
    let level = (255.0 * (10.0 * x).ln_1p() / 11f64.ln()).round();
    level.clamp(0.0, 255.0) as u8
}

/// Binary 8-bit PGM of `log(1 + 10 u / scale)`, north at the top.
pub fn write_snapshot_pgm(snapshot: &Snapshot, path: impl AsRef<Path>, scale: f64) -> Result<()> {
    let path = path.as_ref();
    if !(scale > 0.0) {
        return Err(Error::Config(format!("PGM scale must be positive, got {scale}")));
    }
    let g = snapshot.field.grid();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    write!(w, "P5\n{} {}\n255\n", g.nx, g.ny).map_err(io)?;
    let bytes: Vec<u8> = snapshot.field.values().iter().map(|&u| pgm_level(u, scale)).collect();
    w.write_all(&bytes).map_err(io)?;
    finish(path, w)
}

/// CSV `t,x_half,velocity`; velocity is empty where no centered difference exists.
pub fn write_front_trace(trace: &FrontTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "t,x_half,velocity").map_err(io)?;
    for (&(t, x), v) in trace.samples().iter().zip(trace.velocities()) {
        let v = v.map(sci).unwrap_or_default();
        writeln!(w, "{},{},{}", sci(t), sci(x), v).map_err(io)?;
    }
    finish(path, w)
}

/// Writes `key = value` lines in the given order.
pub fn write_key_values(path: impl AsRef<Path>, entries: &[(String, String)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for (k, v) in entries {
        writeln!(w, "{k} = {v}").map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}
