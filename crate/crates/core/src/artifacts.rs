//! Plain-text artifact formats and the checksum manifest.
//!
//! Every float is written with 17 significant digits so reading a file back
//! reproduces the computed doubles bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::images::ImageTerm;
use crate::momentum::{MomentumDensity1D, PositionDensity1D};
use crate::observables::{ExpectationRecord, ExpectationSeries};
use crate::wavefunction::{DensityGrid, GridSpec};

pub const SERIES_HEADER: &str = "t,norm,x,y,px,py,T";
pub const MOMENTUM_HEADER: &str = "p,density";
pub const POSITION_HEADER: &str = "x,density";
pub const MOMENTUM_STATS_HEADER: &str = "t,mean_p,spread_p,mean_p2,raw_norm";
pub const MANIFEST_NAME: &str = "manifest.txt";

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn density_to_string(grid: &DensityGrid) -> String {
    let spec = &grid.spec;
    let mut out = String::with_capacity(spec.len() * 24 + 128);
    let _ = writeln!(out, "# t={}", fmt_f64(grid.t));
    let _ = writeln!(
        out,
        "# x: {} {} {}",
        fmt_f64(spec.x_min),
        fmt_f64(spec.x_max),
        spec.nx
    );
    let _ = writeln!(
        out,
        "# y: {} {} {}",
        fmt_f64(spec.y_min),
        fmt_f64(spec.y_max),
        spec.ny
    );
    for j in 0..spec.ny {
        for (i, v) in grid.row(j).iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

fn parse_f64(token: &str, what: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| format_err(format!("{what}: `{token}` is not a number")))
}

fn parse_axis_header(line: Option<&str>, label: &str) -> Result<(f64, f64, usize)> {
    let line = line.ok_or_else(|| format_err(format!("missing `# {label}:` header")))?;
    let rest = line
        .strip_prefix(&format!("# {label}:"))
        .ok_or_else(|| format_err(format!("expected `# {label}:` header, got `{line}`")))?;
    let parts: Vec<&str> = rest.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(format_err(format!("`# {label}:` needs min max count")));
    }
    let n = parts[2]
        .parse::<usize>()
        .map_err(|_| format_err(format!("bad sample count `{}`", parts[2])))?;
    Ok((parse_f64(parts[0], label)?, parse_f64(parts[1], label)?, n))
}

pub fn parse_density(text: &str) -> Result<DensityGrid> {
    let mut lines = text.lines();
    let t_line = lines
        .next()
        .ok_or_else(|| format_err("empty density file"))?;
    let t = parse_f64(
        t_line
            .strip_prefix("# t=")
            .ok_or_else(|| format_err("expected `# t=` header"))?,
        "t",
    )?;
    let (x_min, x_max, nx) = parse_axis_header(lines.next(), "x")?;
    let (y_min, y_max, ny) = parse_axis_header(lines.next(), "y")?;
    let spec = GridSpec::new(x_min, x_max, y_min, y_max, nx, ny)
        .map_err(|e| format_err(format!("invalid grid header: {e}")))?;
    let expected = nx
        .checked_mul(ny)
        .ok_or_else(|| format_err("grid too large"))?;
    // each value needs at least two bytes
    if expected > text.len() {
        return Err(format_err(format!(
            "header promises {expected} values, file too short"
        )));
    }
    let mut values = Vec::with_capacity(expected);
    let mut rows = 0;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        if rows > ny {
            return Err(format_err(format!("more than {ny} data rows")));
        }
        let before = values.len();
        for token in line.split_whitespace() {
            let v = parse_f64(token, "density")?;
            if !(v >= 0.0) || !v.is_finite() {
                return Err(format_err(format!("density must be non-negative, got {v}")));
            }
            values.push(v);
        }
        if values.len() - before != nx {
            return Err(format_err(format!(
                "row {rows} has {} values, expected {nx}",
                values.len() - before
            )));
        }
    }
    if rows != ny {
        return Err(format_err(format!("found {rows} data rows, expected {ny}")));
    }
    Ok(DensityGrid { spec, t, values })
}

pub fn series_to_string(series: &ExpectationSeries) -> String {
    let mut out = String::new();
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in &series.records {
        let row = [
            r.t, r.norm, r.mean_x, r.mean_y, r.mean_px, r.mean_py, r.kinetic,
        ];
        out.push_str(
            &row.iter()
                .map(|v| fmt_f64(*v))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    out
}

/// Rows of a comma-separated table with a fixed header.
pub fn parse_table(text: &str, header: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| format_err("empty table"))?;
    if first.trim() != header {
        return Err(format_err(format!(
            "expected header `{header}`, got `{first}`"
        )));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| parse_f64(tok, "table"))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != width {
            return Err(format_err(format!(
                "row {} has {} columns, expected {width}",
                k + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Reads back the columns written by [`series_to_string`]; tail estimates are not stored.
pub fn parse_series(text: &str) -> Result<ExpectationSeries> {
    let records = parse_table(text, SERIES_HEADER)?
        .into_iter()
        .map(|r| ExpectationRecord {
            t: r[0],
            norm: r[1],
            mean_x: r[2],
            mean_y: r[3],
            mean_px: r[4],
            mean_py: r[5],
            kinetic: r[6],
            tail_estimate: 0.0,
        })
        .collect();
    Ok(ExpectationSeries { records })
}

pub fn momentum_to_string(density: &MomentumDensity1D) -> String {
    let mut out = String::with_capacity(density.p_samples.len() * 48);
    out.push_str(MOMENTUM_HEADER);
    out.push('\n');
    for (p, d) in density.p_samples.iter().zip(&density.density) {
        let _ = writeln!(out, "{},{}", fmt_f64(*p), fmt_f64(*d));
    }
    out
}

pub fn position_to_string(density: &PositionDensity1D) -> String {
    let mut out = String::with_capacity(density.x_samples.len() * 48);
    out.push_str(POSITION_HEADER);
    out.push('\n');
    for (x, d) in density.x_samples.iter().zip(&density.density) {
        let _ = writeln!(out, "{},{}", fmt_f64(*x), fmt_f64(*d));
    }
    out
}

pub fn momentum_stats_to_string(series: &[MomentumDensity1D]) -> String {
    let mut out = String::new();
    out.push_str(MOMENTUM_STATS_HEADER);
    out.push('\n');
    for d in series {
        let row = [d.t, d.mean_p, d.spread_p, d.mean_p2, d.raw_norm];
        out.push_str(
            &row.iter()
                .map(|v| fmt_f64(*v))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    out
}

/// Binary 16-bit graymap, top row at `y_max`.
///
/// Pixel value is `round_half_even((density / max)^gamma * 65535)`.
pub fn render_heatmap(grid: &DensityGrid, gamma: f64) -> Result<Vec<u8>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    let (nx, ny) = (grid.spec.nx, grid.spec.ny);
    let header = format!("P5\n{nx} {ny}\n65535\n");
    let mut out = Vec::with_capacity(header.len() + 2 * nx * ny);
    out.extend_from_slice(header.as_bytes());
    let max = grid.max();
    for j in (0..ny).rev() {
        for &v in grid.row(j) {
            let level = if max > 0.0 {
                ((v / max).powf(gamma) * 65535.0)
                    .round_ties_even()
                    .clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    Ok(out)
}

/// One line per image term: sign, matrix entries, and where the term's image
/// charge sits for a seed at `probe` (that is, `Q^T probe`).
pub fn images_to_string(terms: &[ImageTerm], probe: (f64, f64)) -> String {
    let mut out = String::new();
    for term in terms {
        let q = term.isometry;
        let (u, v) = q.transpose().apply(probe.0, probe.1);
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            term.sign.symbol(),
            fmt_f64(q.a),
            fmt_f64(q.b),
            fmt_f64(q.c),
            fmt_f64(q.d),
            fmt_f64(u),
            fmt_f64(v)
        );
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes via a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid("path", "artifact path needs a file name"))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn add(&mut self, file: impl Into<String>, bytes: &[u8]) {
        self.entries.push(ManifestEntry {
            file: file.into(),
            sha256: sha256_hex(bytes),
        });
    }

    /// `# note: ...` lines, then `<sha256>  <file>` sorted by file name.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# wedgewave manifest\n");
        for note in &self.notes {
            let _ = writeln!(out, "# note: {note}");
        }
        let mut entries = self.entries.clone();
        entries.sort_by(|a, b| a.file.cmp(&b.file));
        for e in &entries {
            let _ = writeln!(out, "{}  {}", e.sha256, e.file);
        }
        out
    }

    /// Files whose on-disk checksum differs from the manifest.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for e in &self.entries {
            let path = dir.join(&e.file);
            let bytes = fs::read(&path).map_err(|err| Error::io(&path, err))?;
            if sha256_hex(&bytes) != e.sha256 {
                bad.push(e.file.clone());
            }
        }
        Ok(bad)
    }
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let mut manifest = Manifest::default();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(note) = comment.trim_start().strip_prefix("note:") {
                manifest.notes.push(note.trim().to_string());
            }
            continue;
        }
        let (digest, file) = line
            .split_once("  ")
            .ok_or_else(|| format_err(format!("bad manifest line `{line}`")))?;
        if digest.len() != 64 || !digest.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format_err(format!("bad checksum `{digest}`")));
        }
        if file.is_empty() || file.contains('/') || file.contains('\\') || file == ".." {
            return Err(format_err(format!("bad file name `{file}`")));
        }
        manifest.entries.push(ManifestEntry {
            file: file.to_string(),
            sha256: digest.to_ascii_lowercase(),
        });
    }
    Ok(manifest)
}

/// Collects artifacts under one directory and writes the manifest last.
pub struct ArtifactWriter {
    dir: PathBuf,
    manifest: Manifest,
}

impl ArtifactWriter {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(ArtifactWriter {
            dir,
            manifest: Manifest::default(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.manifest.add(name, bytes);
        Ok(path)
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.manifest.notes.push(note.into());
    }

    pub fn finish(self) -> Result<Manifest> {
        let path = self.dir.join(MANIFEST_NAME);
        write_atomic(&path, self.manifest.to_text().as_bytes())?;
        Ok(self.manifest)
    }
}
