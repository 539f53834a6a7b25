//! Subcommand drivers: turn a [`RunConfig`] into artifacts on disk.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::artifacts::{
    density_to_string, images_to_string, momentum_stats_to_string, momentum_to_string,
    position_to_string, render_heatmap, series_to_string, ArtifactWriter, Manifest,
};
use crate::config::{Artifact, GridChoice, RunConfig};
use crate::error::Result;
use crate::gaussian::PacketParams1D;
use crate::images::{build_wedge_images, verify_closure, WedgeSystem};
use crate::momentum::{
    default_x_max, mirror_position_density, momentum_stats_series, TransformSettings,
};
use crate::observables::{auto_grid, expectation_series, tail_check, TAIL_WARNING};
use crate::wavefunction::{density_grid, image_sum, schrodinger_residual, GridSpec};

/// Samples per position-density file.
const POSITION_SAMPLES: usize = 4001;

fn grid_for(cfg: &RunConfig, system: &WedgeSystem, t: f64) -> Result<GridSpec> {
    match cfg.grid {
        GridChoice::Explicit(spec) => Ok(spec),
        GridChoice::Auto { k_sigma } => auto_grid(system, t, k_sigma),
    }
}

fn indexed(prefix: &str, k: usize, ext: &str) -> String {
    format!("{prefix}_t{k:03}.{ext}")
}

/// Density CSV and heatmap per configured time.
pub fn write_densities(cfg: &RunConfig, writer: &mut ArtifactWriter) -> Result<()> {
    let system = cfg.system()?;
    let rendered = cfg
        .times
        .iter()
        .map(|&t| {
            let spec = grid_for(cfg, &system, t)?;
            let grid = density_grid(&system, &spec, t);
            let tail = tail_check(&system, t, &spec);
            Ok((
                density_to_string(&grid),
                render_heatmap(&grid, cfg.gamma)?,
                tail,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, (csv, pgm, tail)) in rendered.into_iter().enumerate() {
        writer.write(&indexed("density", k, "csv"), csv.as_bytes())?;
        writer.write(&indexed("density", k, "pgm"), &pgm)?;
        if tail > TAIL_WARNING {
            writer.note(format!(
                "t={}: estimated tail mass {tail:e} outside the grid",
                cfg.times[k]
            ));
        }
    }
    Ok(())
}

pub fn write_series(cfg: &RunConfig, writer: &mut ArtifactWriter) -> Result<()> {
    let system = cfg.system()?;
    let series = match cfg.grid {
        GridChoice::Auto { k_sigma } => expectation_series(&system, &cfg.times, k_sigma)?,
        GridChoice::Explicit(spec) => {
            crate::observables::expectation_series_on(&system, &cfg.times, &spec)?
        }
    };
    writer.write("series.csv", series_to_string(&series).as_bytes())?;
    for t in series.warnings() {
        writer.note(format!("t={t}: estimated tail mass above {TAIL_WARNING:e}"));
    }
    Ok(())
}

/// The half-line packet built from the x components of the configured packet.
pub fn mirror_params(cfg: &RunConfig) -> Result<PacketParams1D> {
    PacketParams1D::new(cfg.center.0, cfg.momentum.0, cfg.beta, cfg.m, cfg.hbar)
}

pub fn write_momentum(cfg: &RunConfig, writer: &mut ArtifactWriter) -> Result<()> {
    let params = mirror_params(cfg)?;
    let settings = TransformSettings {
        x_max: cfg.momentum1d.x_max,
        n_samples: cfg.momentum1d.n_samples,
    };
    let series = momentum_stats_series(&params, &cfg.times, &settings)?;
    let positions = cfg
        .times
        .par_iter()
        .map(|&t| {
            let x_max = settings.x_max.unwrap_or_else(|| default_x_max(&params, t));
            mirror_position_density(&params, t, x_max, POSITION_SAMPLES)
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, (rho, pos)) in series.iter().zip(&positions).enumerate() {
        writer.write(
            &indexed("momentum", k, "csv"),
            momentum_to_string(rho).as_bytes(),
        )?;
        writer.write(
            &indexed("position", k, "csv"),
            position_to_string(pos).as_bytes(),
        )?;
    }
    writer.write(
        "momentum_stats.csv",
        momentum_stats_to_string(&series).as_bytes(),
    )?;
    Ok(())
}

pub fn write_images(cfg: &RunConfig, writer: &mut ArtifactWriter) -> Result<()> {
    let terms = build_wedge_images(cfg.wedge_n)?;
    writer.write(
        "images.txt",
        images_to_string(&terms, cfg.center).as_bytes(),
    )?;
    Ok(())
}

/// Writes every artifact in `artifacts` and then the manifest.
pub fn run_artifacts(cfg: &RunConfig, artifacts: &[Artifact], out_dir: &Path) -> Result<Manifest> {
    let mut writer = ArtifactWriter::create(out_dir)?;
    for artifact in artifacts {
        match artifact {
            Artifact::Density => write_densities(cfg, &mut writer)?,
            Artifact::Series => write_series(cfg, &mut writer)?,
            Artifact::Momentum1d => write_momentum(cfg, &mut writer)?,
            Artifact::Images => write_images(cfg, &mut writer)?,
        }
    }
    writer.finish()
}

pub const VALIDATE_WALL_SAMPLES: usize = 1000;
pub const VALIDATE_BOUNDARY_TOLERANCE: f64 = 1e-12;
pub const VALIDATE_RESIDUAL_TOLERANCE: f64 = 1e-5;
pub const VALIDATE_RESIDUAL_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub closure_passed: bool,
    pub closure_deviation: f64,
    /// Worst wall value relative to the packet peak.
    pub boundary_worst: f64,
    /// Worst residual relative to the packet peak.
    pub residual_worst: f64,
    pub residual_points: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.closure_passed
            && self.boundary_worst < VALIDATE_BOUNDARY_TOLERANCE
            && self.residual_worst < VALIDATE_RESIDUAL_TOLERANCE
    }

    pub fn to_text(&self) -> String {
        let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} closure: max deviation {:e}",
            mark(self.closure_passed),
            self.closure_deviation
        );
        let _ = writeln!(
            out,
            "{} boundary: max |psi| on walls / peak = {:e} (limit {:e})",
            mark(self.boundary_worst < VALIDATE_BOUNDARY_TOLERANCE),
            self.boundary_worst,
            VALIDATE_BOUNDARY_TOLERANCE
        );
        let _ = writeln!(
            out,
            "{} residual: max over {} points / peak = {:e} (limit {:e})",
            mark(self.residual_worst < VALIDATE_RESIDUAL_TOLERANCE),
            self.residual_points,
            self.residual_worst,
            VALIDATE_RESIDUAL_TOLERANCE
        );
        out
    }
}

/// Closure, wall and residual checks for the configured system.
pub fn validate_system(system: &WedgeSystem, times: &[f64]) -> Result<ValidationReport> {
    let closure = verify_closure(&system.terms);
    let theta = system.angle();
    let (dir_x, dir_y) = (theta.cos(), theta.sin());
    let mut boundary_worst: f64 = 0.0;
    let mut residual_worst: f64 = 0.0;
    let mut residual_points = 0;
    for &t in times {
        let peak = system.packet.peak_modulus(t);
        let reach = 8.0 * system.packet.max_width_at(t)
            + system.packet.center().0.hypot(system.packet.center().1);
        for k in 0..VALIDATE_WALL_SAMPLES {
            let r = reach * k as f64 / (VALIDATE_WALL_SAMPLES - 1) as f64;
            let a = image_sum(system, r, 0.0, t).norm();
            let b = image_sum(system, r * dir_x, r * dir_y, t).norm();
            boundary_worst = boundary_worst.max(a.max(b) / peak);
        }
        // residual on a polar lattice around the packet
        let (cx, cy) = system.packet.center();
        let r0 = cx.hypot(cy);
        for i in 0..5 {
            for j in 1..=5 {
                let r = r0 * (0.5 + 0.25 * i as f64);
                let phi = theta * j as f64 / 6.0;
                match schrodinger_residual(
                    system,
                    r * phi.cos(),
                    r * phi.sin(),
                    t,
                    VALIDATE_RESIDUAL_STEP,
                ) {
                    Ok(res) => {
                        residual_worst = residual_worst.max(res / peak);
                        residual_points += 1;
                    }
                    Err(crate::Error::OutsideWedge { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(ValidationReport {
        closure_passed: closure.passed,
        closure_deviation: closure.max_deviation,
        boundary_worst,
        residual_worst,
        residual_points,
    })
}
