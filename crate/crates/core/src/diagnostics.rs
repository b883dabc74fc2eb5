//! Measurements and writers: vorticity, kinetic energy, solid traces,
//! shedding frequency, terminal-velocity statistics, images and CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Result, SimError};
use crate::grid::{EdgeMode, GridLayout, MacGrid, Staggering};
use crate::math::Vec2;

/// Cell-centered velocity (average of the two faces on each axis).
pub fn cell_velocity(grid: &MacGrid, i: usize, j: usize) -> Vec2 {
    let l = &grid.layout;
    let u = 0.5 * (grid.velocity.u[l.u_index(i, j)] + grid.velocity.u[l.u_index(i + 1, j)]);
    let v = 0.5 * (grid.velocity.v[l.v_index(i, j)] + grid.velocity.v[l.v_index(i, j + 1)]);
    Vec2::new(u, v)
}

/// `dv/dx - du/dy` at cell centers by central differences of cell
/// velocities (one-sided at non-periodic edges).
pub fn vorticity(grid: &MacGrid) -> Vec<f64> {
    let l = grid.layout;
    let centers: Vec<Vec2> = (0..l.cell_count())
        .map(|c| cell_velocity(grid, c % l.nx, c / l.nx))
        .collect();
    let at = |i: isize, j: isize| -> (Vec2, isize, isize) {
        let idx = l
            .resolve(Staggering::Cells, i, j, EdgeMode::Clamp)
            .expect("clamped");
        let (ci, cj) = ((idx % l.nx) as isize, (idx / l.nx) as isize);
        (centers[idx], ci, cj)
    };
    let mut out = vec![0.0; l.cell_count()];
    for j in 0..l.ny as isize {
        for i in 0..l.nx as isize {
            let (r, ri, _) = at(i + 1, j);
            let (lft, li, _) = at(i - 1, j);
            let (t, _, tj) = at(i, j + 1);
            let (b, _, bj) = at(i, j - 1);
            let span_x = if l.boundaries.periodic_x() { 2 } else { ri - li };
            let span_y = if l.boundaries.periodic_y() { 2 } else { tj - bj };
            let dvdx = (r.y - lft.y) / (span_x as f64 * l.dx);
            let dudy = (t.x - b.x) / (span_y as f64 * l.dx);
            out[l.cell_index(i as usize, j as usize)] = dvdx - dudy;
        }
    }
    out
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `1/2 sum rho u^2 dx^2` over faces; faces on non-periodic domain edges
/// count half, duplicated periodic faces once.
pub fn kinetic_energy(grid: &MacGrid) -> f64 {
    let l = &grid.layout;
    let area = l.dx * l.dx;
    let mut e = 0.0;
    let px = l.boundaries.periodic_x();
    let py = l.boundaries.periodic_y();
    for j in 0..l.ny {
        for i in 0..=l.nx {
            let w = if px {
                if i == l.nx {
                    continue;
                }
                1.0
            } else if i == 0 || i == l.nx {
                0.5
            } else {
                1.0
            };
            let k = l.u_index(i, j);
            e += w * grid.density.u[k] * grid.velocity.u[k].powi(2);
        }
    }
    for j in 0..=l.ny {
        for i in 0..l.nx {
            let w = if py {
                if j == l.ny {
                    continue;
                }
                1.0
            } else if j == 0 || j == l.ny {
                0.5
            } else {
                1.0
            };
            let k = l.v_index(i, j);
            e += w * grid.density.v[k] * grid.velocity.v[k].powi(2);
        }
    }
    0.5 * e * area
}

/// One row of the per-frame trace.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub com: Vec2,
    pub vel: Vec2,
    pub ke: f64,
    pub max_div: f64,
    pub max_vort: f64,
}

pub const TRACE_HEADER: &str = "t,com_x,com_y,vel_x,vel_y,ke,max_div,max_vort";

/// Accumulates trace rows, differencing centre-of-mass positions between
/// consecutive frames for the velocity columns.
#[derive(Clone, Debug, Default)]
pub struct SolidTrace {
    pub rows: Vec<TraceRow>,
}

impl SolidTrace {
    pub fn push(&mut self, t: f64, com: Option<Vec2>, ke: f64, max_div: f64, max_vort: f64) {
        let com = com.unwrap_or_else(Vec2::zeros);
        let vel = match self.rows.last() {
            Some(prev) if t > prev.t => (com - prev.com) / (t - prev.t),
            _ => Vec2::zeros(),
        };
        self.rows.push(TraceRow {
            t,
            com,
            vel,
            ke,
            max_div,
            max_vort,
        });
    }

    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.t, r.com.x, r.com.y, r.vel.x, r.vel.y, r.ke, r.max_div, r.max_vort
            )?;
        }
        Ok(())
    }
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let f = File::open(path).map_err(|e| SimError::io(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| SimError::io(path, e))?;
        if n == 0 || line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| SimError::DumpFormat(format!("{}:{}: {e}", path.display(), n + 1)))?;
        if vals.len() != 8 {
            return Err(SimError::DumpFormat(format!(
                "{}:{}: expected 8 columns, got {}",
                path.display(),
                n + 1,
                vals.len()
            )));
        }
        rows.push(TraceRow {
            t: vals[0],
            com: Vec2::new(vals[1], vals[2]),
            vel: Vec2::new(vals[3], vals[4]),
            ke: vals[5],
            max_div: vals[6],
            max_vort: vals[7],
        });
    }
    Ok(rows)
}

/// Largest absolute difference over all columns of two traces, or `None`
/// when the row counts differ.
pub fn trace_difference(a: &[TraceRow], b: &[TraceRow]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let flat = |r: &TraceRow| [r.t, r.com.x, r.com.y, r.vel.x, r.vel.y, r.ke, r.max_div, r.max_vort];
    let mut m = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        for (p, q) in flat(x).iter().zip(flat(y).iter()) {
            let d = (p - q).abs();
            if d.is_nan() {
                return Some(f64::INFINITY);
            }
            m = m.max(d);
        }
    }
    Some(m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SheddingEstimate {
    pub frequency: f64,
    /// Frequency resolution of the spectrum.
    pub bin_width: f64,
    pub rms: f64,
    /// Peak power over mean non-DC power.
    pub peak_ratio: f64,
}

impl SheddingEstimate {
    pub fn strouhal(&self, diameter: f64, speed: f64) -> f64 {
        self.frequency * diameter / speed
    }
}

/// Resamples `(t, value)` onto a uniform grid of `n` points by linear
/// interpolation.
pub fn resample_uniform(times: &[f64], values: &[f64], n: usize) -> (f64, Vec<f64>) {
    let t0 = times[0];
    let t1 = *times.last().unwrap();
    let h = (t1 - t0) / (n - 1) as f64;
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    for s in 0..n {
        let t = t0 + s as f64 * h;
        while k + 2 < times.len() && times[k + 1] < t {
            k += 1;
        }
        let (ta, tb) = (times[k], times[k + 1]);
        let w = if tb > ta { ((t - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 0.0 };
        out.push(values[k] * (1.0 - w) + values[k + 1] * w);
    }
    (h, out)
}

/// Dominant frequency of a probe signal via the DFT peak.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> Option<SheddingEstimate> {
    if times.len() < 8 || times.len() != values.len() {
        return None;
    }
    let n = times.len();
    let (h, mut series) = resample_uniform(times, values, n);
    let mean = series.iter().sum::<f64>() / n as f64;
    series.iter_mut().for_each(|v| *v -= mean);
    let rms = (series.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let power: Vec<f64> = buf[1..=half].iter().map(|c| c.norm_sqr()).collect();
    let (best, peak) = power
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bp), (k, &p)| if p > bp { (k, p) } else { (bi, bp) });
    let mean_power = power.iter().sum::<f64>() / power.len() as f64;
    let duration = h * n as f64;
    Some(SheddingEstimate {
        frequency: (best + 1) as f64 / duration,
        bin_width: 1.0 / duration,
        rms,
        peak_ratio: if mean_power > 0.0 { peak / mean_power } else { 0.0 },
    })
}

/// Shedding analysis of a cross-stream probe. Fails with `NoShedding` when
/// the signal RMS is below 5% of `reference_speed` or no peak stands out,
/// and with `InsufficientRecord` when fewer than `min_periods` periods fit.
pub fn shedding_frequency(
    times: &[f64],
    values: &[f64],
    reference_speed: f64,
    min_periods: usize,
) -> Result<SheddingEstimate> {
    let est = dominant_frequency(times, values).ok_or(SimError::InsufficientRecord {
        periods: 0.0,
        required: min_periods,
    })?;
    if est.rms < 0.05 * reference_speed || est.peak_ratio < 5.0 {
        return Err(SimError::NoShedding);
    }
    let duration = times[times.len() - 1] - times[0];
    let periods = est.frequency * duration;
    if periods < min_periods as f64 {
        return Err(SimError::InsufficientRecord {
            periods,
            required: min_periods,
        });
    }
    Ok(est)
}

/// Mean and standard deviation of the last quarter of a series.
pub fn tail_statistics(values: &[f64]) -> (f64, f64) {
    let start = values.len() - values.len() / 4;
    let tail = &values[start.min(values.len().saturating_sub(1))..];
    let n = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / n;
    let var = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Plateau check: last-quarter std below `tolerance * |mean|`.
pub fn has_plateau(values: &[f64], tolerance: f64) -> bool {
    if values.len() < 4 || values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let (mean, std) = tail_statistics(values);
    mean != 0.0 && std < tolerance * mean.abs()
}

/// Half the peak-to-peak range of the last quarter relative to its |mean|.
pub fn tail_oscillation(values: &[f64]) -> f64 {
    let start = values.len() - values.len() / 4;
    let tail = &values[start.min(values.len().saturating_sub(1))..];
    let (mean, _) = tail_statistics(values);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    0.5 * (hi - lo) / mean.abs()
}

/// Writes an 8-bit binary graymap: zero is mid-gray, `+-limit` saturate.
/// Row 0 of the image is the top of the domain.
pub fn write_pgm(layout: &GridLayout, field: &[f64], limit: f64, w: &mut impl Write) -> std::io::Result<()> {
    write!(w, "P5\n{} {}\n255\n", layout.nx, layout.ny)?;
    let mut row = vec![0u8; layout.nx];
    for j in (0..layout.ny).rev() {
        for i in 0..layout.nx {
            let s = if limit > 0.0 {
                (field[layout.cell_index(i, j)] / limit).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            row[i] = (128.0 + 127.0 * s).round() as u8;
        }
        w.write_all(&row)?;
    }
    Ok(())
}

/// Writes the vorticity image of `grid` to `path`.
pub fn write_vorticity_image(grid: &MacGrid, limit: f64, path: &Path) -> Result<()> {
    let omega = vorticity(grid);
    let f = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_pgm(&grid.layout, &omega, limit, &mut w).map_err(|e| SimError::io(path, e))?;
    w.flush().map_err(|e| SimError::io(path, e))
}
