//! CSV and PGM writers for trajectories.

use std::io::{self, Write};

use crate::sim::{State, Trajectory};

/// Snapshot table: `t,x,E1,F1,E2,F2` (full) or `t,x,w,F1,F2` (reduced).
pub fn write_snapshots_csv<W: Write>(traj: &Trajectory, out: &mut W) -> io::Result<()> {
    let header = match traj.snapshots.first() {
        Some(State::Reduced(_)) => "t,x,w,F1,F2",
        _ => "t,x,E1,F1,E2,F2",
    };
    writeln!(out, "{header}")?;
    for snap in &traj.snapshots {
        let t = snap.time();
        match snap {
            State::Full(s) => {
                for (j, x) in traj.grid.nodes().enumerate() {
                    writeln!(
                        out,
                        "{t},{x},{},{},{},{}",
                        s.e1[j], s.f1[j], s.e2[j], s.f2[j]
                    )?;
                }
            }
            State::Reduced(s) => {
                for (j, x) in traj.grid.nodes().enumerate() {
                    writeln!(out, "{t},{x},{},{},{}", s.w[j], s.f1[j], s.f2[j])?;
                }
            }
        }
    }
    Ok(())
}

/// Binary greyscale image, one row per sample vector, mapped linearly from
/// `[0, max]` to `[0, 255]`. Negative values map to 0.
pub fn write_pgm<W: Write>(rows: &[&[f64]], out: &mut W) -> io::Result<()> {
    let width = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != width) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "ragged heatmap rows",
        ));
    }
    let max = rows
        .iter()
        .flat_map(|r| r.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    write!(out, "P5\n{width} {}\n255\n", rows.len())?;
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let mut buf = Vec::with_capacity(width);
    for r in rows {
        buf.clear();
        buf.extend(
            r.iter()
                .map(|&v| (v.max(0.0) * scale).round().clamp(0.0, 255.0) as u8),
        );
        out.write_all(&buf)?;
    }
    Ok(())
}
