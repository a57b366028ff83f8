//! Plain CSV writers. Every file starts with `# key: value` header lines.

use std::io::{self, Write};

use crate::continuation::ContinuationStep;
use crate::pde::Snapshot;
use crate::wave::{Grid, WaveProfile};

pub type Header = [(String, String)];

/// Shortest round-trip text, scientific outside `[1e-4, 1e6)`.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn write_header<W: Write>(out: &mut W, header: &Header) -> io::Result<()> {
    for (k, v) in header {
        writeln!(out, "# {k}: {v}")?;
    }
    Ok(())
}

fn write_row<W: Write>(out: &mut W, first: f64, rest: impl Iterator<Item = f64>) -> io::Result<()> {
    write!(out, "{}", fmt_num(first))?;
    for v in rest {
        write!(out, ",{}", fmt_num(v))?;
    }
    writeln!(out)
}

/// `xi,psi_1,...,psi_n`, keeping every `stride`-th grid point and the last one.
pub fn write_profile<W: Write>(out: &mut W, header: &Header, profile: &WaveProfile, stride: usize) -> io::Result<()> {
    write_header(out, header)?;
    let cols: Vec<String> = (1..=profile.n()).map(|i| format!("psi_{i}")).collect();
    writeln!(out, "xi,{}", cols.join(","))?;
    let stride = stride.max(1);
    let last = profile.grid.len - 1;
    for k in (0..=last).filter(|k| k % stride == 0 || *k == last) {
        write_row(out, profile.grid.xi(k), profile.values.iter().map(|v| v[k]))?;
    }
    Ok(())
}

/// `x,u_1,...,u_n` for one snapshot.
pub fn write_snapshot<W: Write>(out: &mut W, header: &Header, grid: &Grid, snap: &Snapshot, stride: usize) -> io::Result<()> {
    write_header(out, header)?;
    writeln!(out, "# t: {}", fmt_num(snap.t))?;
    let cols: Vec<String> = (1..=snap.values.len()).map(|i| format!("u_{i}")).collect();
    writeln!(out, "x,{}", cols.join(","))?;
    let stride = stride.max(1);
    let last = grid.len - 1;
    for k in (0..=last).filter(|k| k % stride == 0 || *k == last) {
        write_row(out, grid.xi(k), snap.values.iter().map(|v| v[k]))?;
    }
    Ok(())
}

/// `t,file` rows pointing at snapshot files.
pub fn write_index<W: Write>(out: &mut W, header: &Header, entries: &[(f64, String)]) -> io::Result<()> {
    write_header(out, header)?;
    writeln!(out, "t,file")?;
    for (t, f) in entries {
        writeln!(out, "{},{f}", fmt_num(*t))?;
    }
    Ok(())
}

/// `n,c,delta,residual,iterations,converged` for a continuation run.
pub fn write_continuation<W: Write>(out: &mut W, header: &Header, steps: &[ContinuationStep]) -> io::Result<()> {
    write_header(out, header)?;
    writeln!(out, "n,c,delta,residual,iterations,converged")?;
    for (n, s) in steps.iter().enumerate() {
        let delta = s.delta.map_or(String::new(), fmt_num);
        writeln!(out, "{},{},{},{},{},{}", n + 1, fmt_num(s.speed), delta, fmt_num(s.residual), s.iterations, s.converged)?;
    }
    Ok(())
}
