//! Plain-text trajectory checkpoints.
//!
//! ```text
//! # sgm-checkpoint v1
//! # n=64
//! # period=6.283185307179586
//! # dt=0.001
//! # frames=101
//! # <extra key>=<value>
//! t,u0,u1,...,u63
//! 0,<u(x_0, 0)>,...
//! ```
//!
//! Numbers use the shortest representation that reads back to the same `f64`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{GridField, Trajectory};

pub const MAGIC: &str = "# sgm-checkpoint v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub trajectory: Trajectory,
    /// Header entries other than the grid description.
    pub meta: BTreeMap<String, String>,
}

pub fn write_checkpoint<W: Write>(mut out: W, traj: &Trajectory, meta: &BTreeMap<String, String>) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "# n={}", traj.grid_size())?;
    writeln!(out, "# period={}", traj.period())?;
    writeln!(out, "# dt={}", traj.dt())?;
    writeln!(out, "# frames={}", traj.len())?;
    for (k, v) in meta {
        writeln!(out, "# {k}={v}")?;
    }
    let mut head = String::from("t");
    for j in 0..traj.grid_size() {
        head.push_str(&format!(",u{j}"));
    }
    writeln!(out, "{head}")?;
    for (f, t) in traj.frames().iter().zip(traj.times()) {
        let mut line = format!("{t}");
        for v in f.samples() {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {s:?} in {what}")))
}

pub fn read_checkpoint<R: BufRead>(input: R) -> Result<Checkpoint> {
    let mut lines = input.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim() != MAGIC {
        return Err(Error::Parse(format!("missing checkpoint header, found {first:?}")));
    }
    let mut meta = BTreeMap::new();
    let mut header_row = None;
    for line in lines.by_ref() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header line {line:?}")))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            header_row = Some(line);
            break;
        }
    }
    let take = |meta: &mut BTreeMap<String, String>, k: &str| {
        meta.remove(k)
            .ok_or_else(|| Error::Parse(format!("checkpoint header lacks {k}")))
    };
    let n: usize = take(&mut meta, "n")?
        .parse()
        .map_err(|_| Error::Parse("bad grid size".into()))?;
    let period = parse_f64(&take(&mut meta, "period")?, "period")?;
    let frames: usize = take(&mut meta, "frames")?
        .parse()
        .map_err(|_| Error::Parse("bad frame count".into()))?;
    take(&mut meta, "dt")?;
    let header_row = header_row.ok_or_else(|| Error::Parse("checkpoint has no column row".into()))?;
    if header_row.split(',').count() != n + 1 {
        return Err(Error::Parse(format!("column row has {} entries, expected {}", header_row.split(',').count(), n + 1)));
    }
    let mut fields = Vec::with_capacity(frames);
    let mut times = Vec::with_capacity(frames);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        times.push(parse_f64(cells.next().unwrap_or(""), &format!("row {i}"))?);
        let vals = cells
            .map(|c| parse_f64(c, &format!("row {i}")))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != n {
            return Err(Error::Parse(format!("row {i} has {} values, expected {n}", vals.len())));
        }
        fields.push(GridField::new(vals, period)?);
    }
    if fields.len() != frames {
        return Err(Error::Parse(format!("found {} frames, header says {frames}", fields.len())));
    }
    Ok(Checkpoint {
        trajectory: Trajectory::new(fields, times)?,
        meta,
    })
}

pub fn save_checkpoint(path: &Path, traj: &Trajectory, meta: &BTreeMap<String, String>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint(&mut w, traj, meta)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(BufReader::new(File::open(path)?))
}
