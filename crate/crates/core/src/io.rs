//! File formats: trajectories and grids as CSV, reports as pretty JSON.
//!
//! Floats in CSV files are written with 17 significant digits (`{:.16e}`),
//! which round-trips every `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::sub;
use crate::model::{DiscreteTrajectory, Dissipation, EnergyModel, SchemeKind};

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes a run as
///
/// ```text
/// # scheme=eps-neighborhood,eps=...,tau=...,viscosity=...
/// index,t,x0,...,step_psi,step_energy
/// ```
///
/// where `step_psi = Psi(x_i - x_{i-1})` and
/// `step_energy = E(t_i, x_i) - E(t_{i-1}, x_{i-1})` (0 on the first row).
pub fn write_trajectory(
    path: &Path,
    traj: &DiscreteTrajectory,
    model: &EnergyModel,
    dissipation: &Dissipation,
) -> Result<()> {
    let mut out = create(path)?;
    writeln!(
        out,
        "# scheme={},eps={},tau={},viscosity={}",
        traj.scheme.tag(),
        fmt(traj.eps),
        fmt(traj.tau),
        fmt(traj.viscosity)
    )?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["index".to_string(), "t".to_string()];
    header.extend((0..traj.dim()).map(|k| format!("x{k}")));
    header.push("step_psi".into());
    header.push("step_energy".into());
    w.write_record(&header).map_err(csv_err)?;
    for (i, (&t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let (psi, de) = if i == 0 {
            (0.0, 0.0)
        } else {
            let prev = &traj.states[i - 1];
            (
                dissipation.psi(&sub(x, prev)),
                model.energy(t, x) - model.energy(traj.times[i - 1], prev),
            )
        };
        let mut row = vec![i.to_string(), fmt(t)];
        row.extend(x.iter().map(|v| fmt(*v)));
        row.push(fmt(psi));
        row.push(fmt(de));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {what} from {s:?}")))
}

/// Reads a file produced by [`write_trajectory`]. The derived step columns
/// are ignored.
pub fn read_trajectory(path: &Path) -> Result<DiscreteTrajectory> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut meta = String::new();
    reader.read_line(&mut meta)?;
    let meta = meta
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Format("trajectory file must start with a `# scheme=...` line".into()))?;
    let (mut scheme, mut eps, mut tau, mut viscosity) = (None, 0.0, None, 0.0);
    for kv in meta.split(',') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad metadata entry {kv:?}")))?;
        match k.trim() {
            "scheme" => scheme = Some(SchemeKind::from_tag(v.trim()).map_err(|e| Error::Format(e.to_string()))?),
            "eps" => eps = parse_f64(v, "eps")?,
            "tau" => tau = Some(parse_f64(v, "tau")?),
            "viscosity" => viscosity = parse_f64(v, "viscosity")?,
            other => return Err(Error::Format(format!("unknown metadata key {other:?}"))),
        }
    }
    let scheme = scheme.ok_or_else(|| Error::Format("metadata lacks `scheme`".into()))?;
    let tau = tau.ok_or_else(|| Error::Format("metadata lacks `tau`".into()))?;

    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let dim = header.iter().filter(|h| h.starts_with('x')).count();
    let expected: Vec<String> = ["index".to_string(), "t".to_string()]
        .into_iter()
        .chain((0..dim).map(|k| format!("x{k}")))
        .chain(["step_psi".to_string(), "step_energy".to_string()])
        .collect();
    if dim == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Format(format!("unexpected trajectory header {header:?}")));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let index: usize = rec[0]
            .parse()
            .map_err(|_| Error::Format(format!("bad index {:?}", &rec[0])))?;
        if index != n {
            return Err(Error::Format(format!("row {n} has index {index}")));
        }
        times.push(parse_f64(&rec[1], "t")?);
        states.push((0..dim).map(|k| parse_f64(&rec[2 + k], "state")).collect::<Result<Vec<_>>>()?);
    }
    let traj = DiscreteTrajectory {
        times,
        states,
        scheme,
        eps,
        tau,
        viscosity,
    };
    traj.validate(None)?;
    Ok(traj)
}

/// Writes a plain numeric table.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Format(format!(
                "row of length {} under a header of length {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|v| fmt(*v))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `value` as pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = BufReader::new(File::open(path)?);
    serde_json::from_reader(file).map_err(|e| Error::Format(e.to_string()))
}
