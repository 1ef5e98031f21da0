//! Solver-agnostic trace CSV.
//!
//! Header `solver,seed,iteration,wall_time_s,residual_R,residual_O`; floats
//! are written with 17 significant digits so they parse back bit-exactly.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sps::TraceRecord;

pub const TRACE_HEADER: [&str; 6] = ["solver", "seed", "iteration", "wall_time_s", "residual_R", "residual_O"];

/// All records of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceGroup {
    pub solver: String,
    pub records: Vec<TraceRecord>,
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace_csv<W: Write>(groups: &[TraceGroup], sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(TRACE_HEADER)?;
    for group in groups {
        for rec in &group.records {
            writer.write_record([
                group.solver.clone(),
                rec.seed.to_string(),
                rec.iteration.to_string(),
                fmt_float(rec.wall_time_s),
                fmt_float(rec.residual_r),
                rec.residual_o.map(fmt_float).unwrap_or_default(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads a trace CSV back into groups; consecutive rows sharing
/// `(solver, seed)` form one group.
pub fn read_trace_csv<R: Read>(source: R) -> Result<Vec<TraceGroup>> {
    let mut reader = csv::Reader::from_reader(source);
    let header = reader.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected trace header {header:?}"),
        });
    }
    let mut groups: Vec<TraceGroup> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("invalid {what}"),
        };
        let rec = TraceRecord {
            seed: field(1).parse().map_err(|_| bad("seed"))?,
            iteration: field(2).parse().map_err(|_| bad("iteration"))?,
            wall_time_s: field(3).parse().map_err(|_| bad("wall_time_s"))?,
            residual_r: field(4).parse().map_err(|_| bad("residual_R"))?,
            residual_o: match field(5) {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("residual_O"))?),
            },
        };
        let solver = field(0);
        match groups.last_mut() {
            Some(g) if g.solver == solver && g.records.last().is_some_and(|r| r.seed == rec.seed) => {
                g.records.push(rec)
            }
            _ => groups.push(TraceGroup {
                solver: solver.to_string(),
                records: vec![rec],
            }),
        }
    }
    Ok(groups)
}
