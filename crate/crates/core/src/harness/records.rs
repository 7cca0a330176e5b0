//! Run records and their CSV form.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;

/// Bumped whenever [`RUN_RECORD_HEADER`] changes.
pub const RUN_RECORD_SCHEMA_VERSION: u32 = 1;

pub const RUN_RECORD_HEADER: &str =
    "run_id,seed,method,tau,h,delta,n_particles,T,i,j,estimate,oracle,abs_error,wall_time_ms,error";

/// One estimated component of one replication at one grid point.
///
/// `j` is `None` for score components. Fields that do not apply to the
/// method are `None` and written as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: u64,
    pub seed: u64,
    pub method: String,
    pub tau: Option<f64>,
    pub h: Option<f64>,
    pub delta: Option<usize>,
    pub n_particles: Option<usize>,
    pub horizon: Option<usize>,
    pub i: usize,
    pub j: Option<usize>,
    pub estimate: Option<f64>,
    pub oracle: Option<f64>,
    pub abs_error: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub error: Option<String>,
}

fn opt<T: std::fmt::Display>(s: &mut String, v: Option<T>) {
    if let Some(v) = v {
        let _ = write!(s, "{v}");
    }
}

/// Error messages go in the last column; commas and newlines are replaced
/// so the row stays one line with a fixed column count.
fn sanitize(msg: &str) -> String {
    msg.chars().map(|c| if matches!(c, ',' | '\n' | '\r' | '"') { ';' } else { c }).collect()
}

impl RunRecord {
    /// Row without trailing newline. Floats use Rust's shortest round-trip
    /// formatting, which is locale independent.
    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{},{},{},", self.run_id, self.seed, self.method);
        opt(&mut s, self.tau);
        s.push(',');
        opt(&mut s, self.h);
        s.push(',');
        opt(&mut s, self.delta);
        s.push(',');
        opt(&mut s, self.n_particles);
        s.push(',');
        opt(&mut s, self.horizon);
        let _ = write!(s, ",{},", self.i);
        opt(&mut s, self.j);
        s.push(',');
        opt(&mut s, self.estimate);
        s.push(',');
        opt(&mut s, self.oracle);
        s.push(',');
        opt(&mut s, self.abs_error);
        s.push(',');
        opt(&mut s, self.wall_time_ms);
        s.push(',');
        if let Some(e) = &self.error {
            s.push_str(&sanitize(e));
        }
        s
    }

    /// Sort key used for output: run id, then component.
    pub fn order_key(&self) -> (u64, usize, usize) {
        (self.run_id, self.i, self.j.map_or(0, |j| j + 1))
    }
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by_key(RunRecord::order_key);
}

pub fn write_records_csv<W: Write>(mut w: W, records: &[RunRecord]) -> Result<()> {
    writeln!(w, "{RUN_RECORD_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}
