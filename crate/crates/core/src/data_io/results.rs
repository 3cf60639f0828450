use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// One front member of one repeat, as written to a results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub repeat: usize,
    pub algorithm: String,
    pub selection_bits: String,
    pub tet: f64,
    pub ms: f64,
    pub obj_time: f64,
    pub obj_disc: f64,
    pub obj_inf: f64,
    pub obj_inst: f64,
    pub obj_minmax: f64,
    /// Wall-clock seconds of the whole repeat; identical on every row of it.
    pub wallclock_s: f64,
}

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "repeat",
            "algorithm",
            "selection_bits",
            "tet",
            "ms",
            "obj_time",
            "obj_disc",
            "obj_inf",
            "obj_inst",
            "obj_minmax",
            "wallclock_s",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(input: R) -> csv::Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
