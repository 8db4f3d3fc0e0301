use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{JointPoint, JointSpectrum};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    k: u32,
    x: f64,
    y: f64,
    block: i64,
    idx: usize,
}

/// 17 significant digits, '.' separator.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_spectrum_csv<W: Write>(spectra: &[JointSpectrum], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "x", "y", "block", "idx"])?;
    for s in spectra {
        for p in &s.points {
            w.write_record([
                s.k.to_string(),
                fmt17(p.x),
                fmt17(p.y),
                p.block_id.to_string(),
                p.index_in_block.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_json<W: Write>(spectra: &[JointSpectrum], out: W) -> Result<()> {
    let rows: Vec<Row> = spectra
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |p| Row {
                k: s.k,
                x: p.x,
                y: p.y,
                block: p.block_id,
                idx: p.index_in_block,
            })
        })
        .collect();
    serde_json::to_writer_pretty(out, &rows)?;
    Ok(())
}

/// Reads back what `write_spectrum_csv` wrote, one spectrum per k.
pub fn read_spectrum_csv<R: Read>(input: R) -> Result<Vec<JointSpectrum>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out: Vec<JointSpectrum> = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        if out.last().map_or(true, |s| s.k != row.k) {
            if out.iter().any(|s| s.k == row.k) {
                return Err(Error::InvalidInput(format!("rows for k = {} are not contiguous", row.k)));
            }
            out.push(JointSpectrum { k: row.k, points: Vec::new(), window: None });
        }
        out.last_mut().unwrap().points.push(JointPoint {
            x: row.x,
            y: row.y,
            block_id: row.block,
            index_in_block: row.idx,
        });
    }
    for s in &mut out {
        s.points.sort_by(|a, b| (a.block_id, a.index_in_block).cmp(&(b.block_id, b.index_in_block)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{joint_spectrum, ModelSpec, Window};

    #[test]
    fn csv_round_trip_is_exact() {
        let s = joint_spectrum(&ModelSpec::coupled_default(), 2, Window::all()).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(std::slice::from_ref(&s), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,x,y,block,idx\n"));
        let back = read_spectrum_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0].points, s.points);
    }
}
