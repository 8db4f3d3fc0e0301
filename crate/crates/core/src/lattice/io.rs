use std::io::Write;

use serde_json::json;

use super::{GlobalLabelling, Labelling, PointCloud};
use crate::error::Result;
use crate::models::fmt17;

/// CSV `k,x,y,j,l`, one row per labelled point.
pub fn write_labelled_csv<W: Write>(items: &[(&PointCloud, &Labelling)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "x", "y", "j", "l"])?;
    for (cloud, lab) in items {
        for (&i, &(j, l)) in &lab.assignment {
            let (x, y) = cloud.points[i];
            w.write_record([cloud.k.to_string(), fmt17(x), fmt17(y), j.to_string(), l.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// JSON `{charts: [{region, labels}], transitions: [{pair, A, kappa}]}`.
pub fn write_global_json<W: Write>(g: &GlobalLabelling, out: W) -> Result<()> {
    let charts: Vec<_> = g
        .charts
        .iter()
        .map(|c| {
            let labels: Vec<_> = c.labels.assignment.iter().map(|(&i, &(j, l))| json!([i, j, l])).collect();
            json!({ "region": c.region, "labels": labels })
        })
        .collect();
    let doc = json!({
        "k": g.k,
        "charts": charts,
        "transitions": g.transitions,
        "nu_freedom": g.nu_freedom,
    });
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}
