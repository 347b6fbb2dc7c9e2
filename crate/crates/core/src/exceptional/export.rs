//! Exceptional-set export: JSON with cells and measures, CSV of per-sample
//! failure flags `r,L5,L6,L7,in_E` (`true` marks a failure / membership).

use std::io::Write;

use serde::Serialize;

use super::ExceptionalSet;
use crate::error::Result;
use crate::growth::export::export_err;

#[derive(Serialize)]
struct Row {
    r: f64,
    #[serde(rename = "L5")]
    l5: bool,
    #[serde(rename = "L6")]
    l6: bool,
    #[serde(rename = "L7")]
    l7: bool,
    #[serde(rename = "in_E")]
    in_e: bool,
}

pub fn write_csv<W: Write>(set: &ExceptionalSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in &set.samples {
        w.serialize(Row {
            r: s.r,
            l5: s.l5,
            l6: s.l6,
            l7: s.l7,
            in_e: s.in_e,
        })
        .map_err(export_err)?;
    }
    w.flush().map_err(export_err)
}

pub fn write_json<W: Write, T: Serialize>(value: &T, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, value).map_err(export_err)
}
