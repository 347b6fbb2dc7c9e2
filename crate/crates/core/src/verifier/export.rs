//! Verification export: JSON lines (one record per check, radius and
//! derivative order) and a summary CSV `check,r,q,max_rel_err,pass`.

use std::io::Write;

use serde::Serialize;

use super::VerificationReport;
use crate::error::Result;
use crate::growth::export::export_err;

pub fn write_jsonl<W: Write>(reports: &[VerificationReport], mut out: W) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r).map_err(export_err)?;
        out.write_all(b"\n").map_err(export_err)?;
    }
    out.flush().map_err(export_err)
}

pub fn read_jsonl(text: &str) -> Result<Vec<VerificationReport>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(export_err))
        .collect()
}

#[derive(Serialize)]
struct Row<'a> {
    check: &'a str,
    r: f64,
    q: Option<usize>,
    max_rel_err: f64,
    pass: bool,
}

pub fn write_summary_csv<W: Write>(reports: &[VerificationReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(Row {
            check: r.check.as_str(),
            r: r.r,
            q: r.q,
            max_rel_err: r.max_rel_err,
            pass: r.pass,
        })
        .map_err(export_err)?;
    }
    w.flush().map_err(export_err)
}
