//! Profile export: CSV `r,x,B,theta_r,a,eps,suspect_flag` and a JSON variant
//! carrying the parameters as well.

use std::io::Write;

use serde::Serialize;

use super::{GrowthProfile, GrowthSample};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct Row {
    r: f64,
    x: f64,
    #[serde(rename = "B")]
    b: f64,
    theta_r: f64,
    a: f64,
    eps: f64,
    suspect_flag: bool,
}

impl From<&GrowthSample> for Row {
    fn from(s: &GrowthSample) -> Self {
        Row {
            r: s.r,
            x: s.x,
            b: s.b,
            theta_r: s.theta_r,
            a: s.a,
            eps: s.eps,
            suspect_flag: s.suspect,
        }
    }
}

pub(crate) fn export_err(e: impl std::fmt::Display) -> Error {
    Error::Export(e.to_string())
}

pub fn write_csv<W: Write>(profile: &GrowthProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in &profile.samples {
        w.serialize(Row::from(s)).map_err(export_err)?;
    }
    w.flush().map_err(export_err)
}

pub fn write_json<W: Write>(profile: &GrowthProfile, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, profile).map_err(export_err)
}

pub fn read_json<R: std::io::Read>(input: R) -> Result<GrowthProfile> {
    serde_json::from_reader(input).map_err(export_err)
}
