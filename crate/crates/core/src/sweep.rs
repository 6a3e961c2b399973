// SPDX-License-Identifier: Apache-2.0

//! Parameter scans over the probe offset x/κ or the amplitude ratio n, the
//! figure presets built from them, and their CSV form.
//!
//! A sweep has one swept axis and a list of overlays. For an x/κ sweep each
//! overlay is an n value; for an n sweep each overlay is an x/κ value. Every
//! (overlay, quantity) pair becomes one column. Points where the response
//! denominator is near singular are stored as `None` and written as empty
//! CSV fields.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::params::{angular, ReducedParams};
use crate::response::{fluctuation_amplitudes, ResponseAmplitudes};

pub const DEFAULT_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    XOverKappa,
    N,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::XOverKappa => "x_over_kappa",
            Axis::N => "n",
        }
    }

    /// Name of the coordinate that overlays fix.
    pub fn overlay_name(self) -> &'static str {
        match self {
            Axis::XOverKappa => "n",
            Axis::N => "x_over_kappa",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x_over_kappa" | "x" => Ok(Axis::XOverKappa),
            "n" => Ok(Axis::N),
            _ => Err(Error::InvalidSweep(format!("unknown axis `{s}` (expected x_over_kappa or n)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    ReEpsT,
    ImEpsT,
    Abs2B,
    Abs2OutL,
    Abs2OutR,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::ReEpsT,
        Quantity::ImEpsT,
        Quantity::Abs2B,
        Quantity::Abs2OutL,
        Quantity::Abs2OutR,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::ReEpsT => "re_epsT",
            Quantity::ImEpsT => "im_epsT",
            Quantity::Abs2B => "abs2_b",
            Quantity::Abs2OutL => "abs2_outL",
            Quantity::Abs2OutR => "abs2_outR",
        }
    }

    pub fn evaluate(self, resp: &ResponseAmplitudes, kappa: f64) -> f64 {
        match self {
            Quantity::ReEpsT => resp.eps_t.re,
            Quantity::ImEpsT => resp.eps_t.im,
            Quantity::Abs2B => resp.abs2_b(kappa),
            Quantity::Abs2OutL => resp.abs2_out_l(),
            Quantity::Abs2OutR => resp.abs2_out_r(),
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown quantity `{s}`")))
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Parameters of every grid point before the axis and overlay are applied.
    pub base: ReducedParams,
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// n values for an x/κ sweep, x/κ values for an n sweep.
    pub overlays: Vec<f64>,
    pub quantities: Vec<Quantity>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.points < 2 {
            return Err(Error::InvalidSweep(format!("need at least 2 points, got {}", self.points)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidSweep("range must be finite".into()));
        }
        if self.quantities.is_empty() {
            return Err(Error::InvalidSweep("no quantities requested".into()));
        }
        if self.overlays.is_empty() {
            return Err(Error::InvalidSweep("no overlays given".into()));
        }
        let n_values: Vec<f64> = match self.axis {
            Axis::XOverKappa => self.overlays.clone(),
            Axis::N => vec![self.start, self.stop],
        };
        if n_values.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return Err(Error::InvalidSweep("n must be finite and >= 0".into()));
        }
        if self.overlays.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("overlay values must be finite".into()));
        }
        Ok(())
    }

    /// Axis grid; symmetric ranges produce exactly mirrored values.
    pub fn axis_values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| (self.start * (last - i as f64) + self.stop * i as f64) / last)
            .collect()
    }

    /// Parameters and probe offset (rad/s) for one grid point.
    fn point(&self, overlay: f64, axis_value: f64) -> (ReducedParams, f64) {
        match self.axis {
            Axis::XOverKappa => (self.base.with_n(overlay), axis_value * self.base.kappa),
            Axis::N => (self.base.with_n(axis_value), overlay * self.base.kappa),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub quantity: Quantity,
    pub overlay: f64,
    /// `None` at near-singular points.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: Axis,
    pub axis_values: Vec<f64>,
    pub columns: Vec<Column>,
}

impl SweepResult {
    pub fn column_name(&self, c: &Column) -> String {
        format!("{}__{}={}", c.quantity.name(), self.axis.overlay_name(), c.overlay)
    }

    pub fn column(&self, quantity: Quantity, overlay: f64) -> Option<&Column> {
        self.columns
            .iter()
            .find(|c| c.quantity == quantity && c.overlay == overlay)
    }

    /// Rows where at least one column is masked.
    pub fn singular_mask(&self) -> Vec<bool> {
        (0..self.axis_values.len())
            .map(|i| self.columns.iter().any(|c| c.values[i].is_none()))
            .collect()
    }

    /// Write the table as CSV: one header row, values in 17-digit scientific
    /// notation, masked cells empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        if self.axis_values.is_empty() {
            return Err(Error::InvalidSweep("empty sweep result".into()));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.axis.name().to_string()];
        header.extend(self.columns.iter().map(|c| self.column_name(c)));
        w.write_record(&header)?;
        for (i, x) in self.axis_values.iter().enumerate() {
            let mut row = vec![format_value(*x)];
            row.extend(
                self.columns
                    .iter()
                    .map(|c| c.values[i].map(format_value).unwrap_or_default()),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers()?.clone();
        let mut fields = header.iter();
        let axis: Axis = fields
            .next()
            .ok_or_else(|| Error::Parse("empty header".into()))?
            .parse()
            .map_err(|e: Error| Error::Parse(e.to_string()))?;
        let mut columns = Vec::new();
        for name in fields {
            let (q, rest) = name
                .split_once("__")
                .ok_or_else(|| Error::Parse(format!("bad column name `{name}`")))?;
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad column name `{name}`")))?;
            if key != axis.overlay_name() {
                return Err(Error::Parse(format!("column `{name}` does not match axis {}", axis.name())));
            }
            columns.push(Column {
                quantity: q.parse().map_err(|e: Error| Error::Parse(e.to_string()))?,
                overlay: parse_number(value)?,
                values: Vec::new(),
            });
        }
        let mut axis_values = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != columns.len() + 1 {
                return Err(Error::Parse(format!("row has {} fields, expected {}", record.len(), columns.len() + 1)));
            }
            axis_values.push(parse_number(&record[0])?);
            for (c, field) in columns.iter_mut().zip(record.iter().skip(1)) {
                c.values.push(if field.is_empty() { None } else { Some(parse_number(field)?) });
            }
        }
        Ok(Self {
            axis,
            axis_values,
            columns,
        })
    }
}

fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let axis_values = spec.axis_values();
    let tasks: Vec<(usize, f64)> = (0..spec.overlays.len())
        .flat_map(|o| axis_values.iter().map(move |&v| (o, v)))
        .collect();
    let evaluated: Vec<Option<Vec<f64>>> = exec.map(&tasks, |&(o, v)| {
        let (r, x) = spec.point(spec.overlays[o], v);
        fluctuation_amplitudes(&r, x)
            .ok()
            .map(|resp| spec.quantities.iter().map(|q| q.evaluate(&resp, r.kappa)).collect())
    });

    let points = axis_values.len();
    let mut columns = Vec::with_capacity(spec.overlays.len() * spec.quantities.len());
    for (o, &overlay) in spec.overlays.iter().enumerate() {
        let block = &evaluated[o * points..(o + 1) * points];
        for (qi, &quantity) in spec.quantities.iter().enumerate() {
            columns.push(Column {
                quantity,
                overlay,
                values: block.iter().map(|v| v.as_ref().map(|vals| vals[qi])).collect(),
            });
        }
    }
    Ok(SweepResult {
        axis: spec.axis,
        axis_values,
        columns,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2,
    Fig2Inset,
    Fig3,
    Fig4,
    Fig4Inset,
    Fig5,
    Fig5Inset,
    Fig6,
    Fig6Inset,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::Fig2,
        Preset::Fig2Inset,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig4Inset,
        Preset::Fig5,
        Preset::Fig5Inset,
        Preset::Fig6,
        Preset::Fig6Inset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig2Inset => "fig2_inset",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig4Inset => "fig4_inset",
            Preset::Fig5 => "fig5",
            Preset::Fig5Inset => "fig5_inset",
            Preset::Fig6 => "fig6",
            Preset::Fig6Inset => "fig6_inset",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }

    pub fn spec(self) -> SweepSpec {
        // broad mechanics for the transparency figures, the device value elsewhere
        let broad = ReducedParams::paper_device(angular(14.1e3), 0.0);
        let narrow = ReducedParams::paper_device(angular(141.0), 0.0);
        let x_sweep = |base, overlays: &[f64], q| SweepSpec {
            base,
            axis: Axis::XOverKappa,
            start: -1.0,
            stop: 1.0,
            points: DEFAULT_POINTS,
            overlays: overlays.to_vec(),
            quantities: vec![q],
        };
        let n_sweep = |q| SweepSpec {
            base: narrow,
            axis: Axis::N,
            start: 0.0,
            stop: 1.0,
            points: DEFAULT_POINTS,
            overlays: vec![0.0],
            quantities: vec![q],
        };
        const AMPLIFICATION: [f64; 4] = [0.0, 0.7, 0.8, 0.9];
        match self {
            Preset::Fig2 => x_sweep(broad, &[0.0, 0.7], Quantity::ReEpsT),
            Preset::Fig2Inset => x_sweep(narrow, &[0.7], Quantity::ReEpsT),
            Preset::Fig3 => x_sweep(broad, &[0.0, 0.7], Quantity::ImEpsT),
            Preset::Fig4 => x_sweep(narrow, &AMPLIFICATION, Quantity::Abs2B),
            Preset::Fig4Inset => n_sweep(Quantity::Abs2B),
            Preset::Fig5 => x_sweep(narrow, &AMPLIFICATION, Quantity::Abs2OutL),
            Preset::Fig5Inset => n_sweep(Quantity::Abs2OutL),
            Preset::Fig6 => x_sweep(narrow, &AMPLIFICATION, Quantity::Abs2OutR),
            Preset::Fig6Inset => n_sweep(Quantity::Abs2OutR),
        }
    }

    pub fn valid_names() -> String {
        Preset::ALL.map(Preset::name).join(", ")
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset {
                name: s.to_string(),
                valid: Preset::valid_names(),
            })
    }
}

pub fn figure_preset(name: &str) -> Result<SweepSpec> {
    Ok(name.parse::<Preset>()?.spec())
}
