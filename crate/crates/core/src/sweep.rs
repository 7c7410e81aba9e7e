//! Parameter-grid classification into equilibrium regions.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{classify, EquilibriumReport, TOL};
use crate::error::{Error, Result};
use crate::game::{MechanismSpec, ModelParams};
use crate::oracle::verify_against_closed_form;

/// Default share of valid grid points re-checked by the oracle.
pub const DEFAULT_ORACLE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    #[serde(rename = "c")]
    C,
    #[serde(rename = "V_D")]
    VD,
    #[serde(rename = "V_B")]
    VB,
    #[serde(rename = "r")]
    R,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "prior")]
    Prior,
    #[serde(rename = "m")]
    M,
}

impl Symbol {
    pub fn as_str(self) -> &'static str {
        match self {
            Symbol::C => "c",
            Symbol::VD => "V_D",
            Symbol::VB => "V_B",
            Symbol::R => "r",
            Symbol::P => "p",
            Symbol::Prior => "prior",
            Symbol::M => "m",
        }
    }

    /// Value used when a symbol is neither an axis nor fixed. `None` means
    /// the symbol is required.
    fn default_value(self) -> Option<f64> {
        match self {
            Symbol::R | Symbol::P => Some(0.0),
            Symbol::Prior => Some(0.5),
            Symbol::C | Symbol::VD | Symbol::VB | Symbol::M => None,
        }
    }

    const ALL: [Symbol; 7] = [
        Symbol::C,
        Symbol::VD,
        Symbol::VB,
        Symbol::R,
        Symbol::P,
        Symbol::Prior,
        Symbol::M,
    ];
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub symbol: Symbol,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(symbol: Symbol, min: f64, max: f64, steps: usize) -> Self {
        Axis {
            symbol,
            min,
            max,
            steps,
        }
    }

    /// Evenly spaced values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        let width = self.cell_width();
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + i as f64 * width
                }
            })
            .collect()
    }

    pub fn cell_width(&self) -> f64 {
        (self.max - self.min) / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: BTreeMap<Symbol, f64>,
    pub mechanism: MechanismSpec,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 3 {
            return Err(Error::validation("1 <= |axes| <= 3"));
        }
        for (i, axis) in self.axes.iter().enumerate() {
            if axis.symbol == Symbol::Prior {
                return Err(Error::validation("axis symbol in {c, V_D, V_B, r, p, m}"));
            }
            if axis.steps < 2 {
                return Err(Error::validation(format!(
                    "steps >= 2 for axis {}",
                    axis.symbol
                )));
            }
            if !(axis.min.is_finite() && axis.max.is_finite()) || axis.min >= axis.max {
                return Err(Error::validation(format!(
                    "min < max for axis {}",
                    axis.symbol
                )));
            }
            if self.axes[..i].iter().any(|a| a.symbol == axis.symbol) {
                return Err(Error::validation(format!(
                    "axis {} listed once",
                    axis.symbol
                )));
            }
            if self.fixed.contains_key(&axis.symbol) {
                return Err(Error::validation(format!(
                    "axis {} not also fixed",
                    axis.symbol
                )));
            }
        }
        for symbol in Symbol::ALL {
            let covered = self.fixed.contains_key(&symbol)
                || self.axes.iter().any(|a| a.symbol == symbol)
                || symbol.default_value().is_some();
            if !covered {
                return Err(Error::validation(format!(
                    "{symbol} bound by axes or fixed"
                )));
            }
        }
        Ok(())
    }

    /// Number of grid points: the product of axis steps.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in row-major order (first axis slowest).
    pub fn points(&self) -> Vec<BTreeMap<Symbol, f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut base: BTreeMap<Symbol, f64> = Symbol::ALL
            .into_iter()
            .filter_map(|s| s.default_value().map(|v| (s, v)))
            .collect();
        base.extend(self.fixed.iter().map(|(&k, &v)| (k, v)));

        let mut points = Vec::with_capacity(self.len());
        let mut index = vec![0usize; self.axes.len()];
        loop {
            let mut point = base.clone();
            for (axis_no, axis) in self.axes.iter().enumerate() {
                point.insert(axis.symbol, values[axis_no][index[axis_no]]);
            }
            points.push(point);
            // Odometer increment, last axis fastest.
            let mut k = self.axes.len();
            loop {
                if k == 0 {
                    return points;
                }
                k -= 1;
                index[k] += 1;
                if index[k] < self.axes[k].steps {
                    break;
                }
                index[k] = 0;
            }
        }
    }
}

fn params_at(point: &BTreeMap<Symbol, f64>) -> (ModelParams, f64) {
    let get = |s: Symbol| point[&s];
    let params = ModelParams {
        c: get(Symbol::C),
        v_d: get(Symbol::VD),
        v_b: get(Symbol::VB),
        r: get(Symbol::R),
        p: get(Symbol::P),
        prior: get(Symbol::Prior),
    };
    (params, get(Symbol::M))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    PoolingOnly,
    SeparatingOnly,
    Both,
    Neither,
    Invalid,
}

impl Classification {
    pub fn from_flags(pooling: bool, separating: bool) -> Self {
        match (pooling, separating) {
            (true, true) => Classification::Both,
            (true, false) => Classification::PoolingOnly,
            (false, true) => Classification::SeparatingOnly,
            (false, false) => Classification::Neither,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One classified grid point. Field names double as the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub mechanism: String,
    pub variant: String,
    pub c: f64,
    #[serde(rename = "V_D")]
    pub v_d: f64,
    #[serde(rename = "V_B")]
    pub v_b: f64,
    pub r: f64,
    pub p: f64,
    pub prior: f64,
    pub m: f64,
    pub classification: Classification,
    /// Binding (smallest) pooling clause slack.
    pub pooling_slack: Option<f64>,
    pub separating_slack_1: Option<f64>,
    pub separating_slack_2: Option<f64>,
    /// Present only when `p > 0`.
    pub typeshift_slack: Option<f64>,
    pub oracle_checked: bool,
}

pub const CSV_HEADER: &str = "mechanism,variant,c,V_D,V_B,r,p,prior,m,classification,pooling_slack,separating_slack_1,separating_slack_2,typeshift_slack,oracle_checked";

impl RegionRow {
    pub fn from_report(params: &ModelParams, report: &EquilibriumReport) -> Self {
        let sep = &report.separating.clauses;
        RegionRow {
            classification: Classification::from_flags(
                report.pooling_on_restraint.holds,
                report.separating.holds,
            ),
            pooling_slack: Some(report.pooling_on_restraint.min_slack()),
            separating_slack_1: sep.first().map(|c| c.slack),
            separating_slack_2: sep.get(1).map(|c| c.slack),
            typeshift_slack: report
                .type_shift_refrain
                .as_ref()
                .map(|t| t.condition.min_slack()),
            ..RegionRow::invalid(report.mechanism, params, report.m)
        }
    }

    fn invalid(spec: MechanismSpec, params: &ModelParams, m: f64) -> Self {
        RegionRow {
            mechanism: spec.mechanism.to_string(),
            variant: spec.variant.to_string(),
            c: params.c,
            v_d: params.v_d,
            v_b: params.v_b,
            r: params.r,
            p: params.p,
            prior: params.prior,
            m,
            classification: Classification::Invalid,
            pooling_slack: None,
            separating_slack_1: None,
            separating_slack_2: None,
            typeshift_slack: None,
            oracle_checked: false,
        }
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            c: self.c,
            v_d: self.v_d,
            v_b: self.v_b,
            r: self.r,
            p: self.p,
            prior: self.prior,
        }
    }

    pub fn coordinate(&self, symbol: Symbol) -> f64 {
        match symbol {
            Symbol::C => self.c,
            Symbol::VD => self.v_d,
            Symbol::VB => self.v_b,
            Symbol::R => self.r,
            Symbol::P => self.p,
            Symbol::Prior => self.prior,
            Symbol::M => self.m,
        }
    }

    /// Recomputes the classification from the stored slacks alone.
    pub fn classification_from_slacks(&self) -> Classification {
        let holds = |s: Option<f64>| s.is_some_and(|s| s >= -TOL);
        match self.pooling_slack {
            None => Classification::Invalid,
            Some(_) => Classification::from_flags(
                holds(self.pooling_slack),
                holds(self.separating_slack_1) && holds(self.separating_slack_2),
            ),
        }
    }

    /// Whether B refrains under type drift; `None` when the point is invalid.
    /// Without drift (`p = 0`) B trivially refrains.
    pub fn b_refrains(&self) -> Option<bool> {
        if self.classification == Classification::Invalid {
            return None;
        }
        Some(self.typeshift_slack.is_none_or(|s| s >= -TOL))
    }
}

fn classify_point(spec: MechanismSpec, point: &BTreeMap<Symbol, f64>) -> RegionRow {
    let (params, m) = params_at(point);
    match classify(spec, &params, m) {
        Ok(report) => RegionRow::from_report(&params, &report),
        Err(_) => RegionRow::invalid(spec, &params, m),
    }
}

/// Classifies every grid point in row-major order. A seeded random share
/// `oracle_fraction` of the valid points is also checked by the oracle on
/// `{0, m}`; any disagreement aborts with [`Error::Discrepancy`].
pub fn run_sweep(spec: &GridSpec, oracle_fraction: f64, seed: u64) -> Result<Vec<RegionRow>> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&oracle_fraction) {
        return Err(Error::validation("0 <= oracle_fraction <= 1"));
    }
    let points = spec.points();
    let mut rows: Vec<RegionRow> = points
        .par_iter()
        .map(|point| classify_point(spec.mechanism, point))
        .collect();

    let mut valid: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, row)| row.classification != Classification::Invalid)
        .map(|(i, _)| i)
        .collect();
    let take = (oracle_fraction * valid.len() as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    valid.shuffle(&mut rng);
    let mut sampled = valid[..take].to_vec();
    sampled.sort_unstable();

    let grid: Vec<(ModelParams, f64)> = sampled
        .iter()
        .map(|&i| (rows[i].params(), rows[i].m))
        .collect();
    log::info!(
        "sweep: {} points, {} valid, {} oracle-checked",
        rows.len(),
        valid.len(),
        grid.len()
    );
    let discrepancies = verify_against_closed_form(spec.mechanism, &grid)?;
    if !discrepancies.is_empty() {
        return Err(Error::Discrepancy(discrepancies));
    }
    for i in sampled {
        rows[i].oracle_checked = true;
    }
    Ok(rows)
}

/// Midpoint of a grid edge whose two endpoints lie in different regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    /// The axis the edge runs along.
    pub axis: Symbol,
    /// Both axis coordinates of the edge midpoint.
    pub coordinates: BTreeMap<Symbol, f64>,
    pub from: String,
    pub to: String,
}

fn region_label(row: &RegionRow) -> String {
    match row.b_refrains() {
        None => Classification::Invalid.to_string(),
        Some(true) => format!("{}/refrain", row.classification),
        Some(false) => format!("{}/fight", row.classification),
    }
}

/// Traces region boundaries on a two-axis grid using the closed form only.
/// Regions are distinguished by classification and by whether B refrains
/// under type drift.
pub fn boundary_trace(spec: &GridSpec) -> Result<Vec<BoundaryPoint>> {
    if spec.axes.len() != 2 {
        return Err(Error::AxisCount(spec.axes.len()));
    }
    spec.validate()?;
    let rows: Vec<RegionRow> = spec
        .points()
        .par_iter()
        .map(|point| classify_point(spec.mechanism, point))
        .collect();
    let labels: Vec<String> = rows.iter().map(region_label).collect();
    let (outer, inner) = (spec.axes[0], spec.axes[1]);
    let at = |i: usize, j: usize| i * inner.steps + j;

    let mut boundary = Vec::new();
    for i in 0..outer.steps {
        for j in 0..inner.steps {
            let here = at(i, j);
            let neighbours = [
                (i + 1 < outer.steps).then(|| (outer.symbol, at(i + 1, j))),
                (j + 1 < inner.steps).then(|| (inner.symbol, at(i, j + 1))),
            ];
            for (axis, there) in neighbours.into_iter().flatten() {
                if labels[here] == labels[there] {
                    continue;
                }
                let coordinates = [outer.symbol, inner.symbol]
                    .into_iter()
                    .map(|s| {
                        let mid = 0.5 * (rows[here].coordinate(s) + rows[there].coordinate(s));
                        (s, mid)
                    })
                    .collect();
                boundary.push(BoundaryPoint {
                    axis,
                    coordinates,
                    from: labels[here].clone(),
                    to: labels[there].clone(),
                });
            }
        }
    }
    Ok(boundary)
}

/// Writes rows as CSV with [`CSV_HEADER`], LF line endings.
pub fn write_csv<W: Write>(rows: &[RegionRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
