//! Parameter sweeps over the scaled couplings `(λ/√N, η/N)` and their
//! CSV/JSON output.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::measures::{self, SUM_RULE_TOL};
use crate::model::{self, CriticalCoupling, ModelParams};
use crate::reduce;
use crate::spectra::{self, ConvergenceOptions};

/// Version stamped into every CSV header.
pub const SCHEMA_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `steps` evenly spaced values from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        let g = Self { min, max, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn single(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            steps: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::GridSpec("grid needs at least one step".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::GridSpec(format!(
                "grid bounds {}:{} are not an ascending finite range",
                self.min, self.max
            )));
        }
        if self.steps == 1 && self.max != self.min {
            return Err(Error::GridSpec(
                "a one-step grid needs min == max".into(),
            ));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.steps == 1 {
            return self.min;
        }
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Parses `min:max:steps`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts.as_slice() else {
            return Err(Error::GridSpec(format!("expected min:max:steps, got `{s}`")));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::GridSpec(format!("`{x}` is not a number")))
        };
        let steps = steps
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::GridSpec(format!("`{steps}` is not a step count")))?;
        Grid::new(num(min)?, num(max)?, steps)
    }
}

/// Which observable groups a sweep computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSet {
    /// Entropies, GMC of every order, `I¹` and shares.
    pub gmc: bool,
    /// `F_max` and witnessed depth.
    pub qfi: bool,
    /// `E_G^(ℓ)`.
    pub global: bool,
    /// Ground energy.
    pub energy: bool,
}

impl MeasureSet {
    pub const ALL: Self = Self {
        gmc: true,
        qfi: true,
        global: true,
        energy: true,
    };

    pub fn is_empty(&self) -> bool {
        !(self.gmc || self.qfi || self.global || self.energy)
    }
}

impl Default for MeasureSet {
    fn default() -> Self {
        Self::ALL
    }
}

impl FromStr for MeasureSet {
    type Err = Error;

    /// Comma-separated subset of `gmc, qfi, global, energy`, or `all`.
    fn from_str(s: &str) -> Result<Self> {
        let mut set = Self {
            gmc: false,
            qfi: false,
            global: false,
            energy: false,
        };
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item {
                "gmc" => set.gmc = true,
                "qfi" => set.qfi = true,
                "global" => set.global = true,
                "energy" => set.energy = true,
                "all" => set = Self::ALL,
                other => return Err(Error::UnknownMeasure(other.to_string())),
            }
        }
        if set.is_empty() {
            return Err(Error::UnknownMeasure("empty measure list".into()));
        }
        Ok(set)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidParams(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub omega_c: f64,
    pub omega_0: f64,
    pub n_qubits: usize,
    /// In units of `λ/√N`.
    pub lambda_grid: Grid,
    /// In units of `η/N`.
    pub eta_grid: Grid,
    pub measures: MeasureSet,
    #[serde(skip)]
    pub convergence: ConvergenceOptions,
    pub workers: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.lambda_grid.validate()?;
        self.eta_grid.validate()?;
        if self.measures.is_empty() {
            return Err(Error::UnknownMeasure("empty measure list".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParams("workers must be at least 1".into()));
        }
        ModelParams::new(self.omega_c, self.omega_0, 0.0, 0.0, self.n_qubits, 0)?;
        Ok(())
    }

    /// Grid points in output order: `η` outer, `λ` inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let lambdas = self.lambda_grid.values();
        self.eta_grid
            .values()
            .into_iter()
            .flat_map(|eta| lambdas.iter().map(move |&g| (g, eta)))
            .collect()
    }
}

/// Everything computed at one grid point. `None` marks a quantity that was
/// not requested or does not apply.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n_qubits: usize,
    pub lambda_over_sqrt_n: f64,
    pub eta_over_n: f64,
    pub n_max_used: usize,
    pub converged: bool,
    pub degenerate: bool,
    pub energy: Option<f64>,
    pub purity: Option<f64>,
    pub gmc: Option<measures::GmcReport>,
    pub f_max: Option<f64>,
    pub depth: Option<usize>,
    /// `E_G^(ℓ)`, `ℓ = 1..N−1`; inner `None` when `ρ_N` is mixed.
    pub global: Option<Vec<Option<f64>>>,
}

/// A single CSV/JSON field.
#[derive(Clone, Debug, PartialEq)]
enum Cell {
    Float(f64),
    Share(f64),
    Int(usize),
    Bool(bool),
    Empty,
}

impl Cell {
    fn float(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x}"),
            Cell::Share(x) => format!("{x:.1}"),
            Cell::Int(x) => x.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) | Cell::Share(x) => serde_json::Number::from_f64(*x)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Int(x) => Value::from(*x),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

/// Column names for an `N`-qubit sweep, in output order.
pub fn column_names(n: usize) -> Vec<String> {
    let mut cols: Vec<String> = [
        "lambda_over_sqrtN",
        "eta_over_N",
        "n_max_used",
        "converged",
        "degenerate",
        "energy",
        "purity_rho_N",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend((1..=n).map(|k| format!("S_{k}")));
    cols.extend((1..n).map(|k| format!("I_higher_{k}")));
    cols.extend((2..=n).map(|k| format!("I_{k}")));
    cols.push("I1".into());
    cols.extend((2..=n).map(|k| format!("share_{k}")));
    cols.push("f_max".into());
    cols.push("depth".into());
    cols.extend((1..n).map(|l| format!("E_G_{l}")));
    cols
}

impl SweepRow {
    fn cells(&self) -> Vec<Cell> {
        let n = self.n_qubits;
        let mut out = vec![
            Cell::Float(self.lambda_over_sqrt_n),
            Cell::Float(self.eta_over_n),
            Cell::Int(self.n_max_used),
            Cell::Bool(self.converged),
            Cell::Bool(self.degenerate),
            Cell::float(self.energy),
            Cell::float(self.purity),
        ];
        match &self.gmc {
            Some(g) => {
                out.extend(g.entropies.iter().map(|&x| Cell::Float(x)));
                out.extend(g.higher_than.iter().map(|&x| Cell::Float(x)));
                out.extend(g.orders.iter().map(|&x| Cell::Float(x)));
                out.push(Cell::Float(g.total));
                out.extend(g.shares.iter().map(|&x| Cell::Share(x)));
            }
            None => out.extend(std::iter::repeat_n(Cell::Empty, 4 * n - 2)),
        }
        out.push(Cell::float(self.f_max));
        out.push(self.depth.map_or(Cell::Empty, Cell::Int));
        match &self.global {
            Some(g) => out.extend(g.iter().map(|&x| Cell::float(x))),
            None => out.extend(std::iter::repeat_n(Cell::Empty, n.saturating_sub(1))),
        }
        out
    }

    /// Re-checks `I¹ = Σ_k I^k` before the row is written.
    pub fn check_sum_rule(&self) -> Result<()> {
        if let Some(g) = &self.gmc {
            let sum: f64 = g.orders.iter().sum();
            if (g.total - sum).abs() > SUM_RULE_TOL {
                return Err(Error::SumRule {
                    total: g.total,
                    sum,
                });
            }
        }
        Ok(())
    }

    /// JSON object keyed by the CSV column names.
    pub fn to_json(&self) -> Result<Value> {
        self.check_sum_rule()?;
        let map: Map<String, Value> = column_names(self.n_qubits)
            .into_iter()
            .zip(self.cells().iter().map(Cell::json))
            .collect();
        Ok(Value::Object(map))
    }

    fn failed(n_qubits: usize, g: f64, eta: f64) -> Self {
        Self {
            n_qubits,
            lambda_over_sqrt_n: g,
            eta_over_n: eta,
            n_max_used: 0,
            converged: false,
            degenerate: false,
            energy: None,
            purity: None,
            gmc: None,
            f_max: None,
            depth: None,
            global: None,
        }
    }
}

/// Converged ground state and requested measures at one `(λ/√N, η/N)`.
pub fn evaluate_point(
    omega_c: f64,
    omega_0: f64,
    n_qubits: usize,
    lambda_scaled: f64,
    eta_scaled: f64,
    measures: MeasureSet,
    opts: &ConvergenceOptions,
) -> Result<SweepRow> {
    let p = ModelParams::from_scaled(omega_c, omega_0, lambda_scaled, eta_scaled, n_qubits, 0)?;
    let gs = spectra::converged_ground_state(&p, opts)?;
    let rho = gs.qubit_state()?;
    let qfi = if measures.qfi {
        Some(measures::qfi_matrix(&rho)?)
    } else {
        None
    };
    let global = if measures.global {
        Some(
            (1..n_qubits)
                .map(|l| measures::global_entanglement(&rho, l))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(SweepRow {
        n_qubits,
        lambda_over_sqrt_n: lambda_scaled,
        eta_over_n: eta_scaled,
        n_max_used: gs.n_max_used,
        converged: gs.converged,
        degenerate: gs.degenerate,
        energy: measures.energy.then_some(gs.energy),
        purity: Some(reduce::purity(&rho)),
        gmc: if measures.gmc {
            Some(measures::gmc_report(&rho)?)
        } else {
            None
        },
        f_max: qfi.as_ref().map(|q| q.f_max),
        depth: qfi.as_ref().map(|q| q.depth),
        global,
    })
}

/// Applies `f` to every item on `workers` threads. Items are split into
/// contiguous blocks and each result lands in its own preallocated slot, so
/// the output order never depends on scheduling.
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = workers.clamp(1, items.len().max(1));
    let mut slots: Vec<Option<R>> = std::iter::repeat_with(|| None).take(items.len()).collect();
    let block = items.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        for (inputs, outputs) in items.chunks(block).zip(slots.chunks_mut(block)) {
            let f = &f;
            scope.spawn(move || {
                for (x, slot) in inputs.iter().zip(outputs.iter_mut()) {
                    *slot = Some(f(x));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("every slot is filled"))
        .collect()
}

/// One row per grid point, `η` outer and `λ` inner. A point whose solve
/// fails is kept as a non-converged row with empty measures.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let points = config.points();
    Ok(parallel_map(&points, config.workers, |&(g, eta)| {
        evaluate_point(
            config.omega_c,
            config.omega_0,
            config.n_qubits,
            g,
            eta,
            config.measures,
            &config.convergence,
        )
        .unwrap_or_else(|_| SweepRow::failed(config.n_qubits, g, eta))
    }))
}

pub fn csv_preamble() -> String {
    format!("# units=nats couplings=scaled version={SCHEMA_VERSION}\n")
}

pub fn rows_to_csv(n_qubits: usize, rows: &[SweepRow]) -> Result<String> {
    let mut out = csv_preamble();
    out.push_str(&column_names(n_qubits).join(","));
    out.push('\n');
    for row in rows {
        if row.n_qubits != n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                got: row.n_qubits,
            });
        }
        row.check_sum_rule()?;
        let line: Vec<String> = row.cells().iter().map(Cell::csv).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn rows_to_json(rows: &[SweepRow]) -> Result<String> {
    let values = rows
        .iter()
        .map(SweepRow::to_json)
        .collect::<Result<Vec<_>>>()?;
    let mut s = serde_json::to_string_pretty(&values)?;
    s.push('\n');
    Ok(s)
}

pub fn render_rows(n_qubits: usize, rows: &[SweepRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => rows_to_csv(n_qubits, rows),
        OutputFormat::Json => rows_to_json(rows),
    }
}

pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

/// First-order crossings at `λ = 0` and the superradiant point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalTable {
    pub n_qubits: usize,
    pub first_order: Vec<CriticalCoupling>,
    pub lambda_c_over_sqrt_n: f64,
}

pub fn critical_table(n_qubits: usize, omega_c: f64, omega_0: f64) -> Result<CriticalTable> {
    ModelParams::new(omega_c, omega_0, 0.0, 0.0, n_qubits, 0)?;
    Ok(CriticalTable {
        n_qubits,
        first_order: model::first_order_critical_couplings(n_qubits, omega_0),
        lambda_c_over_sqrt_n: model::superradiant_critical_coupling(omega_c, omega_0),
    })
}

impl CriticalTable {
    pub fn to_csv(&self) -> String {
        let mut out = csv_preamble();
        out.push_str("transition,m_s,eta_over_N,lambda_over_sqrtN\n");
        for c in &self.first_order {
            let _ = writeln!(out, "first_order,{},{},", c.m_s, c.eta_c_over_n);
        }
        let _ = writeln!(out, "second_order,,,{}", self.lambda_c_over_sqrt_n);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensivityRow {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    #[serde(rename = "lambda_over_sqrtN")]
    pub lambda_over_sqrt_n: f64,
    #[serde(rename = "I1")]
    pub total: Option<f64>,
    #[serde(rename = "I1_over_N")]
    pub total_per_qubit: Option<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensivityScan {
    pub rows: Vec<ExtensivityRow>,
    /// `(N, λ/√N)` of the steepest rise of `I¹`.
    pub inflections: Vec<(usize, Option<f64>)>,
}

/// Abscissa of the steepest slope of `ys(xs)`: the largest finite-difference
/// slope, refined by a parabola through it and its two neighbours.
pub fn inflection_point(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 3 || xs.len() != ys.len() {
        return None;
    }
    let mids: Vec<f64> = xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let slopes: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    let (i, _) = slopes
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if i == 0 || i + 1 == slopes.len() {
        return Some(mids[i]);
    }
    let (a, b, c) = (slopes[i - 1], slopes[i], slopes[i + 1]);
    let curvature = a - 2.0 * b + c;
    if curvature >= 0.0 {
        return Some(mids[i]);
    }
    let h = 0.5 * (mids[i + 1] - mids[i - 1]);
    Some(mids[i] + 0.5 * (a - c) / curvature * h)
}

/// `I¹` along `λ/√N` at `η = 0` for each `N`.
pub fn extensivity_scan(
    n_list: &[usize],
    lambda_grid: &Grid,
    omega_c: f64,
    omega_0: f64,
    opts: &ConvergenceOptions,
    workers: usize,
) -> Result<ExtensivityScan> {
    lambda_grid.validate()?;
    for &n in n_list {
        ModelParams::new(omega_c, omega_0, 0.0, 0.0, n, 0)?;
    }
    let lambdas = lambda_grid.values();
    let points: Vec<(usize, f64)> = n_list
        .iter()
        .flat_map(|&n| lambdas.iter().map(move |&g| (n, g)))
        .collect();
    let rows = parallel_map(&points, workers, |&(n, g)| {
        let solved = ModelParams::from_scaled(omega_c, omega_0, g, 0.0, n, 0)
            .and_then(|p| spectra::converged_ground_state(&p, opts))
            .and_then(|gs| Ok((measures::total_correlations(&gs.qubit_state()?)?, gs.converged)));
        let (total, converged) = match solved {
            Ok((i1, c)) => (Some(i1), c),
            Err(_) => (None, false),
        };
        ExtensivityRow {
            n_qubits: n,
            lambda_over_sqrt_n: g,
            total,
            total_per_qubit: total.map(|i1| i1 / n as f64),
            converged,
        }
    });
    let inflections = n_list
        .iter()
        .map(|&n| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.n_qubits == n)
                .filter_map(|r| r.total.map(|t| (r.lambda_over_sqrt_n, t)))
                .unzip();
            (n, inflection_point(&xs, &ys))
        })
        .collect();
    Ok(ExtensivityScan { rows, inflections })
}

impl ExtensivityScan {
    pub fn inflection(&self, n: usize) -> Option<f64> {
        self.inflections
            .iter()
            .find(|(m, _)| *m == n)
            .and_then(|(_, x)| *x)
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = csv_preamble();
        out.push_str("N,lambda_over_sqrtN,I1,I1_over_N,converged,inflection\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n_qubits,
                r.lambda_over_sqrt_n,
                opt(r.total),
                opt(r.total_per_qubit),
                r.converged,
                opt(self.inflection(r.n_qubits)),
            );
        }
        out
    }
}

/// NV-center ensemble coupled to a resonant magnon mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NvParams {
    /// Resonant magnon coupling.
    pub g_nu: f64,
    /// Mediated coupling `|g_μ|²/ω_μ` of the off-resonant mode.
    pub g_eff: f64,
    pub omega_nv: f64,
    pub omega_nu: f64,
}

impl NvParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_nv > 0.0 && self.omega_nu > 0.0) {
            return Err(Error::InvalidParams(
                "NV and magnon frequencies must be positive".into(),
            ));
        }
        if !(self.g_nu.is_finite() && self.g_eff.is_finite()) {
            return Err(Error::InvalidParams("couplings must be finite".into()));
        }
        Ok(())
    }

    /// `λ = g_ν √N`, `η = g_eff`, `ω_0 = ω_NV / 2`, `ω_c = ω_ν`.
    pub fn to_model(&self, n_qubits: usize, n_max: usize) -> Result<ModelParams> {
        self.validate()?;
        ModelParams::new(
            self.omega_nu,
            self.omega_nv / 2.0,
            self.g_nu * (n_qubits as f64).sqrt(),
            self.g_eff,
            n_qubits,
            n_max,
        )
    }

    pub fn from_model(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let nv = Self {
            g_nu: p.lambda_scaled(),
            g_eff: p.eta,
            omega_nv: 2.0 * p.omega_0,
            omega_nu: p.omega_c,
        };
        nv.validate()?;
        Ok(nv)
    }
}
