//! Run configuration: JSON file values, overridden by command-line flags.

use std::path::Path;

use anyhow::Context;
use clap::{Args, ValueEnum};
use restraint_core::{
    DriftMode, GridSpec, Mechanism, MechanismSpec, ModelParams, StrategyProfile, Symbol, Variant,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    #[default]
    Classify,
    Oracle,
    Sweep,
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismArg {
    TyingHands,
    Sunk,
    Installment,
    Reducible,
}

impl From<MechanismArg> for Mechanism {
    fn from(arg: MechanismArg) -> Self {
        match arg {
            MechanismArg::TyingHands => Mechanism::TyingHands,
            MechanismArg::Sunk => Mechanism::SunkCosts,
            MechanismArg::Installment => Mechanism::InstallmentCosts,
            MechanismArg::Reducible => Mechanism::ReducibleCosts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Base,
    Risk,
}

impl From<VariantArg> for Variant {
    fn from(arg: VariantArg) -> Self {
        match arg {
            VariantArg::Base => Variant::Base,
            VariantArg::Risk => Variant::Risk,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DriftArg {
    Literal,
    PriorWeighted,
    BestResponse,
}

impl From<DriftArg> for DriftMode {
    fn from(arg: DriftArg) -> Self {
        match arg {
            DriftArg::Literal => DriftMode::Literal,
            DriftArg::PriorWeighted => DriftMode::PriorWeighted,
            DriftArg::BestResponse => DriftMode::BestResponse,
        }
    }
}

/// Flags shared by every subcommand. Unset flags leave file values alone.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long, value_enum)]
    pub mechanism: Option<MechanismArg>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Cost of preventive conflict.
    #[arg(long)]
    pub c: Option<f64>,
    /// Aggressive type's gain from exploiting (V_D).
    #[arg(long)]
    pub vd: Option<f64>,
    /// State B's loss when exploited (V_B).
    #[arg(long)]
    pub vb: Option<f64>,
    /// Aggressive type's risk cost of restraint (risk variant).
    #[arg(long)]
    pub r: Option<f64>,
    /// Drift probability from restrained to aggressive.
    #[arg(long)]
    pub p: Option<f64>,
    /// Prior probability that State A is restrained.
    #[arg(long)]
    pub prior: Option<f64>,
    /// Signal level.
    #[arg(long)]
    pub m: Option<f64>,
    /// Comma-separated signal grid for `oracle`; must contain 0.
    #[arg(long, value_delimiter = ',')]
    pub messages: Option<Vec<f64>>,
    #[arg(long)]
    pub oracle_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, value_enum)]
    pub drift_mode: Option<DriftArg>,
    /// Allow prior = 0 or 1 in `simulate`.
    #[arg(long)]
    pub allow_degenerate_prior: bool,
    /// Per-trial CSV dump for `simulate`.
    #[arg(long)]
    pub trials_csv: Option<String>,
    /// Emit region boundary points instead of rows (`sweep`, two axes).
    #[arg(long)]
    pub boundary: bool,
    /// Profile budget for the oracle enumeration.
    #[arg(long)]
    pub budget: Option<u128>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<String>,
    /// Output path, `-` for standard output.
    #[arg(short = 'o', long = "output")]
    pub output: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,
}

/// Parameter bindings; any may be left unset until the command needs it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamBindings {
    pub c: Option<f64>,
    #[serde(rename = "V_D")]
    pub v_d: Option<f64>,
    #[serde(rename = "V_B")]
    pub v_b: Option<f64>,
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub prior: Option<f64>,
}

impl ParamBindings {
    pub fn resolve(&self) -> anyhow::Result<ModelParams> {
        let need = |value: Option<f64>, name: &str| {
            value.ok_or_else(|| restraint_core::Error::Validation {
                constraint: format!("{name} provided"),
            })
        };
        Ok(ModelParams {
            c: need(self.c, "c")?,
            v_d: need(self.v_d, "V_D")?,
            v_b: need(self.v_b, "V_B")?,
            r: self.r.unwrap_or(0.0),
            p: self.p.unwrap_or(0.0),
            prior: self.prior.unwrap_or(0.5),
        })
    }

    fn bound(&self) -> [(Symbol, Option<f64>); 6] {
        [
            (Symbol::C, self.c),
            (Symbol::VD, self.v_d),
            (Symbol::VB, self.v_b),
            (Symbol::R, self.r),
            (Symbol::P, self.p),
            (Symbol::Prior, self.prior),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: CommandKind,
    pub spec: MechanismSpec,
    pub params: ParamBindings,
    pub m: Option<f64>,
    pub messages: Option<Vec<f64>>,
    pub grid: Option<GridSpec>,
    pub oracle_fraction: f64,
    pub seed: u64,
    pub n_trials: u64,
    pub drift_mode: DriftMode,
    pub profile: Option<StrategyProfile>,
    pub allow_degenerate_prior: bool,
    pub budget: u128,
    pub boundary: bool,
    pub trials_csv: Option<String>,
    pub output: String,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: CommandKind::default(),
            spec: MechanismSpec::new(Mechanism::TyingHands, Variant::Base),
            params: ParamBindings::default(),
            m: None,
            messages: None,
            grid: None,
            oracle_fraction: restraint_core::DEFAULT_ORACLE_FRACTION,
            seed: 0,
            n_trials: 100_000,
            drift_mode: DriftMode::default(),
            profile: None,
            allow_degenerate_prior: false,
            budget: restraint_core::DEFAULT_PROFILE_BUDGET,
            boundary: false,
            trials_csv: None,
            output: "-".to_owned(),
            format: None,
            jobs: None,
        }
    }
}

impl RunConfig {
    /// Reads a config file. A bare grid object (one with `axes`) is taken as
    /// the sweep grid.
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| config_error(path, &e))?;
        if value.get("axes").is_some() {
            let grid: GridSpec =
                serde_json::from_value(value).map_err(|e| config_error(path, &e))?;
            return Ok(RunConfig {
                command: CommandKind::Sweep,
                spec: grid.mechanism,
                grid: Some(grid),
                ..RunConfig::default()
            });
        }
        serde_json::from_value(value).map_err(|e| config_error(path, &e))
    }

    /// File values (if any), then flags, then the subcommand.
    pub fn build(command: CommandKind, flags: &Flags) -> anyhow::Result<Self> {
        let mut config = match &flags.config {
            Some(path) => RunConfig::from_file(Path::new(path))?,
            None => RunConfig::default(),
        };
        config.command = command;
        config.apply(flags);
        Ok(config)
    }

    fn apply(&mut self, flags: &Flags) {
        if let Some(m) = flags.mechanism {
            self.spec.mechanism = m.into();
        }
        if let Some(v) = flags.variant {
            self.spec.variant = v.into();
        }
        let params = &mut self.params;
        for (slot, flag) in [
            (&mut params.c, flags.c),
            (&mut params.v_d, flags.vd),
            (&mut params.v_b, flags.vb),
            (&mut params.r, flags.r),
            (&mut params.p, flags.p),
            (&mut params.prior, flags.prior),
        ] {
            if flag.is_some() {
                *slot = flag;
            }
        }
        if flags.m.is_some() {
            self.m = flags.m;
        }
        if flags.messages.is_some() {
            self.messages = flags.messages.clone();
        }
        if let Some(f) = flags.oracle_fraction {
            self.oracle_fraction = f;
        }
        if let Some(s) = flags.seed {
            self.seed = s;
        }
        if let Some(n) = flags.trials {
            self.n_trials = n;
        }
        if let Some(d) = flags.drift_mode {
            self.drift_mode = d.into();
        }
        if let Some(b) = flags.budget {
            self.budget = b;
        }
        self.allow_degenerate_prior |= flags.allow_degenerate_prior;
        self.boundary |= flags.boundary;
        if flags.trials_csv.is_some() {
            self.trials_csv = flags.trials_csv.clone();
        }
        if let Some(o) = &flags.output {
            self.output = o.clone();
        }
        if flags.format.is_some() {
            self.format = flags.format;
        }
        if flags.jobs.is_some() {
            self.jobs = flags.jobs;
        }

        // Sweep: flags pin the mechanism and fix non-axis symbols.
        if let Some(grid) = &mut self.grid {
            if flags.mechanism.is_some() || flags.variant.is_some() {
                grid.mechanism = self.spec;
            }
            let mut bound = self.params.bound().to_vec();
            bound.push((Symbol::M, self.m));
            for (symbol, value) in bound {
                let on_axis = grid.axes.iter().any(|a| a.symbol == symbol);
                if let (Some(v), false) = (value, on_axis) {
                    grid.fixed.insert(symbol, v);
                }
            }
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            CommandKind::Sweep => Format::Csv,
            _ => Format::Json,
        })
    }
}

fn config_error(path: &Path, err: &serde_json::Error) -> anyhow::Error {
    restraint_core::Error::Validation {
        constraint: format!("config {} parses: {err}", path.display()),
    }
    .into()
}
