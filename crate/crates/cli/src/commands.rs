use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::Context;
use restraint_core::montecarlo::write_trials_csv;
use restraint_core::oracle::oracle_verdict;
use restraint_core::sweep::write_csv;
use restraint_core::{
    boundary_trace, classify, find_all_pbe_with_budget, pooling_exists, run_sweep,
    separating_exists, simulate_with_trials, DiscreteGame, Error, PbeCertificate, RegionRow,
    SimConfig, Verdict,
};
use serde::Serialize;

use crate::config::{CommandKind, Format, RunConfig};

pub fn run(config: &RunConfig) -> anyhow::Result<()> {
    match config.command {
        CommandKind::Classify => classify_cmd(config),
        CommandKind::Oracle => oracle_cmd(config),
        CommandKind::Sweep => sweep_cmd(config),
        CommandKind::Simulate => simulate_cmd(config),
    }
}

fn open_output(path: &str) -> anyhow::Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let file = File::create(path).with_context(|| format!("creating {path}"))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn write_json<T: Serialize>(path: &str, value: &T) -> anyhow::Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn required_m(config: &RunConfig) -> anyhow::Result<f64> {
    config.m.ok_or_else(|| {
        Error::Validation {
            constraint: "m provided".to_owned(),
        }
        .into()
    })
}

fn classify_cmd(config: &RunConfig) -> anyhow::Result<()> {
    let params = config.params.resolve()?;
    let m = required_m(config)?;
    let report = classify(config.spec, &params, m)?;
    match config.format() {
        Format::Json => write_json(&config.output, &report),
        Format::Csv => {
            let row = RegionRow::from_report(&params, &report);
            write_csv(&[row], open_output(&config.output)?)?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Verification {
    m: f64,
    closed_form_verdict: Verdict,
    oracle_verdict: Verdict,
}

#[derive(Serialize)]
struct OracleOutput {
    game: DiscreteGame,
    certificates: Vec<PbeCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Verification>,
}

/// Enumerates every weak PBE on the message grid. With `--m`, also checks
/// the closed-form verdicts at `m` against the oracle on `{0, m}`.
fn oracle_cmd(config: &RunConfig) -> anyhow::Result<()> {
    let params = config.params.resolve()?;
    let messages = match (&config.messages, config.m) {
        (Some(messages), _) => messages.clone(),
        (None, Some(0.0)) => vec![0.0],
        (None, Some(m)) => vec![0.0, m],
        (None, None) => {
            return Err(Error::Validation {
                constraint: "messages or m provided".to_owned(),
            }
            .into())
        }
    };
    let game = DiscreteGame::new(config.spec, params, messages)?;
    let certificates = find_all_pbe_with_budget(&game, config.budget)?;
    log::info!("oracle: {} certificates", certificates.len());

    let verification = match config.m {
        Some(m) => {
            let closed = Verdict {
                pooling: pooling_exists(config.spec, &params, m)?.holds,
                separating: separating_exists(config.spec, &params, m)?.holds,
            };
            let (oracle, two_point_certs) = oracle_verdict(config.spec, &params, m)?;
            if closed != oracle {
                return Err(Error::Discrepancy(vec![restraint_core::Discrepancy {
                    params,
                    m,
                    closed_form_verdict: closed,
                    oracle_verdict: oracle,
                    certificates: two_point_certs,
                }])
                .into());
            }
            Some(Verification {
                m,
                closed_form_verdict: closed,
                oracle_verdict: oracle,
            })
        }
        None => None,
    };

    match config.format() {
        Format::Json => write_json(
            &config.output,
            &OracleOutput {
                game,
                certificates,
                verification,
            },
        ),
        Format::Csv => write_certificates_csv(&game, &certificates, &config.output),
    }
}

fn write_certificates_csv(
    game: &DiscreteGame,
    certificates: &[PbeCertificate],
    path: &str,
) -> anyhow::Result<()> {
    let mut out = open_output(path)?;
    writeln!(
        out,
        "class,signal_restrained,signal_aggressive,fight_after,t2_restrained,t2_aggressive,posterior"
    )?;
    let join = |items: Vec<String>| items.join(";");
    for cert in certificates {
        let p = &cert.profile;
        let class = serde_json::to_value(cert.class)?;
        let action = |a: restraint_core::T2Action| match a {
            restraint_core::T2Action::Exploit => "exploit".to_owned(),
            restraint_core::T2Action::Restraint => "restraint".to_owned(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            class.as_str().unwrap_or_default(),
            game.messages[p.signal_of.restrained],
            game.messages[p.signal_of.aggressive],
            join(p.fight_after.iter().map(|f| f.to_string()).collect()),
            join(p.t2_action.iter().map(|t| action(t.restrained)).collect()),
            join(p.t2_action.iter().map(|t| action(t.aggressive)).collect()),
            join(
                cert.beliefs
                    .posterior
                    .iter()
                    .map(|q| q.to_string())
                    .collect()
            ),
        )?;
    }
    out.flush()?;
    Ok(())
}

fn sweep_cmd(config: &RunConfig) -> anyhow::Result<()> {
    let grid = config.grid.as_ref().ok_or_else(|| Error::Validation {
        constraint: "sweep grid provided via --config".to_owned(),
    })?;
    if config.boundary {
        let points = boundary_trace(grid)?;
        return match config.format() {
            Format::Json => write_json(&config.output, &points),
            Format::Csv => {
                let mut out = open_output(&config.output)?;
                let names: Vec<&str> = grid.axes.iter().map(|a| a.symbol.as_str()).collect();
                writeln!(out, "axis,{},{},from,to", names[0], names[1])?;
                for point in points {
                    let coords: Vec<String> = grid
                        .axes
                        .iter()
                        .map(|a| point.coordinates[&a.symbol].to_string())
                        .collect();
                    writeln!(
                        out,
                        "{},{},{},{}",
                        point.axis,
                        coords.join(","),
                        point.from,
                        point.to
                    )?;
                }
                out.flush()?;
                Ok(())
            }
        };
    }
    let rows = run_sweep(grid, config.oracle_fraction, config.seed)?;
    match config.format() {
        Format::Json => write_json(&config.output, &rows),
        Format::Csv => {
            write_csv(&rows, open_output(&config.output)?)?;
            Ok(())
        }
    }
}

fn simulate_cmd(config: &RunConfig) -> anyhow::Result<()> {
    let params = config.params.resolve()?;
    let m = required_m(config)?;
    let mut sim = SimConfig::pooling(config.spec, params, m, config.n_trials, config.seed);
    sim.drift_mode = config.drift_mode;
    sim.allow_degenerate_prior = config.allow_degenerate_prior;
    if let Some(profile) = &config.profile {
        sim.profile = profile.clone();
    }
    let (result, trials) = simulate_with_trials(&sim)?;
    if let Some(path) = &config.trials_csv {
        let file = File::create(path).with_context(|| format!("creating {path}"))?;
        write_trials_csv(&trials, BufWriter::new(file))?;
    }
    match config.format() {
        Format::Json => write_json(&config.output, &result),
        Format::Csv => {
            let mut out = open_output(&config.output)?;
            writeln!(
                out,
                "drift_mode,n_trials,preventive_conflict,exploit,restraint,mean_u_A,mean_u_B,standard_error_u_B"
            )?;
            let counts = result.outcome_counts;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                result.drift_mode.as_str(),
                result.n_trials,
                counts.preventive_conflict,
                counts.exploit,
                counts.restraint,
                result.mean_u_a,
                result.mean_u_b,
                result.standard_error_u_b
            )?;
            out.flush()?;
            Ok(())
        }
    }
}
