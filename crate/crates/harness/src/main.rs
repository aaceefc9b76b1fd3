use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use proc_shadow::applications::{
    multitime_correlator_exact_input, transition_probability, unitarity_verdict, CorrelatorSpec,
    VerdictOptions,
};
use proc_shadow::complexity::{sample_budget, ComplexityQuery, Observable};
use proc_shadow::rng::{derive_seed, stream};
use proc_shadow::{
    acquire_process_shadow, compose_process_shadows, Bits, Density, Ensemble, Operator, PauliString,
};
use proc_shadow_harness::experiment::build_channel;
use proc_shadow_harness::records::header_for;
use proc_shadow_harness::{
    load_records, run_experiment, save_records, ChannelSpec, ExperimentConfig, HarnessError, Result,
};
use serde::Deserialize;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "proc-shadow",
    version,
    about = "Classical shadow tomography of quantum channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Record file (or, for `experiment`, directory for record files).
    #[arg(long)]
    records: Option<PathBuf>,
    /// TOML file supplying defaults for the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate acquisition through a channel and write a record file.
    Acquire {
        #[command(flatten)]
        common: Common,
        /// random-unitary, random-full-rank, identity, depolarizing(0.3), ...
        #[arg(long)]
        channel: Option<String>,
        #[arg(long)]
        n_qubits: Option<usize>,
        #[arg(long)]
        ensemble_in: Option<String>,
        #[arg(long)]
        ensemble_out: Option<String>,
        /// Number of records.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Print the trace-one Choi estimate of a record file as JSON.
    Reconstruct {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate Tr[E(rho) O], a transition probability, or Tr[E(rho A) B].
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Product input state, one of 0 1 + - r l m per qubit.
        #[arg(long)]
        input: Option<String>,
        /// Pauli string, or a bit string for a transition probability.
        #[arg(long)]
        observable: String,
        /// Pauli string inserted before the channel.
        #[arg(long)]
        early: Option<String>,
        #[arg(long)]
        groups: Option<usize>,
    },
    /// Compose two channel shadows and report Tr[(Y o X)(rho A) B].
    Compose {
        #[command(flatten)]
        common: Common,
        /// Records of the channel applied second.
        #[arg(long)]
        second: PathBuf,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        early: Option<String>,
        #[arg(long)]
        late: Option<String>,
    },
    /// Decide unitarity from the estimated Choi purity.
    VerifyUnitarity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        groups: Option<usize>,
        #[arg(long, default_value_t = 2000)]
        resamples: usize,
        /// Allow purity estimation beyond three qubits.
        #[arg(long)]
        allow_large: bool,
    },
    /// Sample-complexity calculator.
    Budget {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        n_qubits: Option<usize>,
        /// Pauli-string observable; repeatable.
        #[arg(long)]
        observable: Vec<String>,
        /// Product input state; repeatable.
        #[arg(long)]
        input: Vec<String>,
        #[arg(long)]
        ensemble_in: Option<String>,
        #[arg(long)]
        ensemble_out: Option<String>,
    },
    /// Run a convergence experiment described by a TOML config.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Optional defaults shared by the single-shot subcommands.
#[derive(Debug, Default, Deserialize)]
struct Defaults {
    channel: Option<String>,
    n_qubits: Option<usize>,
    ensemble_in: Option<String>,
    ensemble_out: Option<String>,
    m: Option<usize>,
    seed: Option<u64>,
    groups: Option<usize>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    input: Option<String>,
}

fn load_defaults(path: Option<&Path>) -> Result<Defaults> {
    match path {
        None => Ok(Defaults::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?;
            toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(e.to_string())
}

fn ensemble(flag: Option<String>, fallback: Option<String>) -> Result<Ensemble> {
    flag.or(fallback)
        .unwrap_or_else(|| "pauli".into())
        .parse()
        .map_err(config_err)
}

fn pauli(s: &str) -> Result<PauliString> {
    s.parse().map_err(config_err)
}

fn records_path(common: &Common) -> Result<&Path> {
    common
        .records
        .as_deref()
        .ok_or_else(|| HarnessError::Config("--records is required".into()))
}

fn input_state(spec: Option<String>, fallback: Option<String>, n: usize) -> Result<Operator> {
    let spec = spec.or(fallback).unwrap_or_else(|| "0".repeat(n));
    let rho = Density::product(&spec).map_err(config_err)?;
    if rho.n_qubits() != n {
        return Err(HarnessError::Config(format!(
            "input state {spec:?} is not on {n} qubits"
        )));
    }
    Ok(rho.into_operator())
}

fn operator_json(op: &Operator) -> serde_json::Value {
    let d = op.dim();
    let re: Vec<Vec<f64>> = (0..d)
        .map(|i| op.row(i).iter().map(|z| z.re).collect())
        .collect();
    let im: Vec<Vec<f64>> = (0..d)
        .map(|i| op.row(i).iter().map(|z| z.im).collect())
        .collect();
    json!({ "n_qubits": op.n_qubits(), "re": re, "im": im })
}

fn print(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("json"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Acquire {
            common,
            channel,
            n_qubits,
            ensemble_in,
            ensemble_out,
            m,
        } => {
            let d = load_defaults(common.config.as_deref())?;
            let spec: ChannelSpec = channel
                .or(d.channel)
                .unwrap_or_else(|| "identity".into())
                .parse()
                .map_err(config_err)?;
            let n = n_qubits.or(d.n_qubits).unwrap_or(1);
            let (ei, eo) = (
                ensemble(ensemble_in, d.ensemble_in)?,
                ensemble(ensemble_out, d.ensemble_out)?,
            );
            let m = m.or(d.m).unwrap_or(1000);
            let seed = common.seed.or(d.seed).unwrap_or(0);
            let path = records_path(&common)?;
            let ch = build_channel(spec, n, derive_seed(seed, &[0]))?;
            let ps =
                acquire_process_shadow(&ch, ei, eo, m, &mut stream(derive_seed(seed, &[1]), 0))?;
            save_records(path, &header_for(&ps, Some(seed), &spec.to_string()), &ps)?;
            print(
                json!({ "records": path, "count": ps.len(), "n_qubits": n, "channel": spec.to_string() }),
            );
        }
        Command::Reconstruct { common } => {
            let (_, ps) = load_records(records_path(&common)?)?;
            print(operator_json(ps.reconstruct_choi()?.as_operator()));
        }
        Command::Estimate {
            common,
            input,
            observable,
            early,
            groups,
        } => {
            let d = load_defaults(common.config.as_deref())?;
            let (_, ps) = load_records(records_path(&common)?)?;
            let n = ps.n_qubits();
            let k = groups.or(d.groups).unwrap_or(10);
            if observable.chars().all(|c| c == '0' || c == '1') {
                let i: Bits = input
                    .or(d.input)
                    .unwrap_or_else(|| "0".repeat(n))
                    .parse()
                    .map_err(config_err)?;
                let f: Bits = observable.parse().map_err(config_err)?;
                let est = transition_probability(&ps, &i, &f, k)?;
                print(json!({ "transition_probability": est.clipped, "raw": est.raw }));
                return Ok(());
            }
            let rho = input_state(input, d.input, n)?;
            let late = pauli(&observable)?;
            let a = match early {
                Some(a) => pauli(&a)?,
                None => PauliString::identity(n),
            };
            let spec = CorrelatorSpec::new(rho, a, late)?;
            let est = multitime_correlator_exact_input(&ps, &spec, k)?;
            print(json!({ "estimate": est.re, "imag": est.im, "groups": k, "records": ps.len() }));
        }
        Command::Compose {
            common,
            second,
            input,
            early,
            late,
        } => {
            let d = load_defaults(common.config.as_deref())?;
            let (_, first) = load_records(records_path(&common)?)?;
            let (_, second) = load_records(&second)?;
            let n = first.n_qubits();
            let eta = compose_process_shadows(&first, &second)?.materialize()?;
            let Some(late) = late else {
                print(operator_json(&eta));
                return Ok(());
            };
            let a = early
                .map(|a| pauli(&a))
                .transpose()?
                .unwrap_or_else(|| PauliString::identity(n));
            let spec = CorrelatorSpec::new(input_state(input, d.input, n)?, a, pauli(&late)?)?;
            let probe = spec
                .inserted_input()
                .transpose()
                .kron(&spec.op_late().to_operator());
            let est = eta.trace_product(&probe)? * (1usize << n) as f64;
            print(json!({ "estimate": est.re, "imag": est.im }));
        }
        Command::VerifyUnitarity {
            common,
            groups,
            resamples,
            allow_large,
        } => {
            let d = load_defaults(common.config.as_deref())?;
            let (_, ps) = load_records(records_path(&common)?)?;
            let opts = VerdictOptions {
                groups: groups.or(d.groups).unwrap_or(10),
                resamples,
                seed: common.seed.or(d.seed).unwrap_or(0),
                allow_large,
                ..VerdictOptions::default()
            };
            let r = unitarity_verdict(&ps, &opts)?;
            print(json!({
                "verdict": r.verdict.to_string(),
                "purity": r.purity,
                "interval": [r.interval.0, r.interval.1],
                "threshold": r.threshold,
                "max_purity": r.max_purity,
                "confidence": r.confidence,
            }));
        }
        Command::Budget {
            common,
            epsilon,
            delta,
            n_qubits,
            observable,
            input,
            ensemble_in,
            ensemble_out,
        } => {
            let d = load_defaults(common.config.as_deref())?;
            let n = n_qubits.or(d.n_qubits).unwrap_or(1);
            let observables = observable
                .iter()
                .map(|o| pauli(o).map(Observable::Pauli))
                .collect::<Result<Vec<_>>>()?;
            let inputs = input
                .into_iter()
                .map(|s| input_state(Some(s), None, n).map(|op| Observable::with_support(op, n)))
                .collect::<Result<Vec<_>>>()?;
            let q = ComplexityQuery {
                epsilon: epsilon.or(d.epsilon).unwrap_or(0.1),
                delta: delta.or(d.delta).unwrap_or(0.1),
                n_qubits: n,
                observables,
                input_states: inputs,
                ensemble_in: ensemble(ensemble_in, d.ensemble_in)?,
                ensemble_out: ensemble(ensemble_out, d.ensemble_out)?,
            };
            let a = sample_budget(&q).map_err(|e| match e {
                proc_shadow::ShadowError::Empty(_)
                | proc_shadow::ShadowError::DimensionMismatch { .. } => config_err(e),
                e => e.into(),
            })?;
            let pairs: Vec<_> = a
                .per_pair_f_values
                .iter()
                .map(|p| json!({ "input": p.input, "observable": p.observable, "f_in": p.f_in, "f_out": p.f_out }))
                .collect();
            let state = a.state_budget.map(|s| {
                json!({ "k": s.k, "n": s.n, "n_traceless": s.n_traceless, "norm_bound": s.norm_bound, "norm_bound_traceless": s.norm_bound_traceless })
            });
            print(json!({ "k": a.k, "n": a.n, "m": a.m, "pairs": pairs, "state_budget": state }));
        }
        Command::Experiment { common, out } => {
            let path = common
                .config
                .as_deref()
                .ok_or_else(|| HarnessError::Config("--config is required".into()))?;
            let mut cfg = ExperimentConfig::load(path)?;
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(dir) = common.records {
                cfg.save_records = true;
                cfg.records_dir = Some(dir);
            }
            let result = run_experiment(&cfg)?;
            let files = proc_shadow_harness::write_outputs(&cfg, &result, &cfg.output_dir)?;
            let summaries: Vec<_> = result
                .summaries
                .iter()
                .map(|s| json!({ "variant": s.variant, "mean_b": s.mean_b, "std_b": s.std_b, "trials": s.trials }))
                .collect();
            print(
                json!({ "experiment": cfg.experiment.name(), "output_dir": cfg.output_dir, "files": files, "exponents": summaries }),
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
