//! Convergence experiments and their output tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use proc_shadow::applications::{
    multitime_correlator_exact_input, unitarity_verdict, CorrelatorSpec, VerdictOptions,
};
use proc_shadow::rng::{derive_seed, stream};
use proc_shadow::zoo::{random_full_rank_channel, random_unitary_channel};
use proc_shadow::{
    acquire_process_shadow, acquire_state_shadow, apply_process_to_state_shadow,
    compose_process_shadows, weight_sign_statistics, Density, Ensemble, KrausChannel, Operator,
    Pauli, PauliString, Shadow,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ChannelSpec, ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::fit::{fit_power_law, PowerLawFit};
use crate::records::{header_for, write_records};

/// Seed coordinates inside a trial.
mod slot {
    pub const CHANNEL: u64 = 0;
    pub const SECOND_CHANNEL: u64 = 1;
    pub const SHADOW: u64 = 2;
    pub const SECOND_SHADOW: u64 = 3;
    pub const STATE_SHADOW: u64 = 4;
    pub const INPUT_STATE: u64 = 5;
    pub const BOOTSTRAP: u64 = 6;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub trial: usize,
    pub m: usize,
    pub variant: &'static str,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub trial: usize,
    pub variant: &'static str,
    pub fit: PowerLawFit,
}

/// Per-variant exponent statistics over trials, plus a fit of the
/// root-mean-square error across trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSummary {
    pub variant: &'static str,
    pub trials: usize,
    pub mean_b: f64,
    pub std_b: f64,
    pub rms_fit: Option<PowerLawFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignRow {
    pub n: usize,
    pub samples: usize,
    pub p_negative: f64,
    pub p_negative_exact: f64,
    pub binomial_stderr: f64,
    pub mean_log_abs: f64,
    pub mean_log_abs_exact: f64,
    pub std_log_abs: f64,
    pub std_log_abs_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitarityRow {
    pub trial: usize,
    pub m: usize,
    pub purity: f64,
    pub exact: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutput {
    pub errors: Vec<ErrorRow>,
    pub fits: Vec<FitRow>,
    pub summaries: Vec<ExponentSummary>,
    pub sign_rows: Vec<SignRow>,
    pub unitarity_rows: Vec<UnitarityRow>,
    /// File name and contents of every saved record file.
    pub record_files: Vec<(String, String)>,
    pub trial_seeds: Vec<u64>,
}

impl ExperimentOutput {
    pub fn summary(&self, variant: &str) -> Option<&ExponentSummary> {
        self.summaries.iter().find(|s| s.variant == variant)
    }

    /// Mean error over trials at each grid point, in grid order.
    pub fn mean_errors(&self, variant: &str) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for r in self.errors.iter().filter(|r| r.variant == variant) {
            let e = acc.entry(r.m).or_insert((0.0, 0));
            e.0 += r.error;
            e.1 += 1;
        }
        acc.into_iter()
            .map(|(m, (s, c))| (m, s / c as f64))
            .collect()
    }

    fn rms_errors(&self, variant: &str) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for r in self.errors.iter().filter(|r| r.variant == variant) {
            let e = acc.entry(r.m).or_insert((0.0, 0));
            e.0 += r.error * r.error;
            e.1 += 1;
        }
        acc.into_iter()
            .map(|(m, (s, c))| (m, (s / c as f64).sqrt()))
            .collect()
    }
}

pub fn build_channel(spec: ChannelSpec, n_qubits: usize, seed: u64) -> Result<KrausChannel> {
    let mut rng = stream(seed, 0);
    Ok(match spec {
        ChannelSpec::RandomUnitary => random_unitary_channel(n_qubits, &mut rng)?,
        ChannelSpec::RandomFullRank => random_full_rank_channel(n_qubits, &mut rng)?,
        ChannelSpec::Named(c) => c.build(n_qubits)?,
    })
}

/// `|+><+| (x) I/2^(n-1)` with `X` on qubit 0 before and after the channel.
pub fn default_correlator(n_qubits: usize) -> Result<CorrelatorSpec<f64>> {
    let state = format!("+{}", "m".repeat(n_qubits - 1));
    let rho = Density::product(&state)?.into_operator();
    let x0 = PauliString::single(n_qubits, 0, Pauli::X);
    Ok(CorrelatorSpec::new(rho, x0.clone(), x0)?)
}

fn choi_error(ps: &Shadow, exact: &Operator) -> Result<f64> {
    Ok((ps.reconstruct_choi()?.as_operator() - exact).operator_norm())
}

struct TrialOutput {
    errors: Vec<ErrorRow>,
    unitarity: Vec<UnitarityRow>,
    records: Vec<(String, String)>,
}

struct Trial<'a> {
    cfg: &'a ExperimentConfig,
    index: usize,
    seed: u64,
    ensembles: (Ensemble, Ensemble),
}

impl Trial<'_> {
    fn seed(&self, slot: u64) -> u64 {
        derive_seed(self.seed, &[slot])
    }

    fn channel(&self, slot: u64) -> Result<KrausChannel> {
        build_channel(self.cfg.channel, self.cfg.n_qubits, self.seed(slot))
    }

    fn shadow(&self, ch: &KrausChannel, slot: u64) -> Result<Shadow> {
        let (ei, eo) = self.ensembles;
        Ok(acquire_process_shadow(
            ch,
            ei,
            eo,
            self.cfg.max_m(),
            &mut stream(self.seed(slot), 0),
        )?)
    }

    fn keep(
        &self,
        out: &mut TrialOutput,
        ps: &Shadow,
        channel_slot: u64,
        shadow_slot: u64,
        suffix: &str,
    ) {
        if !self.cfg.save_records {
            return;
        }
        let description = format!("{} (seed {})", self.cfg.channel, self.seed(channel_slot));
        let mut buf = Vec::new();
        write_records(
            &mut buf,
            &header_for(ps, Some(self.seed(shadow_slot)), &description),
            ps,
        )
        .expect("in-memory write");
        let name = format!("trial-{:03}{suffix}.jsonl", self.index);
        out.records
            .push((name, String::from_utf8(buf).expect("records are utf-8")));
    }

    fn row(&self, m: usize, variant: &'static str, error: f64) -> ErrorRow {
        ErrorRow {
            trial: self.index,
            m,
            variant,
            error,
        }
    }

    fn run(&self) -> Result<TrialOutput> {
        let cfg = self.cfg;
        let n = cfg.n_qubits;
        let mut out = TrialOutput {
            errors: Vec::new(),
            unitarity: Vec::new(),
            records: Vec::new(),
        };
        let ch = self.channel(slot::CHANNEL)?;
        let ps = self.shadow(&ch, slot::SHADOW)?;
        self.keep(&mut out, &ps, slot::CHANNEL, slot::SHADOW, "");
        match cfg.experiment {
            ExperimentKind::ChoiConvergence => {
                let exact = ch.choi().normalize().into_operator();
                for &m in &cfg.grid {
                    out.errors
                        .push(self.row(m, "choi", choi_error(&ps.prefix(m), &exact)?));
                }
            }
            ExperimentKind::OutputStateConvergence => {
                let rho = Density::random_hilbert_schmidt(
                    n,
                    &mut stream(self.seed(slot::INPUT_STATE), 0),
                );
                let exact = ch.apply(rho.as_operator())?;
                let pauli = self.ensembles == (Ensemble::PauliProduct, Ensemble::PauliProduct);
                let ss = if pauli {
                    let mut rng = stream(self.seed(slot::STATE_SHADOW), 0);
                    Some(acquire_state_shadow(
                        &rho,
                        Ensemble::PauliProduct,
                        cfg.max_m(),
                        &mut rng,
                    )?)
                } else {
                    None
                };
                for &m in &cfg.grid {
                    let prefix = ps.prefix(m);
                    let est = prefix.reconstruct_choi()?.apply(rho.as_operator())?;
                    out.errors
                        .push(self.row(m, "exact-input", (&est - &exact).operator_norm()));
                    if let Some(ss) = &ss {
                        let est =
                            apply_process_to_state_shadow(&prefix, &ss.prefix(m))?.materialize()?;
                        out.errors.push(self.row(
                            m,
                            "shadow-input",
                            (&est - &exact).operator_norm(),
                        ));
                    }
                }
            }
            ExperimentKind::CorrelatorConvergence => {
                let spec = default_correlator(n)?;
                let exact = spec.exact(&ch)?;
                for &m in &cfg.grid {
                    let est = multitime_correlator_exact_input(&ps.prefix(m), &spec, cfg.groups)?;
                    out.errors
                        .push(self.row(m, "correlator", (est - exact).norm()));
                }
            }
            ExperimentKind::ComposedCorrelator => {
                let second = self.channel(slot::SECOND_CHANNEL)?;
                let ps2 = self.shadow(&second, slot::SECOND_SHADOW)?;
                self.keep(
                    &mut out,
                    &ps2,
                    slot::SECOND_CHANNEL,
                    slot::SECOND_SHADOW,
                    "-second",
                );
                let spec = default_correlator(n)?;
                let exact = spec.exact(&ch.then(&second)?)?;
                let probe = spec
                    .inserted_input()
                    .transpose()
                    .kron(&spec.op_late().to_operator());
                let d = (1usize << n) as f64;
                for &m in &cfg.grid {
                    let eta =
                        compose_process_shadows(&ps.prefix(m), &ps2.prefix(m))?.materialize()?;
                    let est = eta.trace_product(&probe)? * d;
                    out.errors
                        .push(self.row(m, "composed", (est - exact).norm()));
                }
            }
            ExperimentKind::Unitarity => {
                let eta = ch.choi().into_operator();
                let exact = eta.trace_product(&eta)?.re;
                let opts = VerdictOptions {
                    groups: cfg.groups,
                    resamples: cfg.bootstrap_resamples,
                    seed: self.seed(slot::BOOTSTRAP),
                    ..VerdictOptions::default()
                };
                for &m in &cfg.grid {
                    let report = unitarity_verdict(&ps.prefix(m), &opts)?;
                    out.errors
                        .push(self.row(m, "purity", (report.purity - exact).abs()));
                    out.unitarity.push(UnitarityRow {
                        trial: self.index,
                        m,
                        purity: report.purity,
                        exact,
                        ci_low: report.interval.0,
                        ci_high: report.interval.1,
                        verdict: report.verdict.to_string(),
                    });
                }
            }
            ExperimentKind::SignStatistics => unreachable!("handled without trials"),
        }
        Ok(out)
    }
}

fn check_feasible(cfg: &ExperimentConfig, ensembles: (Ensemble, Ensemble)) -> Result<()> {
    let needs_pauli = matches!(cfg.experiment, ExperimentKind::ComposedCorrelator);
    if needs_pauli && ensembles != (Ensemble::PauliProduct, Ensemble::PauliProduct) {
        return Err(HarnessError::Config(format!(
            "{} needs Pauli frames on both sides",
            cfg.experiment.name()
        )));
    }
    Ok(())
}

fn sign_statistics(cfg: &ExperimentConfig) -> Vec<SignRow> {
    (1..=cfg.max_n)
        .into_par_iter()
        .map(|n| {
            let s = weight_sign_statistics(
                n,
                cfg.samples,
                &mut stream(derive_seed(cfg.seed, &[n as u64]), 0),
            );
            let p = s.p_negative_exact;
            SignRow {
                n,
                samples: s.samples,
                p_negative: s.p_negative,
                p_negative_exact: p,
                binomial_stderr: (p * (1.0 - p) / s.samples as f64).sqrt(),
                mean_log_abs: s.mean_log_abs,
                mean_log_abs_exact: s.mean_log_abs_exact,
                std_log_abs: s.std_log_abs,
                std_log_abs_exact: s.std_log_abs_exact,
            }
        })
        .collect()
}

fn summarize(out: &mut ExperimentOutput) {
    let mut variants: Vec<&'static str> = out.errors.iter().map(|r| r.variant).collect();
    variants.sort_unstable();
    variants.dedup();
    let trials = out.trial_seeds.len();
    for variant in variants {
        let mut bs = Vec::new();
        for t in 0..trials {
            let (ms, errs): (Vec<f64>, Vec<f64>) = out
                .errors
                .iter()
                .filter(|r| r.trial == t && r.variant == variant)
                .map(|r| (r.m as f64, r.error))
                .unzip();
            if let Ok(fit) = fit_power_law(&ms, &errs) {
                bs.push(fit.b);
                out.fits.push(FitRow {
                    trial: t,
                    variant,
                    fit,
                });
            }
        }
        let (ms, errs): (Vec<f64>, Vec<f64>) = out
            .rms_errors(variant)
            .into_iter()
            .map(|(m, e)| (m as f64, e))
            .unzip();
        let mean_b = bs.iter().sum::<f64>() / bs.len().max(1) as f64;
        let std_b = if bs.len() > 1 {
            (bs.iter().map(|b| (b - mean_b).powi(2)).sum::<f64>() / (bs.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        out.summaries.push(ExponentSummary {
            variant,
            trials: bs.len(),
            mean_b,
            std_b,
            rms_fit: fit_power_law(&ms, &errs).ok(),
        });
    }
}

/// Runs an experiment in memory. Trials run in parallel, each from seeds
/// derived from the master seed and its index, so the output does not
/// depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if cfg.experiment == ExperimentKind::SignStatistics {
        return Ok(ExperimentOutput {
            sign_rows: sign_statistics(cfg),
            ..Default::default()
        });
    }
    let ensembles = cfg.ensembles()?;
    check_feasible(cfg, ensembles)?;
    let seeds: Vec<u64> = (0..cfg.trials)
        .map(|t| derive_seed(cfg.seed, &[t as u64]))
        .collect();
    let trials: Vec<TrialOutput> = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| {
            Trial {
                cfg,
                index,
                seed,
                ensembles,
            }
            .run()
        })
        .collect::<Result<_>>()?;
    let mut out = ExperimentOutput {
        trial_seeds: seeds,
        ..Default::default()
    };
    for t in trials {
        out.errors.extend(t.errors);
        out.unitarity_rows.extend(t.unitarity);
        out.record_files.extend(t.records);
    }
    summarize(&mut out);
    Ok(out)
}

fn csv_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:e}")
    }
}

pub fn errors_csv(out: &ExperimentOutput) -> String {
    let mut s = String::from("trial,m,variant,error\n");
    for r in &out.errors {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.trial,
            r.m,
            r.variant,
            csv_float(r.error)
        );
    }
    s
}

pub fn fits_csv(out: &ExperimentOutput) -> String {
    let mut s = String::from("scope,variant,b,intercept,r2,stderr\n");
    let mut line = |scope: String, variant: &str, f: &PowerLawFit| {
        let _ = writeln!(
            s,
            "{scope},{variant},{},{},{},{}",
            csv_float(f.b),
            csv_float(f.intercept),
            csv_float(f.r2),
            csv_float(f.stderr)
        );
    };
    for r in &out.fits {
        line(format!("trial-{}", r.trial), r.variant, &r.fit);
    }
    for summary in &out.summaries {
        if let Some(f) = &summary.rms_fit {
            line("rms".into(), summary.variant, f);
        }
    }
    s
}

pub fn summary_csv(out: &ExperimentOutput) -> String {
    let mut s = String::from("variant,trials,mean_b,std_b\n");
    for r in &out.summaries {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.variant,
            r.trials,
            csv_float(r.mean_b),
            csv_float(r.std_b)
        );
    }
    s
}

pub fn sign_csv(out: &ExperimentOutput) -> String {
    let mut s = String::from(
        "n,samples,p_negative,p_negative_exact,binomial_stderr,mean_log_abs,mean_log_abs_exact,std_log_abs,std_log_abs_exact\n",
    );
    for r in &out.sign_rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.samples,
            csv_float(r.p_negative),
            csv_float(r.p_negative_exact),
            csv_float(r.binomial_stderr),
            csv_float(r.mean_log_abs),
            csv_float(r.mean_log_abs_exact),
            csv_float(r.std_log_abs),
            csv_float(r.std_log_abs_exact)
        );
    }
    s
}

pub fn unitarity_csv(out: &ExperimentOutput) -> String {
    let mut s = String::from("trial,m,purity,exact,ci_low,ci_high,verdict\n");
    for r in &out.unitarity_rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.trial,
            r.m,
            csv_float(r.purity),
            csv_float(r.exact),
            csv_float(r.ci_low),
            csv_float(r.ci_high),
            r.verdict
        );
    }
    s
}

/// `m mean_error rms_error` columns for gnuplot, one file per variant.
pub fn gnuplot_tables(out: &ExperimentOutput) -> Vec<(String, String)> {
    out.summaries
        .iter()
        .map(|summary| {
            let mut s = format!("# {} m mean_error rms_error\n", summary.variant);
            for ((m, mean), (_, rms)) in out
                .mean_errors(summary.variant)
                .into_iter()
                .zip(out.rms_errors(summary.variant))
            {
                let _ = writeln!(s, "{m} {} {}", csv_float(mean), csv_float(rms));
            }
            (format!("{}.dat", summary.variant), s)
        })
        .collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    trial_seeds: &'a [u64],
    files: Vec<String>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

/// Writes all tables, the manifest and any record files under `dir`;
/// returns the relative names of the files written.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    out: &ExperimentOutput,
    dir: &Path,
) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut files: Vec<(String, String)> = Vec::new();
    if cfg.experiment == ExperimentKind::SignStatistics {
        files.push(("sign_statistics.csv".into(), sign_csv(out)));
    } else {
        files.push(("errors.csv".into(), errors_csv(out)));
        files.push(("fits.csv".into(), fits_csv(out)));
        files.push(("summary.csv".into(), summary_csv(out)));
        if !out.unitarity_rows.is_empty() {
            files.push(("unitarity.csv".into(), unitarity_csv(out)));
        }
        if cfg.gnuplot {
            files.extend(gnuplot_tables(out));
        }
    }
    for (name, contents) in &files {
        write_file(&dir.join(name), contents)?;
    }
    let mut names: Vec<String> = files.into_iter().map(|(n, _)| n).collect();
    if !out.record_files.is_empty() {
        let records = cfg
            .records_dir
            .clone()
            .unwrap_or_else(|| dir.join("records"));
        fs::create_dir_all(&records).map_err(|e| HarnessError::io(&records, e))?;
        for (name, contents) in &out.record_files {
            let path = records.join(name);
            write_file(&path, contents)?;
            names.push(
                path.strip_prefix(dir)
                    .unwrap_or(&path)
                    .display()
                    .to_string(),
            );
        }
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        trial_seeds: &out.trial_seeds,
        files: names.clone(),
    };
    let json =
        serde_json::to_string_pretty(&manifest).map_err(|e| HarnessError::Other(e.to_string()))?;
    write_file(&dir.join("manifest.json"), &(json + "\n"))?;
    names.push("manifest.json".into());
    Ok(names)
}
