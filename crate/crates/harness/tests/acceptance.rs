//! One PASS/FAIL line per acceptance criterion; exits non-zero on failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use proc_shadow::algebra::pair_weight;
use proc_shadow::channel::{apply_channel, channel_of_choi, choi_of_channel};
use proc_shadow::complexity::{
    s_operator, sample_budget, verify_lemma1, ComplexityQuery, Observable,
};
use proc_shadow::ensembles::Axis;
use proc_shadow::process_shadows::verify_bin_independence;
use proc_shadow::rng::stream;
use proc_shadow::state_shadows::{exhaustive_shadow_mean, tau};
use proc_shadow::zoo::{random_full_rank_channel, random_unitary_channel};
use proc_shadow::{weight_sign_statistics, Density, Ensemble, Operator, Pauli, PauliString};
use proc_shadow_harness::{
    run_experiment, write_outputs, ChannelSpec, ExperimentConfig, ExperimentKind, Result,
};

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

fn inverse_map_exactness() -> Outcome {
    let mut rng = stream(101, 0);
    let mut worst = 0f64;
    for ensemble in [Ensemble::PauliProduct, Ensemble::Clifford] {
        for _ in 0..20 {
            let rho = Density::random_hilbert_schmidt(1, &mut rng);
            let mean = exhaustive_shadow_mean(rho.as_operator(), ensemble)?;
            worst = worst.max(mean.max_abs_diff(rho.as_operator()));
        }
    }
    Ok((
        worst < 1e-12,
        format!("max deviation {worst:.2e} over 40 states"),
    ))
}

fn choi_round_trip() -> Outcome {
    let mut rng = stream(102, 0);
    let mut worst = 0f64;
    for i in 0..50 {
        let n = 1 + i % 2;
        let ch = if i % 4 < 2 {
            random_unitary_channel(n, &mut rng)?
        } else {
            random_full_rank_channel(n, &mut rng)?
        };
        let rho = Density::random_hilbert_schmidt(n, &mut rng);
        let via = channel_of_choi(&choi_of_channel(&ch), rho.as_operator())?;
        worst = worst.max(via.max_abs_diff(&apply_channel(&ch, rho.as_operator())?));
    }
    Ok((
        worst < 1e-9,
        format!("max deviation {worst:.2e} over 50 channels"),
    ))
}

fn experiment(
    kind: ExperimentKind,
    channel: ChannelSpec,
    n: usize,
    trials: usize,
    seed: u64,
) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.channel = channel;
    cfg.n_qubits = n;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg
}

fn in_band(b: f64) -> bool {
    (0.4..=0.6).contains(&b)
}

fn choi_convergence() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (channel, seed) in [
        (ChannelSpec::RandomUnitary, 103),
        (ChannelSpec::RandomFullRank, 104),
    ] {
        let out = run_experiment(&experiment(
            ExperimentKind::ChoiConvergence,
            channel,
            2,
            10,
            seed,
        ))?;
        let s = out.summary("choi").expect("choi summary");
        ok &= in_band(s.mean_b) && s.trials == 10;
        parts.push(format!(
            "{channel}: mean b = {:.3} +- {:.3}",
            s.mean_b, s.std_b
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn output_state_convergence() -> Outcome {
    let out = run_experiment(&experiment(
        ExperimentKind::OutputStateConvergence,
        ChannelSpec::RandomUnitary,
        2,
        10,
        105,
    ))?;
    let exact = out.summary("exact-input").expect("exact-input summary");
    let shadow = out.summary("shadow-input").expect("shadow-input summary");
    let errs = out.mean_errors("shadow-input");
    let shadow_converges = errs.last().expect("grid").1 < errs[0].1;
    Ok((
        in_band(exact.mean_b) && shadow_converges,
        format!(
            "exact input b = {:.3} +- {:.3}; shadow input b = {:.3} +- {:.3}, mean error {:.3} -> {:.4}",
            exact.mean_b,
            exact.std_b,
            shadow.mean_b,
            shadow.std_b,
            errs[0].1,
            errs.last().expect("grid").1
        ),
    ))
}

fn correlator_convergence() -> Outcome {
    let single = run_experiment(&experiment(
        ExperimentKind::CorrelatorConvergence,
        ChannelSpec::RandomUnitary,
        2,
        10,
        106,
    ))?;
    let s = single.summary("correlator").expect("correlator summary");
    let rms_b = s.rms_fit.map(|f| f.b).unwrap_or(f64::NAN);
    let composed = run_experiment(&experiment(
        ExperimentKind::ComposedCorrelator,
        ChannelSpec::RandomUnitary,
        2,
        10,
        107,
    ))?;
    let means = composed.mean_errors("composed");
    let monotone = means.windows(2).all(|w| w[1].1 < w[0].1);
    let trace: Vec<String> = means.iter().map(|(_, e)| format!("{e:.4}")).collect();
    Ok((
        in_band(rms_b) && monotone,
        format!(
            "single channel rms-error b = {rms_b:.3} (per-trial mean {:.3}); composed mean error {}",
            s.mean_b,
            trace.join(" > ")
        ),
    ))
}

fn weights_table() -> Outcome {
    let mut worst = 0f64;
    for mu in Axis::ALL {
        for b in [false, true] {
            for mu_p in Axis::ALL {
                for b_p in [false, true] {
                    let dense = tau::<f64>(mu, b)
                        .transpose()
                        .trace_product(&tau(mu_p, b_p))?
                        .re
                        / 2.0;
                    worst = worst.max((dense - pair_weight(mu, b, mu_p, b_p)).abs());
                }
            }
        }
    }
    let table = [
        pair_weight(Axis::Z, false, Axis::Z, false),
        pair_weight(Axis::X, false, Axis::X, true),
        pair_weight(Axis::Y, false, Axis::Y, false),
        pair_weight(Axis::Y, false, Axis::Y, true),
        pair_weight(Axis::X, true, Axis::Z, false),
    ];
    let ok = worst < 1e-12 && table == [2.5, -2.0, -2.0, 2.5, 0.25];
    Ok((
        ok,
        format!("36 cases within {worst:.1e}; five-case table {table:?}"),
    ))
}

fn sign_statistics() -> Outcome {
    let mut worst = 0f64;
    for n in 1..=10 {
        let s = weight_sign_statistics(n, 100_000, &mut stream(108, n as u64));
        let p = s.p_negative_exact;
        let se = (p * (1.0 - p) / s.samples as f64).sqrt();
        worst = worst.max((s.p_negative - p).abs() / se);
    }
    Ok((
        worst <= 3.0,
        format!("largest deviation {worst:.2} standard errors for N = 1..10"),
    ))
}

fn appendix_a() -> Outcome {
    let mut rng = stream(109, 0);
    let (mut norm, mut pauli) = (0f64, 0f64);
    let mut ok = true;
    for _ in 0..10 {
        let ch = random_full_rank_channel::<f64, _>(2, &mut rng)?;
        let r = verify_bin_independence(&ch, 100, &mut rng)?;
        ok &= r.passed();
        norm = norm.max(r.max_normalization_deviation);
        pauli = pauli.max(r.max_input_pauli_expectation);
    }
    Ok((
        ok,
        format!("normalization deviation {norm:.1e}, input Pauli expectation {pauli:.1e}"),
    ))
}

fn lemma() -> Outcome {
    let r = verify_lemma1(100, &mut stream(110, 0))?;
    Ok((
        r.passed(1e-10, 1e-9),
        format!(
            "3-design residual {:.1e}, min eigenvalue of 2S(O) - L {:.3}",
            r.max_identity_residual, r.min_gap_eigenvalue
        ),
    ))
}

fn budget() -> Outcome {
    let q = ComplexityQuery {
        epsilon: 0.1,
        delta: 0.1,
        n_qubits: 1,
        observables: vec![Observable::Pauli(PauliString::single(1, 0, Pauli::Z))],
        input_states: vec![Observable::with_support(Operator::basis_projector(1, 0), 1)],
        ensemble_in: Ensemble::PauliProduct,
        ensemble_out: Ensemble::PauliProduct,
    };
    let a = sample_budget(&q)?;
    let mut rng = stream(111, 0);
    let worst = (0..100)
        .map(|i| {
            s_operator(Density::random_hilbert_schmidt(1 + i % 3, &mut rng).as_operator())
                .operator_norm()
        })
        .fold(0f64, f64::max);
    Ok((
        a.k == 6 && a.n == 217_600 && worst <= 14.0,
        format!("K = {}, N = {}; max ||S(rho)|| = {worst:.3}", a.k, a.n),
    ))
}

fn unitarity() -> Outcome {
    let mut cfg = experiment(
        ExperimentKind::Unitarity,
        ChannelSpec::RandomUnitary,
        1,
        5,
        112,
    );
    cfg.grid = vec![100_000];
    let unitary = run_experiment(&cfg)?;
    cfg.channel = "depolarizing(1)".parse()?;
    cfg.trials = 1;
    let depolarized = run_experiment(&cfg)?;
    let ok_u = unitary
        .unitarity_rows
        .iter()
        .all(|r| (r.purity - 4.0).abs() < 0.5 && r.verdict == "unitary");
    let d = &depolarized.unitarity_rows[0];
    let ok_d = (d.purity - 1.0).abs() < 0.5 && d.verdict == "nonunitary";
    let purities: Vec<String> = unitary
        .unitarity_rows
        .iter()
        .map(|r| format!("{:.3}", r.purity))
        .collect();
    Ok((
        ok_u && ok_d,
        format!(
            "unitary purities [{}]; depolarizing(1) purity {:.3} ({})",
            purities.join(", "),
            d.purity,
            d.verdict
        ),
    ))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("readable dir") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let name = path
                    .strip_prefix(dir)
                    .expect("inside")
                    .display()
                    .to_string();
                files.insert(name, fs::read(&path).expect("readable file"));
            }
        }
    }
    files
}

fn determinism() -> Outcome {
    let tmp =
        tempfile::tempdir().map_err(|e| proc_shadow_harness::HarnessError::io("tempdir", e))?;
    let mut checked = 0;
    let mut identical = true;
    let kinds = [
        (ExperimentKind::ChoiConvergence, "clifford"),
        (ExperimentKind::OutputStateConvergence, "pauli"),
        (ExperimentKind::CorrelatorConvergence, "pauli"),
        (ExperimentKind::ComposedCorrelator, "pauli"),
        (ExperimentKind::Unitarity, "pauli"),
        (ExperimentKind::SignStatistics, "pauli"),
    ];
    for (kind, ensemble) in kinds {
        let mut cfg = experiment(kind, ChannelSpec::RandomFullRank, 1, 3, 113);
        cfg.ensemble_in = ensemble.into();
        cfg.ensemble_out = ensemble.into();
        cfg.grid = vec![100, 1000];
        cfg.samples = 5000;
        cfg.save_records = true;
        cfg.gnuplot = true;
        cfg.output_dir = tmp.path().join(kind.name());
        let mut runs = Vec::new();
        for _ in 0..2 {
            let _ = fs::remove_dir_all(&cfg.output_dir);
            let out = run_experiment(&cfg)?;
            write_outputs(&cfg, &out, &cfg.output_dir)?;
            runs.push(snapshot(&cfg.output_dir));
        }
        checked += runs[0].len();
        identical &= !runs[0].is_empty() && runs[0] == runs[1];
    }
    Ok((
        identical,
        format!("{checked} files byte-identical across repeated runs of 6 experiments"),
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("inverse-map exactness", inverse_map_exactness),
        ("Choi round trip", choi_round_trip),
        ("Choi convergence", choi_convergence),
        ("output-state convergence", output_state_convergence),
        ("correlator convergence", correlator_convergence),
        ("weights table", weights_table),
        ("sign statistics", sign_statistics),
        ("uniform-input checks", appendix_a),
        ("shadow-norm lemma", lemma),
        ("sample-complexity calculator", budget),
        ("unitarity verdict", unitarity),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} ({name}): {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
