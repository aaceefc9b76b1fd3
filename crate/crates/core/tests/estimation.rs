use proc_shadow::applications::{multitime_correlator_exact_input, CorrelatorSpec};
use proc_shadow::complexity::{f_value, variance_proxy, Observable};
use proc_shadow::process_shadows::{acquire_process_shadow, verify_bin_independence};
use proc_shadow::rng::stream;
use proc_shadow::stats::variance;
use proc_shadow::zoo::{random_full_rank_channel, random_unitary_channel};
use proc_shadow::{
    compose_process_shadows, named_channel, Channel, DensityMatrix, Ensemble, NamedChannel, Pauli,
    PauliString,
};

const P: Ensemble = Ensemble::PauliProduct;
const C: Ensemble = Ensemble::Clifford;

fn choi_error(ch: &Channel<f64>, ei: Ensemble, eo: Ensemble, m: usize, seed: u64) -> f64 {
    let ps = acquire_process_shadow(ch, ei, eo, m, &mut stream(seed, 0)).unwrap();
    let est = ps.reconstruct_choi().unwrap();
    (est.as_operator() - ch.choi().normalize().as_operator()).operator_norm()
}

#[test]
fn choi_error_shrinks_like_inverse_square_root() {
    let ch = random_unitary_channel::<f64, _>(1, &mut stream(11, 0)).unwrap();
    for (ei, eo) in [(P, P), (C, C), (P, C)] {
        let small: f64 = (0..6).map(|t| choi_error(&ch, ei, eo, 400, t)).sum::<f64>() / 6.0;
        let large: f64 = (0..6)
            .map(|t| choi_error(&ch, ei, eo, 40_000, 100 + t))
            .sum::<f64>()
            / 6.0;
        let ratio = small / large;
        assert!((5.0..20.0).contains(&ratio), "{ei}/{eo}: ratio {ratio}");
    }
}

#[test]
fn single_shot_variance_respects_the_proxy() {
    let mut rng = stream(12, 0);
    for n in 1..=2 {
        for _ in 0..5 {
            let ch = random_full_rank_channel::<f64, _>(n, &mut rng).unwrap();
            let rho = DensityMatrix::<f64>::random_hilbert_schmidt(n, &mut rng).into_operator();
            let o = PauliString::single(n, 0, Pauli::Z);
            let ps = acquire_process_shadow(&ch, P, C, 4000, &mut rng).unwrap();
            let values: Vec<f64> = ps
                .functional_values(&rho, &o.to_operator())
                .unwrap()
                .iter()
                .map(|z| z.re)
                .collect();
            let f_in = f_value(&Observable::dense(rho.clone()), C).unwrap();
            let f_out = f_value::<f64>(&o.into(), P).unwrap();
            // inputs measured with Pauli frames are bounded by the Clifford-free proxy
            let f_in_pauli = f_value(&Observable::with_support(rho, n), P).unwrap();
            assert!(variance(&values) <= variance_proxy(n, f_in_pauli.max(f_in), f_out));
        }
    }
}

#[test]
fn uniform_inputs_look_like_choi_measurements() {
    let ch = random_full_rank_channel::<f64, _>(1, &mut stream(13, 0)).unwrap();
    let report = verify_bin_independence(&ch, 200, &mut stream(13, 1)).unwrap();
    assert!(report.passed(), "{report:?}");
}

#[test]
fn f32_pipeline_runs_end_to_end() {
    let ch = named_channel::<f32>(NamedChannel::Dephasing(0.5), 1).unwrap();
    let ps = acquire_process_shadow(&ch, P, P, 20_000, &mut stream(14, 0)).unwrap();
    let est = ps.reconstruct_choi().unwrap();
    let err = (est.as_operator() - ch.choi().normalize().as_operator()).operator_norm();
    assert!(err < 0.1, "{err}");
}

#[test]
fn correlator_converges_for_a_random_channel() {
    let ch = random_unitary_channel::<f64, _>(2, &mut stream(15, 0)).unwrap();
    let rho = DensityMatrix::<f64>::product("0+").unwrap().into_operator();
    let spec = CorrelatorSpec::new(
        rho,
        PauliString::single(2, 0, Pauli::X),
        PauliString::single(2, 1, Pauli::Z),
    )
    .unwrap();
    let exact = spec.exact(&ch).unwrap();
    let ps = acquire_process_shadow(&ch, P, P, 100_000, &mut stream(15, 1)).unwrap();
    let est = multitime_correlator_exact_input(&ps, &spec, 10).unwrap();
    assert!((est - exact).norm() < 0.1, "{est} vs {exact}");
}

#[test]
fn composition_recovers_the_composed_channel() {
    let x = named_channel::<f64>(NamedChannel::Hadamard, 1).unwrap();
    let y = named_channel::<f64>(NamedChannel::AmplitudeDamping(0.3), 1).unwrap();
    let exact = x.then(&y).unwrap().choi().normalize();
    let ps_x = acquire_process_shadow(&x, P, P, 3000, &mut stream(16, 0)).unwrap();
    let ps_y = acquire_process_shadow(&y, P, P, 3000, &mut stream(16, 1)).unwrap();
    let est = compose_process_shadows(&ps_x, &ps_y)
        .unwrap()
        .materialize()
        .unwrap();
    let err = (&est - exact.as_operator()).operator_norm();
    assert!(err < 0.15, "{err}");
}
