use proc_shadow::channel::{choi_of_channel, Channel};
use proc_shadow::operator::Register;
use proc_shadow::rng::stream;
use proc_shadow::zoo::{random_full_rank_channel, random_unitary_channel};
use proc_shadow::{DensityMatrix, Operator};
use proptest::prelude::*;

fn random_channel(seed: u64, n: usize, full_rank: bool) -> Channel<f64> {
    let mut rng = stream(seed, 0);
    if full_rank {
        random_full_rank_channel(n, &mut rng).unwrap()
    } else {
        random_unitary_channel(n, &mut rng).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn choi_is_a_normalized_state(seed in any::<u64>(), n in 1usize..=2, full in any::<bool>()) {
        let ch = random_channel(seed, n, full);
        let eta = choi_of_channel(&ch).normalize();
        prop_assert!(eta.validate().is_ok());
        let reduced = eta.as_operator().partial_trace(Register::B).unwrap();
        let d = (1usize << n) as f64;
        prop_assert!(reduced.max_abs_diff(&Operator::identity(n).scale(1.0 / d)) < 1e-9);
    }

    #[test]
    fn choi_round_trip_reproduces_the_channel(seed in any::<u64>(), n in 1usize..=2, full in any::<bool>()) {
        let ch = random_channel(seed, n, full);
        let eta = ch.choi();
        let rho = DensityMatrix::<f64>::random_hilbert_schmidt(n, &mut stream(seed, 1));
        let via_choi = eta.apply(rho.as_operator()).unwrap();
        let direct = ch.apply(rho.as_operator()).unwrap();
        prop_assert!(via_choi.max_abs_diff(&direct) < 1e-9);
        prop_assert!((direct.trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_channels_preserve_trace(seed in any::<u64>(), n in 1usize..=2) {
        prop_assert!(random_channel(seed, n, true).trace_preservation_residual() < 1e-9);
        prop_assert!(random_channel(seed, n, false).trace_preservation_residual() < 1e-9);
    }
}
