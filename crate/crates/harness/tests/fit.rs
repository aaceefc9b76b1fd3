use proc_shadow::rng::stream;
use proc_shadow_harness::fit_power_law;
use rand_distr::{Distribution, Normal};

#[test]
fn noisy_slopes_are_recovered_within_two_standard_errors() {
    let ms: Vec<f64> = (0..12).map(|i| 100.0 * 2f64.powi(i)).collect();
    let noise = Normal::new(0.0f64, 0.1).unwrap();
    let mut within = 0;
    for seed in 0..50 {
        let mut rng = stream(seed, 0);
        let errs: Vec<f64> = ms
            .iter()
            .map(|m| 2.0 * m.powf(-0.5) * noise.sample(&mut rng).exp())
            .collect();
        let fit = fit_power_law(&ms, &errs).unwrap();
        if (fit.b - 0.5).abs() <= 2.0 * fit.stderr {
            within += 1;
        }
    }
    // about 95% coverage expected
    assert!(within >= 42, "{within}/50");
}
