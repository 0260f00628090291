use std::time::Instant;

use rand::SeedableRng;
use rwre_core::env::{Environment, EnvironmentLaw};
use rwre_core::walk::{StepBudget, Walker};

fn bench<R: rand::Rng>(name: &str, env: &Environment, n: i64, mut r: R) {
    let budget = StepBudget::unlimited();
    let walker = Walker::new(env);
    let t0 = Instant::now();
    let samples = 3000usize;
    let mut acc = 0u64;
    for _ in 0..samples {
        acc += walker.sample(0, n, &mut r, &budget).unwrap();
    }
    let el = t0.elapsed().as_secs_f64();
    let site_visits = samples as f64 * n as f64;
    println!(
        "{name}: {el:.3}s, {:.1} ns/site, mean T/n = {:.2}",
        el / site_visits * 1e9,
        acc as f64 / samples as f64 / n as f64
    );
}

#[test]
#[ignore]
fn bench_sampler() {
    let law = EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 2.5).unwrap();
    let n = 1 << 14;
    let env = Environment::sample_p_auto(&law, n, 1).unwrap();
    bench("chacha8", &env, n, rwre_core::rng::stream(1, &[99]));
    bench("smallrng", &env, n, rand::rngs::SmallRng::seed_from_u64(7));
    bench("fastrng", &env, n, rwre_core::rng::fast_stream(1, &[99]));
}
