//! Exact distribution of T_n by dynamic programming over (position, time).
//!
//! Mass starts at the origin and flows right with probability omega_x, left
//! with 1 - omega_x, reflecting at the window edge and absorbing at n. The
//! result is the exact pmf of T_n up to a horizon plus the unabsorbed
//! leftover; T_n - n is always even, so atoms live on the lattice n + 2k.

use crate::env::{Environment, EnvStatics};
use crate::error::{Error, Result};
use crate::moments::MomentProfile;

/// Horizon policy for the DP.
#[derive(Clone, Copy, Debug)]
pub enum Horizon {
    /// ceil(E[T_n] + 12 sqrt(Var)) rounded to the parity of n, doubling the
    /// deviation margin until the leftover drops below `eps` (at most 6
    /// retries).
    Auto { eps: f64 },
    /// Fixed number of time steps; no retries, leftover reported as-is.
    Fixed(u64),
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::Auto { eps: 1e-6 }
    }
}

/// Exact pmf of T_n on the lattice {n + 2k : k >= 0}.
#[derive(Clone, Debug)]
pub struct HittingPmf {
    pub n: i64,
    /// probs[k] = P(T_n = n + 2k).
    pub probs: Vec<f64>,
    pub leftover: f64,
    pub horizon: u64,
}

impl HittingPmf {
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| (self.n as f64 + 2.0 * k as f64) * p)
            .sum()
    }

    /// Atoms as (time, mass) pairs with zero-mass lattice points skipped.
    pub fn atoms(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, p)| ((self.n + 2 * k as i64) as u64, *p))
    }
}

fn dp_run(env: &Environment, n: i64, horizon: u64) -> HittingPmf {
    let left = env.left();
    let width = (n - left) as usize; // active positions left ..= n-1
    let mut mass = vec![0.0f64; width];
    let mut next = vec![0.0f64; width];
    mass[(0 - left) as usize] = 1.0;
    let mut probs = vec![0.0f64; (horizon.saturating_sub(n as u64) / 2 + 1) as usize];
    let idx_of = |x: i64| (x - left) as usize;

    for t in 1..=horizon {
        // Absorption: mass at n-1 stepping right. Parity guarantees absorbed
        // mass only appears at times t with t - n even.
        let absorbed = mass[width - 1] * env.omega(n - 1);
        if absorbed > 0.0 && t as i64 >= n && (t as i64 - n) % 2 == 0 {
            probs[((t as i64 - n) / 2) as usize] += absorbed;
        }
        next[..width].fill(0.0);
        for x in left..n {
            let m = mass[idx_of(x)];
            if m == 0.0 {
                continue;
            }
            let w = env.omega(x);
            let right_target = x + 1;
            if right_target < n {
                next[idx_of(right_target)] += m * w;
            }
            if x > left {
                next[idx_of(x - 1)] += m * (1.0 - w);
            }
        }
        std::mem::swap(&mut mass, &mut next);
    }
    let leftover: f64 = mass.iter().sum();
    HittingPmf {
        n,
        probs,
        leftover,
        horizon,
    }
}

/// Exact pmf of T_n for the walk started at 0.
pub fn exact_hitting_pmf(env: &Environment, n: i64, horizon: Horizon) -> Result<HittingPmf> {
    if n <= 0 || n > env.right() + 1 {
        return Err(Error::OutOfWindow {
            x: n,
            left: 1,
            right: env.right() + 1,
        });
    }
    match horizon {
        Horizon::Fixed(h) => {
            if (h as i64) < n {
                return Err(Error::InvalidWindow(format!(
                    "horizon {h} below the minimum hitting time {n}"
                )));
            }
            Ok(dp_run(env, n, h))
        }
        Horizon::Auto { eps } => {
            let st = EnvStatics::new(env);
            let prof = MomentProfile::compute(env, &st);
            let mean = prof.sum_e(n);
            let sd = prof.sum_v(n).sqrt();
            let mut margin = 12.0;
            let mut last = None;
            for _ in 0..6 {
                let mut h = (mean + margin * sd).ceil() as u64;
                if h < n as u64 {
                    h = n as u64;
                }
                if (h as i64 - n) % 2 != 0 {
                    h += 1;
                }
                let pmf = dp_run(env, n, h);
                if pmf.leftover <= eps {
                    return Ok(pmf);
                }
                last = Some(pmf);
                margin *= 2.0;
            }
            Err(Error::LeftoverMass {
                leftover: last.map(|p| p.leftover).unwrap_or(1.0),
                eps,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvironmentLaw;

    fn kappa25() -> EnvironmentLaw {
        EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 2.5).unwrap()
    }

    #[test]
    fn near_deterministic_env_concentrates_at_n() {
        let law = EnvironmentLaw::constant(1.0 - 1e-12).unwrap();
        let env = crate::env::Environment::sample_p(&law, -2, 10, 0).unwrap();
        let pmf = exact_hitting_pmf(&env, 10, Horizon::default()).unwrap();
        assert!((pmf.probs[0] - 1.0).abs() < 1e-9);
        assert!(pmf.leftover < 1e-9);
    }

    #[test]
    fn two_step_path_enumeration() {
        // P(T_1 = 1) = omega_0; P(T_1 = 3) = (1 - omega_0) omega_{-1} omega_0.
        let law = kappa25();
        let mut omegas = vec![1.0, 0.6, 0.4, 0.7];
        // window [-2, 1]; reflection at -2, omega_{-1} = 0.6, omega_0 = 0.4.
        let env =
            crate::env::Environment::from_parts(-2, std::mem::take(&mut omegas), 0, law)
                .unwrap();
        let pmf = exact_hitting_pmf(&env, 1, Horizon::Auto { eps: 1e-10 }).unwrap();
        let w0 = 0.4;
        let wm1 = 0.6;
        assert!((pmf.probs[0] - w0).abs() < 1e-12);
        assert!((pmf.probs[1] - (1.0 - w0) * wm1 * w0).abs() < 1e-12);
    }

    #[test]
    fn mass_conservation() {
        let law = kappa25();
        let env = crate::env::Environment::sample_p(&law, -20, 24, 5).unwrap();
        let pmf = exact_hitting_pmf(&env, 24, Horizon::Fixed(600)).unwrap();
        let total = pmf.total_mass() + pmf.leftover;
        assert!((total - 1.0).abs() < 1e-12, "mass {total}");
    }

    #[test]
    fn pmf_mean_matches_exact_mean() {
        let law = kappa25();
        let env = crate::env::Environment::sample_p(&law, -30, 32, 11).unwrap();
        let pmf = exact_hitting_pmf(&env, 32, Horizon::Auto { eps: 1e-9 }).unwrap();
        assert!(pmf.leftover < 1e-8);
        let st = crate::env::EnvStatics::new(&env);
        let prof = MomentProfile::compute(&env, &st);
        let exact = prof.sum_e(32);
        let rel = (pmf.mean() - exact).abs() / exact;
        assert!(rel < 1e-6, "pmf mean {} vs {exact}", pmf.mean());
    }

    #[test]
    fn horizon_below_n_rejected() {
        let law = kappa25();
        let env = crate::env::Environment::sample_p(&law, -10, 20, 2).unwrap();
        assert!(exact_hitting_pmf(&env, 20, Horizon::Fixed(5)).is_err());
        assert!(exact_hitting_pmf(&env, 0, Horizon::default()).is_err());
        assert!(exact_hitting_pmf(&env, 999, Horizon::default()).is_err());
    }
}
