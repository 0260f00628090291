//! Sampling hitting times under the quenched law.
//!
//! Two samplers share one distribution:
//!
//! * [`sample_hitting_time_stepwise`] walks the chain one step at a time. It
//!   is the plain oracle and the reference for cross-validation.
//! * [`sample_hitting_time`] draws the same hitting-time law through the
//!   up/down-crossing representation: with D_k the number of down-steps from
//!   site k before absorption and A_k = D_{k+1} + 1{k >= start} the number of
//!   up-steps, D_k given A_k is negative binomial NB(A_k, omega_k) and
//!   T = sum_k (A_k + D_k). Bounce-backs at a site are drawn in batched
//!   geometric blocks instead of being stepped through one by one, which is
//!   what makes deep valleys affordable; the law of T is unchanged.
//!
//! Both samplers charge an experiment-wide [`StepBudget`] with the number of
//! chain steps they represent and abort with an explicit error when it runs
//! out.

pub mod ks;
pub mod pmf;

pub use ks::{ks_to_normal, lattice_floor_from_var, DiscreteCdf, KsMethod, KsRecord, Provenance};
pub use pmf::{exact_hitting_pmf, HittingPmf, Horizon};

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::Distribution;

use crate::env::Environment;
use crate::error::{Error, Result};

/// Default per-experiment step budget.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000_000;

/// Shared counter of simulated chain steps for one experiment.
#[derive(Debug)]
pub struct StepBudget {
    budget: u64,
    used: AtomicU64,
}

impl StepBudget {
    pub fn new(budget: u64) -> Self {
        Self {
            budget,
            used: AtomicU64::new(0),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(u64::MAX)
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    pub fn remaining(&self) -> u64 {
        self.budget.saturating_sub(self.used())
    }

    /// Charge `steps`; errors once the running total crosses the budget.
    pub fn charge(&self, steps: u64) -> Result<()> {
        let prev = self.used.fetch_add(steps, Ordering::Relaxed);
        if prev.saturating_add(steps) > self.budget {
            return Err(Error::StepBudgetExceeded {
                budget: self.budget,
                used: prev.saturating_add(steps),
            });
        }
        Ok(())
    }
}

impl Default for StepBudget {
    fn default() -> Self {
        Self::new(DEFAULT_STEP_BUDGET)
    }
}

fn check_span(env: &Environment, start: i64, target: i64) -> Result<()> {
    if start >= target {
        return Err(Error::InvalidWindow(format!(
            "need start < target, got {start} >= {target}"
        )));
    }
    if start < env.left() || target > env.right() + 1 {
        return Err(Error::OutOfWindow {
            x: if start < env.left() { start } else { target },
            left: env.left(),
            right: env.right() + 1,
        });
    }
    Ok(())
}

/// One-step chain simulation of T_target started at `start`.
pub fn sample_hitting_time_stepwise<R: Rng + ?Sized>(
    env: &Environment,
    start: i64,
    target: i64,
    rng: &mut R,
    budget: &StepBudget,
) -> Result<u64> {
    check_span(env, start, target)?;
    let allowance = budget.remaining();
    let mut pos = start;
    let mut t: u64 = 0;
    while pos < target {
        if t >= allowance {
            budget.charge(t)?;
            unreachable!("charge must fail at exhaustion");
        }
        if rng.random::<f64>() < env.omega(pos) {
            pos += 1;
        } else {
            pos -= 1;
        }
        t += 1;
    }
    budget.charge(t)?;
    Ok(t)
}

/// Reusable crossing-count sampler for one environment.
///
/// Precomputes per-site inversion constants so the inner loop spends one
/// exponential draw per up-crossing and a single Gamma-Poisson pair on
/// deep-valley sites.
pub struct Walker<'a> {
    env: &'a Environment,
    /// 1/ln(1 - omega_x), indexed from the window's left edge.
    inv_ln1m: Vec<f64>,
    /// ln(omega_x), for the p^r term of the negative-binomial inversion.
    ln_p: Vec<f64>,
}

/// Crossing counts above this use the Gamma-Poisson form of the negative
/// binomial instead of summed geometrics.
const GP_THRESHOLD: u64 = 16;

impl<'a> Walker<'a> {
    pub fn new(env: &'a Environment) -> Self {
        let inv_ln1m = env
            .omegas()
            .iter()
            .map(|w| {
                if *w >= 1.0 {
                    0.0
                } else {
                    1.0 / (1.0 - w).ln()
                }
            })
            .collect();
        let ln_p = env.omegas().iter().map(|w| w.ln()).collect();
        Self {
            env,
            inv_ln1m,
            ln_p,
        }
    }

    /// Failures before the r-th success at site index `idx` (success
    /// probability omega there).
    #[inline]
    fn neg_binomial<R: Rng + ?Sized>(&self, r: u64, idx: usize, rng: &mut R) -> u64 {
        let p = self.env.omegas()[idx];
        if r == 0 || p >= 1.0 {
            return 0;
        }
        if r == 1 {
            // Geometric. The common no-bounce case is one uniform compare; on
            // a bounce the same uniform is rescaled into the tail inversion
            // (memorylessness), so the log is only paid with probability 1-p.
            let u: f64 = rng.random();
            if u < p {
                0
            } else {
                let v = ((u - p) / (1.0 - p)).max(f64::MIN_POSITIVE);
                1 + (v.ln() * self.inv_ln1m[idx]) as u64
            }
        } else if r <= GP_THRESHOLD {
            // Single-uniform inversion through the NB pmf recurrence
            // P(0) = p^r, P(k+1) = P(k) (r+k)(1-p)/(k+1).
            let u: f64 = rng.random();
            let mut q = (r as f64 * self.ln_p[idx]).exp();
            let mut acc = q;
            let mut k = 0u64;
            let barp = 1.0 - p;
            while u >= acc {
                q *= (r + k) as f64 * barp / (k + 1) as f64;
                acc += q;
                k += 1;
                if k > 1 << 40 {
                    break;
                }
            }
            k
        } else {
            let scale = (1.0 - p) / p;
            let lambda = rand_distr::Gamma::new(r as f64, scale)
                .expect("r > 0, scale > 0")
                .sample(rng);
            if lambda <= 0.0 {
                return 0;
            }
            rand_distr::Poisson::new(lambda)
                .expect("lambda > 0")
                .sample(rng) as u64
        }
    }

    /// Sample T_target from `start`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        start: i64,
        target: i64,
        rng: &mut R,
        budget: &StepBudget,
    ) -> Result<u64> {
        check_span(self.env, start, target)?;
        let left = self.env.left();
        let allowance = budget.remaining();
        let mut total: u64 = 0;
        let mut d_next: u64 = 0;
        let mut k = target - 1;
        while k >= left {
            let a = d_next + u64::from(k >= start);
            if a == 0 {
                break;
            }
            let d = self.neg_binomial(a, (k - left) as usize, rng);
            total = total
                .checked_add(a)
                .and_then(|t| t.checked_add(d))
                .ok_or(Error::StepBudgetExceeded {
                    budget: budget.budget,
                    used: u64::MAX,
                })?;
            if total > allowance {
                budget.charge(total)?;
                unreachable!("charge must fail at exhaustion");
            }
            d_next = d;
            k -= 1;
        }
        budget.charge(total)?;
        Ok(total)
    }
}

/// Batched sampler of T_target from `start` via crossing counts. One-off
/// convenience wrapper over [`Walker`].
pub fn sample_hitting_time<R: Rng + ?Sized>(
    env: &Environment,
    start: i64,
    target: i64,
    rng: &mut R,
    budget: &StepBudget,
) -> Result<u64> {
    Walker::new(env).sample(start, target, rng, budget)
}

/// Monte-Carlo mean/variance/abs-central-fifth of tau at one site; used by
/// the cross-validation suites.
pub fn crossing_time_mc_moments<R: Rng + ?Sized>(
    env: &Environment,
    site: i64,
    samples: usize,
    rng: &mut R,
    budget: &StepBudget,
) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        out.push(sample_hitting_time(env, site - 1, site, rng, budget)?);
    }
    Ok(out)
}
