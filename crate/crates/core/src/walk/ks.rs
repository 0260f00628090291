//! Kolmogorov distance between the standardized hitting-time law and the
//! standard normal.
//!
//! F_{n,w} is the law of (T_n - E_w[T_n]) / sqrt(Var_w(T_n)) with the exact
//! quenched mean and variance from the moments module (never sample
//! estimates). F is a lattice step function, so the sup distance is attained
//! at an atom from one side or the other; both candidates are evaluated at
//! every atom.

use rayon::prelude::*;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::moments::MomentProfile;
use crate::rng;
use crate::stats::normal_cdf;
use crate::walk::pmf::{exact_hitting_pmf, HittingPmf, Horizon};
use crate::walk::{StepBudget, Walker};

/// Fixed Monte-Carlo chunk size; the sample multiset depends only on the
/// chunk structure, never on how chunks are scheduled across workers.
pub const MC_CHUNK: usize = 4096;

/// Default Monte-Carlo sample count per (environment, n).
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Provenance {
    MonteCarlo { samples: usize },
    Exact { horizon: u64, leftover: f64 },
}

/// A discrete distribution function on an increasing support.
#[derive(Clone, Debug)]
pub struct DiscreteCdf {
    support: Vec<f64>,
    cum: Vec<f64>,
    total: f64,
    provenance: Provenance,
}

impl DiscreteCdf {
    /// Empirical CDF of a sample (ties collapse into single atoms).
    pub fn from_samples(mut xs: Vec<f64>, provenance: Provenance) -> Self {
        assert!(!xs.is_empty());
        xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN sample"));
        let n = xs.len() as f64;
        let mut support = Vec::new();
        let mut cum = Vec::new();
        let mut i = 0;
        while i < xs.len() {
            let v = xs[i];
            let mut j = i;
            while j < xs.len() && xs[j] == v {
                j += 1;
            }
            support.push(v);
            cum.push(j as f64 / n);
            i = j;
        }
        Self {
            support,
            cum,
            total: 1.0,
            provenance,
        }
    }

    /// CDF from (atom, mass) pairs already in increasing atom order.
    pub fn from_atoms(atoms: Vec<(f64, f64)>, provenance: Provenance) -> Self {
        assert!(!atoms.is_empty());
        let mut support = Vec::with_capacity(atoms.len());
        let mut cum = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for (x, m) in atoms {
            if let Some(last) = support.last() {
                assert!(*last < x, "atoms must be strictly increasing");
            }
            acc += m;
            support.push(x);
            cum.push(acc);
        }
        Self {
            support,
            cum,
            total: acc,
            provenance,
        }
    }

    /// CDF of an exact pmf; total mass is 1 - leftover.
    pub fn from_pmf(pmf: &HittingPmf) -> Self {
        let mut support = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for (t, p) in pmf.atoms() {
            acc += p;
            support.push(t as f64);
            cum.push(acc);
        }
        Self {
            support,
            cum,
            total: acc,
            provenance: Provenance::Exact {
                horizon: pmf.horizon,
                leftover: pmf.leftover,
            },
        }
    }

    /// Affine rescale of the support: x -> (x - mean)/sd.
    pub fn standardize(&self, mean: f64, sd: f64) -> Self {
        assert!(sd > 0.0);
        Self {
            support: self.support.iter().map(|x| (x - mean) / sd).collect(),
            cum: self.cum.clone(),
            total: self.total,
            provenance: self.provenance,
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// sup_x |F(x) - Phi(x)| over both one-sided limits at every atom.
    pub fn ks_vs_std_normal(&self) -> f64 {
        let mut d: f64 = (1.0 - self.total).abs();
        let mut prev = 0.0f64;
        for (x, c) in self.support.iter().zip(&self.cum) {
            let phi = normal_cdf(*x);
            d = d.max((c - phi).abs()).max((prev - phi).abs());
            prev = *c;
        }
        d
    }
}

/// Universal lattice lower bound (1/2)(Phi(1/sqrt(var)) - 1/2) on the
/// Kolmogorov distance of any distribution supported on a lattice of spacing
/// >= 1/sqrt(var) around the origin.
pub fn lattice_floor_from_var(var: f64) -> f64 {
    assert!(var > 0.0);
    0.5 * (normal_cdf(1.0 / var.sqrt()) - 0.5)
}

/// How to build F_{n,w}.
#[derive(Clone, Copy, Debug)]
pub enum KsMethod {
    MonteCarlo { samples: usize },
    Exact { eps: f64 },
}

/// One KS evaluation: distance, floor, standardization and provenance.
#[derive(Clone, Debug)]
pub struct KsRecord {
    pub env_seed: u64,
    pub n: i64,
    pub method: &'static str,
    pub ks: f64,
    pub floor: f64,
    pub mean: f64,
    pub var: f64,
}

/// Kolmogorov distance of the standardized T_n law to the standard normal.
///
/// Monte-Carlo sampling is stratified over fixed-size chunks with streams
/// derived from (master_seed, env seed, n, chunk), so the result is invariant
/// to worker count and scheduling.
pub fn ks_to_normal(
    env: &Environment,
    profile: &MomentProfile,
    n: i64,
    method: KsMethod,
    master_seed: u64,
    budget: &StepBudget,
) -> Result<KsRecord> {
    let mean = profile.sum_e(n);
    let var = profile.sum_v(n);
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let (cdf, tag) = match method {
        KsMethod::MonteCarlo { samples } => {
            if samples < 1_000 {
                return Err(Error::DegenerateSamples(format!(
                    "need at least 1000 Monte-Carlo samples, got {samples}"
                )));
            }
            // Chunks have fixed streams keyed by their index, so the sample
            // multiset is identical however they are scheduled.
            let walker = Walker::new(env);
            let chunks = samples.div_ceil(MC_CHUNK);
            let per_chunk: Vec<Vec<f64>> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut r = rng::fast_stream(
                        master_seed,
                        &[rng::purpose::KS_MC, env.seed(), n as u64, c as u64],
                    );
                    let count = MC_CHUNK.min(samples - c * MC_CHUNK);
                    let mut xs = Vec::with_capacity(count);
                    for _ in 0..count {
                        xs.push(walker.sample(0, n, &mut r, budget)? as f64);
                    }
                    Ok(xs)
                })
                .collect::<Result<_>>()?;
            let xs: Vec<f64> = per_chunk.into_iter().flatten().collect();
            (
                DiscreteCdf::from_samples(xs, Provenance::MonteCarlo { samples }),
                "monte-carlo",
            )
        }
        KsMethod::Exact { eps } => {
            let pmf = exact_hitting_pmf(env, n, Horizon::Auto { eps })?;
            if pmf.leftover > eps {
                return Err(Error::LeftoverMass {
                    leftover: pmf.leftover,
                    eps,
                });
            }
            (DiscreteCdf::from_pmf(&pmf), "exact")
        }
    };
    let ks = cdf.standardize(mean, var.sqrt()).ks_vs_std_normal();
    Ok(KsRecord {
        env_seed: env.seed(),
        n,
        method: tag,
        ks,
        floor: lattice_floor_from_var(var),
        mean,
        var,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvironmentLaw, EnvStatics};
    use crate::stats::normal_cdf;

    #[test]
    fn point_mass_at_zero_has_ks_half() {
        let cdf = DiscreteCdf::from_samples(vec![0.0; 10], Provenance::MonteCarlo {
            samples: 10,
        });
        assert!((cdf.ks_vs_std_normal() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_point_uniform_ks() {
        // F uniform on {-1, +1}: KS = Phi(1) - 1/2 ~ 0.3413.
        let xs = vec![-1.0, 1.0, -1.0, 1.0];
        let cdf = DiscreteCdf::from_samples(xs, Provenance::MonteCarlo { samples: 4 });
        let expect = normal_cdf(1.0) - 0.5;
        assert!((cdf.ks_vs_std_normal() - expect).abs() < 1e-12);
    }

    #[test]
    fn lattice_floor_constant_env() {
        // Constant p = 0.75, n = 100: Var = 600, floor ~ 0.00814.
        let floor = lattice_floor_from_var(600.0);
        assert!((floor - 0.00814).abs() < 5e-5, "floor {floor}");
        // Var -> inf pushes the floor to 0.
        assert!(lattice_floor_from_var(1e18) < 1e-8);
    }

    #[test]
    fn floor_below_ks_for_random_envs() {
        let law = EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 2.5).unwrap();
        let budget = StepBudget::unlimited();
        for seed in 0..5u64 {
            let env = Environment::sample_p_auto(&law, 48, seed).unwrap();
            let st = EnvStatics::new(&env);
            let prof = MomentProfile::compute(&env, &st);
            for method in [
                KsMethod::MonteCarlo { samples: 4000 },
                KsMethod::Exact { eps: 1e-9 },
            ] {
                let rec = ks_to_normal(&env, &prof, 48, method, 1, &budget).unwrap();
                assert!(
                    rec.floor <= rec.ks,
                    "seed {seed}: floor {} > ks {}",
                    rec.floor,
                    rec.ks
                );
            }
        }
    }

    #[test]
    fn mc_and_exact_agree_within_dkw() {
        let law = EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 2.5).unwrap();
        let env = Environment::sample_p_auto(&law, 64, 3).unwrap();
        let st = EnvStatics::new(&env);
        let prof = MomentProfile::compute(&env, &st);
        let budget = StepBudget::unlimited();
        let n_mc = 40_000;
        let mc = ks_to_normal(
            &env,
            &prof,
            64,
            KsMethod::MonteCarlo { samples: n_mc },
            7,
            &budget,
        )
        .unwrap();
        let exact = ks_to_normal(&env, &prof, 64, KsMethod::Exact { eps: 1e-9 }, 7, &budget)
            .unwrap();
        // DKW at delta = 1e-3: sqrt(ln(2/delta) / (2N)).
        let dkw = ((2.0f64 / 1e-3).ln() / (2.0 * n_mc as f64)).sqrt();
        assert!(
            (mc.ks - exact.ks).abs() <= dkw + 1e-6,
            "mc {} vs exact {} (dkw {dkw})",
            mc.ks,
            exact.ks
        );
    }

    #[test]
    fn mc_is_deterministic_in_master_seed() {
        let law = EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 2.5).unwrap();
        let env = Environment::sample_p_auto(&law, 32, 5).unwrap();
        let st = EnvStatics::new(&env);
        let prof = MomentProfile::compute(&env, &st);
        let budget = StepBudget::unlimited();
        let m = KsMethod::MonteCarlo { samples: 5000 };
        let a = ks_to_normal(&env, &prof, 32, m, 11, &budget).unwrap();
        let b = ks_to_normal(&env, &prof, 32, m, 11, &budget).unwrap();
        assert_eq!(a.ks, b.ks);
        let c = ks_to_normal(&env, &prof, 32, m, 12, &budget).unwrap();
        assert_ne!(a.ks, c.ks);
    }

    #[test]
    fn small_sample_count_rejected() {
        let law = EnvironmentLaw::constant(0.75).unwrap();
        let env = Environment::sample_p_auto(&law, 16, 0).unwrap();
        let st = EnvStatics::new(&env);
        let prof = MomentProfile::compute(&env, &st);
        let budget = StepBudget::unlimited();
        assert!(ks_to_normal(
            &env,
            &prof,
            16,
            KsMethod::MonteCarlo { samples: 10 },
            0,
            &budget
        )
        .is_err());
    }
}
