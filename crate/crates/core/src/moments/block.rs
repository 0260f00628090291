//! Per-block crossing-time moments over a ladder decomposition.
//!
//! Block i spans sites [nu_{i-1}, nu_i); its crossing time from nu_{i-1} to
//! nu_i is the sum of tau_j for j in (nu_{i-1}, nu_i], so block moments are
//! plain sums of the per-site profiles. Each block also carries the
//! ingredients of the third-moment sum bound
//!   m3_i <= mu_i + 6 mu_i s2_i + R_{nu_{i-1}, nu_i - 1} t3(nu_{i-1})
//! and the centered-third sum that dominates 16 M_i^3.

use crate::env::{Environment, EnvStatics, LadderDecomposition};
use crate::error::Result;
use crate::moments::MomentProfile;

/// Moments of the block crossing times, one entry per complete block.
#[derive(Clone, Debug)]
pub struct BlockMoments {
    /// Block spans as (nu_left, nu_right) pairs.
    pub spans: Vec<(i64, i64)>,
    /// mu_i = quenched mean of the block crossing time.
    pub mu: Vec<f64>,
    /// s2_i = quenched variance of the block crossing time.
    pub s2: Vec<f64>,
    /// m3_i = sum of raw third moments over the block.
    pub m3: Vec<f64>,
    /// Sum of centered third moments over the block.
    pub c3_sum: Vec<f64>,
    /// Exponential height M_i of the block.
    pub heights: Vec<f64>,
    /// Right-hand side of the per-block sum bound (mu + 6 mu s2 + R t3_edge).
    pub sum_bound_rhs: Vec<f64>,
}

impl BlockMoments {
    pub fn compute(
        statics: &EnvStatics,
        profile: &MomentProfile,
        decomp: &LadderDecomposition,
    ) -> Result<Self> {
        let n = decomp.num_blocks();
        let mut spans = Vec::with_capacity(n);
        let mut mu = Vec::with_capacity(n);
        let mut s2 = Vec::with_capacity(n);
        let mut m3 = Vec::with_capacity(n);
        let mut c3_sum = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);

        for b in decomp.blocks() {
            let (lo, hi) = (b.start, b.end);
            spans.push((lo, hi));
            let mut sum_e = 0.0;
            let mut sum_v = 0.0;
            let mut sum_t3 = 0.0;
            let mut sum_c3 = 0.0;
            for j in (lo + 1)..=hi {
                sum_e += profile.e(j);
                sum_v += profile.v(j);
                sum_t3 += profile.t3(j);
                sum_c3 += profile.c3(j);
            }
            mu.push(sum_e);
            s2.push(sum_v);
            m3.push(sum_t3);
            c3_sum.push(sum_c3);
            let r_edge = statics.r(lo, hi - 1)?;
            let t3_edge = profile.t3(lo);
            rhs.push(sum_e + 6.0 * sum_e * sum_v + r_edge * t3_edge);
        }

        Ok(Self {
            spans,
            mu,
            s2,
            m3,
            c3_sum,
            heights: decomp.heights().to_vec(),
            sum_bound_rhs: rhs,
        })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Indices where the third-moment sum bound fails (empty when healthy).
    pub fn sum_bound_violations(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.m3[i] > self.sum_bound_rhs[i])
            .collect()
    }

    /// Indices where sum of centered thirds < 16 M^3 (empty when healthy).
    pub fn m3_lower_violations(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.c3_sum[i] < 16.0 * self.heights[i].powi(3))
            .collect()
    }
}

/// Block means alone, in one pass over the window: mu_i = block length +
/// 2 sum of W over the block's sites. Cheaper than a full profile when only
/// the means are needed (the stable-sum experiment draws millions of blocks).
pub fn block_means(env: &Environment, decomp: &LadderDecomposition) -> Vec<f64> {
    let mut out = Vec::with_capacity(decomp.num_blocks());
    let mut w = 0.0f64;
    let mut x = env.left();
    for b in decomp.blocks() {
        // Advance W to the block start.
        while x < b.start {
            x += 1;
            w = env.rho(x) * (1.0 + w);
        }
        let mut sum_w = w;
        while x < b.end - 1 {
            x += 1;
            w = env.rho(x) * (1.0 + w);
            sum_w += w;
        }
        out.push((b.end - b.start) as f64 + 2.0 * sum_w);
    }
    out
}

/// Reflection-modified block means: mu_tilde_i^(n) recomputes the block mean
/// with an extra reflection at nu_{i-1} - floor(sqrt(n)) - 1, so blocks
/// further apart than sqrt(n) become independent. Always <= mu_i.
pub fn reflected_block_means(
    env: &Environment,
    decomp: &LadderDecomposition,
    n: u64,
) -> Vec<f64> {
    let sqrt_n = (n as f64).sqrt().floor() as i64;
    decomp
        .blocks()
        .map(|b| {
            let m = b.start - sqrt_n - 1;
            // W' truncated at the added reflection; a reflection at or left of
            // the window edge coincides with the hard one already there.
            let start = m.max(env.left());
            let mut w = 0.0f64;
            let mut sum_w = 0.0f64;
            for x in (start + 1)..b.end {
                w = env.rho(x) * (1.0 + w);
                if x >= b.start {
                    sum_w += w;
                }
            }
            // Sites b.start .. b.end-1 contribute W'_{j-1} for j in the block;
            // the loop above accumulates W' at x in [b.start, b.end - 1].
            (b.end - b.start) as f64 + 2.0 * sum_w
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, EnvironmentLaw};

    fn kappa25() -> EnvironmentLaw {
        EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 2.5).unwrap()
    }

    #[test]
    fn constant_law_blocks_are_single_sites() {
        let law = EnvironmentLaw::constant(0.75).unwrap();
        let (env, decomp) = Environment::sample_q(&law, 40, 1).unwrap();
        let st = EnvStatics::new(&env);
        let prof = MomentProfile::compute(&env, &st);
        let bm = BlockMoments::compute(&st, &prof, &decomp).unwrap();
        assert_eq!(bm.len(), 40);
        for i in 0..bm.len() {
            let (lo, hi) = bm.spans[i];
            assert_eq!(hi - lo, 1);
            assert!((bm.mu[i] - prof.e(hi)).abs() < 1e-15);
            assert!((bm.s2[i] - prof.v(hi)).abs() < 1e-15);
        }
    }

    #[test]
    fn block_sums_match_windowed_totals() {
        let law = kappa25();
        let (env, decomp) = Environment::sample_q(&law, 500, 7).unwrap();
        let st = EnvStatics::new(&env);
        let prof = MomentProfile::compute(&env, &st);
        let bm = BlockMoments::compute(&st, &prof, &decomp).unwrap();
        // mu over all blocks = E[T_{nu_last}] = sum of e over (0, nu_last].
        let total_mu: f64 = bm.mu.iter().sum();
        let nu_last = *decomp.nus().last().unwrap();
        assert!((total_mu - prof.sum_e(nu_last)).abs() <= 1e-9 * total_mu);
    }

    #[test]
    fn sum_bound_and_m3_lower_hold() {
        let law = kappa25();
        for seed in [1u64, 2, 3] {
            let (env, decomp) = Environment::sample_q(&law, 2000, seed).unwrap();
            let st = EnvStatics::new(&env);
            let prof = MomentProfile::compute(&env, &st);
            let bm = BlockMoments::compute(&st, &prof, &decomp).unwrap();
            assert!(bm.sum_bound_violations().is_empty());
            assert!(bm.m3_lower_violations().is_empty());
        }
    }

    #[test]
    fn reflected_means_never_exceed_mu() {
        let law = kappa25();
        let (env, decomp) = Environment::sample_q(&law, 300, 11).unwrap();
        let st = EnvStatics::new(&env);
        let prof = MomentProfile::compute(&env, &st);
        let bm = BlockMoments::compute(&st, &prof, &decomp).unwrap();
        for n in [16u64, 256, 4096] {
            let tilde = reflected_block_means(&env, &decomp, n);
            for i in 0..bm.len() {
                assert!(
                    tilde[i] <= bm.mu[i] * (1.0 + 1e-12),
                    "block {i}, n = {n}: {} > {}",
                    tilde[i],
                    bm.mu[i]
                );
            }
        }
    }

    #[test]
    fn reflected_means_converge_to_mu() {
        // Far reflections change nothing: for n large the reflection sits at
        // or left of the window edge and mu_tilde equals mu to rounding.
        let law = kappa25();
        let (env, decomp) = Environment::sample_q(&law, 50, 13).unwrap();
        let st = EnvStatics::new(&env);
        let prof = MomentProfile::compute(&env, &st);
        let bm = BlockMoments::compute(&st, &prof, &decomp).unwrap();
        let tilde = reflected_block_means(&env, &decomp, (env.width() as u64 + 10).pow(2));
        for i in 0..bm.len() {
            assert!((tilde[i] - bm.mu[i]).abs() <= 1e-9 * bm.mu[i]);
        }
    }

    #[test]
    fn mean_profile_right_of_reflection_ignores_left_sites() {
        // After reflect_at(m), the mean profile at sites > m is a function of
        // omega on (m, ...] only.
        let law = kappa25();
        let env1 = Environment::sample_p(&law, -20, 30, 21).unwrap();
        let env2 = Environment::sample_p(&law, -20, 30, 22).unwrap();
        let m = 2i64;
        let r1 = env1.reflect_at(m).unwrap();
        // Splice env2's left half onto env1's right half, then reflect at m.
        let mut omegas = env2.omegas().to_vec();
        for x in m..=env1.right() {
            omegas[(x - env1.left()) as usize] = env1.omega(x);
        }
        let spliced =
            Environment::from_parts(env1.left(), omegas, 99, law.clone()).unwrap();
        let r2 = spliced.reflect_at(m).unwrap();
        let p1 = MomentProfile::compute(&r1, &EnvStatics::new(&r1));
        let p2 = MomentProfile::compute(&r2, &EnvStatics::new(&r2));
        for i in (m + 1)..=env1.right() {
            assert!((p1.e(i) - p2.e(i)).abs() <= 1e-12 * p1.e(i));
        }
    }
}
