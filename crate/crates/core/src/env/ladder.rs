//! Ladder locations of the potential and the per-block exponential heights.
//!
//! A ladder location is a site where V reaches a new strict running minimum
//! from the left. Strictness matters: a site where V merely ties the running
//! minimum is not a ladder point. Blocks are the half-open intervals
//! [nu_{i-1}, nu_i) between consecutive ladder locations, and the height of
//! block i is M_i = max { Pi_{nu_{i-1}, j} : nu_{i-1} <= j < nu_i }.

use crate::env::{Environment, EnvStatics};
use crate::error::{Error, Result};

/// A block's site span [start, end) plus its exponential height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub start: i64,
    pub end: i64,
    pub height: f64,
}

/// Increasing ladder locations nu_0 < nu_1 < ... and the heights M_i of the
/// blocks between them (heights.len() == nus.len() - 1).
#[derive(Clone, Debug)]
pub struct LadderDecomposition {
    nus: Vec<i64>,
    heights: Vec<f64>,
}

impl LadderDecomposition {
    pub(crate) fn new(nus: Vec<i64>, heights: Vec<f64>) -> Self {
        debug_assert_eq!(heights.len() + 1, nus.len());
        Self { nus, heights }
    }

    pub fn nus(&self) -> &[i64] {
        &self.nus
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Number of complete blocks inside the window.
    pub fn num_blocks(&self) -> usize {
        self.heights.len()
    }

    pub fn block(&self, i: usize) -> Block {
        Block {
            start: self.nus[i],
            end: self.nus[i + 1],
            height: self.heights[i],
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        (0..self.num_blocks()).map(|i| self.block(i))
    }
}

/// Ladder decomposition of an environment window.
///
/// nu_0 is the largest y <= 0 such that V(y) < V(k) for every in-window
/// k < y; subsequent points are nu_i = inf { x > nu_{i-1} : V(x) < V(nu_{i-1}) }.
/// Returns however many complete blocks the window holds; an error only when
/// no ladder point right of 0 exists.
pub fn ladder_decompose(env: &Environment, statics: &EnvStatics) -> Result<LadderDecomposition> {
    let left = env.left();
    let right = env.right();

    // nu_0: scan y = 0 down to left+1, tracking the strict minimum over k < y.
    // y qualifies iff V(y) < min_{left <= k < y} V(k); find the largest such y.
    let mut nu0 = None;
    'outer: for y in (left + 1..=0).rev() {
        let vy = statics.v(y);
        for k in left + 1..y {
            if statics.v(k) <= vy {
                continue 'outer;
            }
        }
        nu0 = Some(y);
        break;
    }
    let nu0 = nu0.ok_or_else(|| {
        Error::InvalidWindow("window holds no ladder location at or left of 0".into())
    })?;

    let mut nus = vec![nu0];
    let mut heights = Vec::new();
    let mut prev = nu0;
    let mut vprev = statics.v(prev);
    let mut x = prev + 1;
    while x <= right + 1 {
        if statics.v(x) < vprev {
            // Block [prev, x): log M = max over j in [prev, x) of
            // (V(j+1) - V(prev)), the running maximum of partial products.
            let mut log_m = f64::NEG_INFINITY;
            for j in prev..x {
                log_m = log_m.max(statics.v(j + 1) - vprev);
            }
            nus.push(x);
            heights.push(log_m.exp());
            prev = x;
            vprev = statics.v(x);
        }
        x += 1;
    }

    if *nus.last().unwrap() <= 0 {
        return Err(Error::InvalidWindow(
            "window holds no ladder location right of 0".into(),
        ));
    }
    Ok(LadderDecomposition::new(nus, heights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, EnvironmentLaw};

    fn env_from_omegas(omegas_right_of_reflection: &[f64]) -> Environment {
        let law = EnvironmentLaw::constant(0.75).unwrap();
        let mut omegas = vec![1.0];
        omegas.extend_from_slice(omegas_right_of_reflection);
        Environment::from_parts(-1, omegas, 0, law).unwrap()
    }

    #[test]
    fn constant_law_every_site_is_a_ladder_point() {
        let law = EnvironmentLaw::constant(0.75).unwrap();
        let env = Environment::sample_p(&law, -5, 10, 0).unwrap();
        let st = EnvStatics::new(&env);
        let lad = ladder_decompose(&env, &st).unwrap();
        // V decreases strictly, so every site is a descent; nu_0 = 0 and
        // nu_i = i with M_i = rho = 1/3.
        assert_eq!(lad.nus()[0], 0);
        for (i, nu) in lad.nus().iter().enumerate() {
            assert_eq!(*nu, i as i64);
        }
        for m in lad.heights() {
            assert!((m - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn worked_example_with_tie() {
        // omega = (2/3, 1/3, 2/3, 2/3) at sites 0..3 gives rho = (1/2, 2, 1/2, 1/2)
        // and V = (0, -log2, 0, -log2, -2log2) at x = 0..4. The descent below 0
        // happens at x = 1; V(3) = V(1) exactly, so 3 is NOT a ladder point and
        // the next one is x = 4.
        let env = env_from_omegas(&[2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
        let st = EnvStatics::new(&env);
        let lad = ladder_decompose(&env, &st).unwrap();
        assert_eq!(lad.nus(), &[0, 1, 4]);
        // M_2 = max(Pi_{1,1}, Pi_{1,2}, Pi_{1,3}) = max(2, 1, 1/2) = 2.
        assert!((lad.heights()[1] - 2.0).abs() < 1e-12);
        // M_1 = Pi_{0,0} = 1/2.
        assert!((lad.heights()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn strict_descent_invariant() {
        let law = EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 2.5).unwrap();
        let env = Environment::sample_p(&law, -30, 200, 77).unwrap();
        let st = EnvStatics::new(&env);
        let lad = ladder_decompose(&env, &st).unwrap();
        for win in lad.nus().windows(2) {
            let (a, b) = (win[0], win[1]);
            assert!(a < b);
            // V(nu_i) < V(x) for all in-window x < nu_i.
            for x in (env.left() + 1)..b {
                assert!(st.v(b) < st.v(x), "V({b}) !< V({x})");
            }
        }
    }

    #[test]
    fn heights_dominate_first_rho_and_match_log_form() {
        let law = EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 3.0).unwrap();
        let env = Environment::sample_p(&law, -20, 300, 5).unwrap();
        let st = EnvStatics::new(&env);
        let lad = ladder_decompose(&env, &st).unwrap();
        for b in lad.blocks() {
            assert!(b.height >= env.rho(b.start) * (1.0 - 1e-12));
            // log M equals the max of block partial sums of log rho.
            let mut acc = 0.0;
            let mut max = f64::NEG_INFINITY;
            for j in b.start..b.end {
                acc += env.rho(j).ln();
                max = max.max(acc);
            }
            assert!((b.height.ln() - max).abs() < 1e-10);
        }
    }

    #[test]
    fn q_sampled_decomposition_matches_rescan() {
        let law = EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 2.5).unwrap();
        let (env, lad) = Environment::sample_q(&law, 200, 31).unwrap();
        let st = EnvStatics::new(&env);
        let rescanned = ladder_decompose(&env, &st).unwrap();
        assert_eq!(lad.nus(), rescanned.nus());
        for (a, b) in lad.heights().iter().zip(rescanned.heights()) {
            assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn window_without_positive_ladder_point_errors() {
        // Single rising site after the reflection: no descent right of 0.
        let env = env_from_omegas(&[0.4, 0.4]);
        let st = EnvStatics::new(&env);
        assert!(ladder_decompose(&env, &st).is_err());
    }
}
