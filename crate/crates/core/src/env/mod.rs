//! Environments: finite windows of site probabilities with a hard reflection
//! site on the left.
//!
//! The reflection (omega at the left edge set to exactly 1) makes every
//! left-tail sum finite, so quenched moments are exact rather than truncated
//! approximations. Windows are sized so the reflection sits far enough left
//! that its effect on reported sites is below 1e-12.

pub mod ladder;
pub mod law;
pub mod serial;
pub mod statics;
pub mod tail;

use crate::error::{Error, Result};
use crate::rng;

pub use ladder::{ladder_decompose, LadderDecomposition};
pub use law::{EnvironmentLaw, LawKind};
pub use statics::EnvStatics;
pub use tail::hill_tail_index;

/// Default cap on the length of a single ladder block drawn under Q; laws
/// close to E[log rho] = 0 produce astronomically long blocks and should be
/// rejected rather than looped on.
pub const BLOCK_CAP: usize = 1_000_000;

/// A finite window of site probabilities omega_x for x in [left, right], with
/// omega_left = 1 exactly (reflection).
///
/// Deterministic function of (law, left, right, seed).
#[derive(Clone, Debug)]
pub struct Environment {
    left: i64,
    omegas: Vec<f64>,
    seed: u64,
    law: EnvironmentLaw,
}

impl Environment {
    /// i.i.d. sites under P: omega_x ~ law for x in (left, right], with the
    /// reflection at `left`. Requires left < 0 <= right so the origin lies in
    /// the window.
    pub fn sample_p(law: &EnvironmentLaw, left: i64, right: i64, seed: u64) -> Result<Self> {
        if !(left < 0 && 0 <= right) {
            return Err(Error::InvalidWindow(format!(
                "need left < 0 <= right, got [{left}, {right}]"
            )));
        }
        let width = (right - left + 1) as usize;
        let mut omegas = Vec::with_capacity(width);
        omegas.push(1.0);
        let mut r = rng::stream(seed, &[rng::purpose::ENV_P, left as u64, right as u64]);
        for _ in 1..width {
            omegas.push(law.sample_omega(&mut r));
        }
        Ok(Self {
            left,
            omegas,
            seed,
            law: law.clone(),
        })
    }

    /// P-sampled window [-margin, right] with the default margin
    /// max(50, ceil(10 ln right)), which keeps the truncation error of the
    /// left-tail sums below 1e-12 for laws with E[rho] < 1.
    pub fn sample_p_auto(law: &EnvironmentLaw, right: i64, seed: u64) -> Result<Self> {
        Self::sample_p(law, -default_margin(right), right, seed)
    }

    /// Concatenates `n_blocks` i.i.d. ladder blocks under Q.
    ///
    /// Each block draws omega_0, omega_1, ... until the potential first drops
    /// strictly below its starting value; that first-descent point ends the
    /// block. The reflection sits at -1, so nu_0 = 0 by construction and the
    /// sites x >= 0 have exactly the law of an environment conditioned on
    /// {nu_0 = 0}.
    pub fn sample_q(
        law: &EnvironmentLaw,
        n_blocks: usize,
        seed: u64,
    ) -> Result<(Self, LadderDecomposition)> {
        if n_blocks == 0 {
            return Err(Error::InvalidWindow(
                "n_blocks = 0 gives an empty environment".into(),
            ));
        }
        let mut r = rng::stream(seed, &[rng::purpose::ENV_Q, n_blocks as u64]);
        let mut omegas = vec![1.0];
        let mut nus = Vec::with_capacity(n_blocks + 1);
        let mut heights = Vec::with_capacity(n_blocks);
        nus.push(0i64);
        for _ in 0..n_blocks {
            let mut v = 0.0f64; // potential relative to block start
            let mut vmax = f64::NEG_INFINITY;
            let start_len = omegas.len();
            loop {
                let w = law.sample_omega(&mut r);
                omegas.push(w);
                v += ((1.0 - w) / w).ln();
                vmax = vmax.max(v);
                if v < 0.0 {
                    break;
                }
                if omegas.len() - start_len > BLOCK_CAP {
                    return Err(Error::BlockCap { cap: BLOCK_CAP });
                }
            }
            nus.push((omegas.len() - 1) as i64);
            heights.push(vmax.exp());
        }
        let env = Self {
            left: -1,
            omegas,
            seed,
            law: law.clone(),
        };
        Ok((env, LadderDecomposition::new(nus, heights)))
    }

    /// Copy with omega_m set to 1 (a right-directed reflection at m).
    pub fn reflect_at(&self, m: i64) -> Result<Self> {
        if m < self.left || m > self.right() {
            return Err(Error::OutOfWindow {
                x: m,
                left: self.left,
                right: self.right(),
            });
        }
        let mut out = self.clone();
        out.omegas[(m - self.left) as usize] = 1.0;
        Ok(out)
    }

    /// Build directly from raw probabilities; used by tests, deserialization
    /// and hand-constructed examples. `omegas[0]` must be exactly 1.
    pub fn from_parts(left: i64, omegas: Vec<f64>, seed: u64, law: EnvironmentLaw) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidWindow("empty environment".into()));
        }
        if omegas[0] != 1.0 {
            return Err(Error::InvalidWindow(
                "omega at the reflection site must be exactly 1".into(),
            ));
        }
        if omegas[1..].iter().any(|w| !(*w > 0.0 && *w < 1.0)) {
            return Err(Error::InvalidWindow(
                "omega_x must lie strictly in (0,1) right of the reflection".into(),
            ));
        }
        Ok(Self {
            left,
            omegas,
            seed,
            law,
        })
    }

    pub fn left(&self) -> i64 {
        self.left
    }

    pub fn right(&self) -> i64 {
        self.left + self.omegas.len() as i64 - 1
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn law(&self) -> &EnvironmentLaw {
        &self.law
    }

    pub fn width(&self) -> usize {
        self.omegas.len()
    }

    #[inline]
    pub fn contains(&self, x: i64) -> bool {
        x >= self.left && x <= self.right()
    }

    /// omega_x; panics outside the window (hot path).
    #[inline]
    pub fn omega(&self, x: i64) -> f64 {
        self.omegas[(x - self.left) as usize]
    }

    /// rho_x = (1 - omega_x)/omega_x; zero at the reflection site.
    #[inline]
    pub fn rho(&self, x: i64) -> f64 {
        let w = self.omega(x);
        (1.0 - w) / w
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Checked accessor for the query-style interfaces.
    pub fn omega_checked(&self, x: i64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::OutOfWindow {
                x,
                left: self.left,
                right: self.right(),
            });
        }
        Ok(self.omega(x))
    }
}

/// Window margin left of the origin: max(50, ceil(10 ln n)).
pub fn default_margin(n: i64) -> i64 {
    let ln = if n > 1 { (n as f64).ln() } else { 0.0 };
    50i64.max((10.0 * ln).ceil() as i64)
}

/// Convenience draw of a single omega stream for estimator checks.
pub fn draw_omegas(law: &EnvironmentLaw, count: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, &[rng::purpose::ENV_P, count as u64]);
    (0..count).map(|_| law.sample_omega(&mut r)).collect()
}
