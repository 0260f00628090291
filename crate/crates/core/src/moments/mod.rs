//! Exact quenched moments of crossing times.
//!
//! tau_i is the time for a walk at i-1 to first reach i. Under the quenched
//! law the tau_i are independent, and their moments satisfy one-directional
//! recursions in the site index obtained from the first-step decomposition
//! tau_i = 1 + 1{X_1 = -1}(tau_{i-1} + tau_i'):
//!
//!   E[tau_i]        e_i  = 1 + 2 W_{i-1}            (= 1/omega_{i-1} + rho_{i-1} e_{i-1})
//!   Var(tau_i)      v_i  = 4(W_{i-1} + W_{i-1}^2) + 8 sum_{j<i-1} Pi_{j+1,i-1}(W_j + W_j^2)
//!   E[tau_i^3]      t3_i = 1/omega_{i-1} + 6 e_i v_i + rho_{i-1} t3_{i-1}
//!
//! plus a general raw-moment recursion for orders up to 5. All profiles start
//! from the deterministic base (1, 0, 1, 1, 1) at the site adjacent to the
//! reflection, where tau is identically 1.
//!
//! Two published index conventions exist for the W-sum in the mean and the
//! inner product of the variance; they differ by one site. The default
//! [`WConvention::PrevSite`] is the one validated by the constant-environment
//! closed forms (e = 1/(2p-1), v = 4p(1-p)/(2p-1)^3) and by Monte Carlo; the
//! [`WConvention::SameSite`] variant is retained behind this flag for audit.

pub mod block;

pub use block::{reflected_block_means, BlockMoments};

use crate::env::{Environment, EnvStatics};
use crate::error::{Error, Result};

/// Index convention for the W-sums entering the mean/variance formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WConvention {
    /// e_i = 1 + 2 W_{i-1}, inner product Pi_{j+1,i-1}. Oracle-validated.
    #[default]
    PrevSite,
    /// e_i = 1 + 2 W_i, inner product Pi_{j+1,i}. Audit-only variant.
    SameSite,
}

/// Per-site exact quenched moments of tau_i for i in (left, right + 1].
///
/// The crossing into site right+1 only reads omega up to `right`, so the
/// profile extends one site past the window; Q-sampled environments end on a
/// ladder point there.
#[derive(Clone, Debug)]
pub struct MomentProfile {
    left: i64,
    /// Last covered site (= environment right + 1).
    right: i64,
    e: Vec<f64>,
    v: Vec<f64>,
    t3: Vec<f64>,
    c3: Vec<f64>,
    /// Raw moments of orders 2..=5; populated by [`MomentProfile::with_high_orders`].
    raw: Option<[Vec<f64>; 4]>,
    /// Upper bound on E|tau - e|^5 from the raw-moment expansion.
    b5: Option<Vec<f64>>,
    /// Cumulative sums from site left+1 (index 0 = empty sum).
    cum_e: Vec<f64>,
    cum_v: Vec<f64>,
    cum_t3: Vec<f64>,
    cum_c3: Vec<f64>,
    cum_v2: Vec<f64>,
    cum_b5: Option<Vec<f64>>,
}

impl MomentProfile {
    /// Mean/variance/third/centered-third profiles under the default
    /// convention.
    pub fn compute(env: &Environment, statics: &EnvStatics) -> Self {
        Self::compute_with(env, statics, WConvention::PrevSite, false)
    }

    /// Profiles including raw moments up to order 5 and the fifth-moment
    /// bound.
    pub fn with_high_orders(env: &Environment, statics: &EnvStatics) -> Self {
        Self::compute_with(env, statics, WConvention::PrevSite, true)
    }

    pub fn compute_with(
        env: &Environment,
        statics: &EnvStatics,
        conv: WConvention,
        high_orders: bool,
    ) -> Self {
        let left = env.left();
        let last = env.right() + 1;
        let width = env.width(); // sites left+1 ..= right+1

        let mut e = Vec::with_capacity(width);
        let mut v = Vec::with_capacity(width);
        let mut t3 = Vec::with_capacity(width);
        let mut c3 = Vec::with_capacity(width);

        // Variance accumulator S_i = sum_{j<i-1} Pi_{j+1,i-1}(W_j + W_j^2),
        // advanced by S_{i+1} = rho_i (S_i + W_{i-1} + W_{i-1}^2).
        let mut s = 0.0f64;
        let mut t3_prev = 0.0f64; // multiplied by rho_left = 0 at the base site
        for i in (left + 1)..=last {
            let wp = statics.w(i - 1);
            let ei = match conv {
                WConvention::PrevSite => 1.0 + 2.0 * wp,
                // The printed variant needs W one site past the window at the
                // final site; reuse the recursion's value there.
                WConvention::SameSite => {
                    if i <= env.right() {
                        1.0 + 2.0 * statics.w(i)
                    } else {
                        1.0 + 2.0 * wp
                    }
                }
            };
            let inner = match conv {
                WConvention::PrevSite => s,
                // Printed variant: inner product Pi_{j+1,i} = rho_i Pi_{j+1,i-1}.
                WConvention::SameSite => {
                    if i <= env.right() {
                        env.rho(i) * s
                    } else {
                        s
                    }
                }
            };
            let vi = 4.0 * (wp + wp * wp) + 8.0 * inner;
            let t3i = 1.0 / env.omega(i - 1) + 6.0 * ei * vi + env.rho(i - 1) * t3_prev;
            let c3i = t3i - 3.0 * vi * ei - ei * ei * ei;
            e.push(ei);
            v.push(vi);
            t3.push(t3i);
            c3.push(c3i);
            t3_prev = t3i;
            if i <= env.right() {
                s = env.rho(i) * (s + wp + wp * wp);
            }
        }

        let (raw, b5) = if high_orders {
            let (raw, b5) = raw_moment_profiles(env);
            (Some(raw), Some(b5))
        } else {
            (None, None)
        };

        let cum = |xs: &[f64]| {
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(xs.len() + 1);
            out.push(0.0);
            for x in xs {
                acc += x;
                out.push(acc);
            }
            out
        };
        let cum_e = cum(&e);
        let cum_v = cum(&v);
        let cum_t3 = cum(&t3);
        let cum_c3 = cum(&c3);
        let v2: Vec<f64> = v.iter().map(|x| x * x).collect();
        let cum_v2 = cum(&v2);
        let cum_b5 = b5.as_ref().map(|b| cum(b));

        Self {
            left,
            right: last,
            e,
            v,
            t3,
            c3,
            raw,
            b5,
            cum_e,
            cum_v,
            cum_t3,
            cum_c3,
            cum_v2,
            cum_b5,
        }
    }

    pub fn left(&self) -> i64 {
        self.left
    }

    pub fn right(&self) -> i64 {
        self.right
    }

    #[inline]
    fn idx(&self, i: i64) -> usize {
        debug_assert!(i > self.left && i <= self.right, "site {i} out of profile");
        (i - self.left - 1) as usize
    }

    /// E[tau_i].
    pub fn e(&self, i: i64) -> f64 {
        self.e[self.idx(i)]
    }

    /// Var(tau_i).
    pub fn v(&self, i: i64) -> f64 {
        self.v[self.idx(i)]
    }

    /// E[tau_i^3].
    pub fn t3(&self, i: i64) -> f64 {
        self.t3[self.idx(i)]
    }

    /// Centered third moment E[(tau_i - e_i)^3].
    pub fn c3(&self, i: i64) -> f64 {
        self.c3[self.idx(i)]
    }

    /// Raw m-th moment, m in [1,5]. Orders above 3 require
    /// [`MomentProfile::with_high_orders`].
    pub fn raw_moment(&self, i: i64, m: u32) -> Result<f64> {
        if !(i > self.left && i <= self.right) {
            return Err(Error::OutOfWindow {
                x: i,
                left: self.left + 1,
                right: self.right,
            });
        }
        match m {
            1 => Ok(self.e(i)),
            2 => Ok(self.v(i) + self.e(i) * self.e(i)),
            3 => Ok(self.t3(i)),
            4 | 5 => {
                let raw = self.raw.as_ref().ok_or(Error::MomentOrder { m })?;
                Ok(raw[(m - 2) as usize][self.idx(i)])
            }
            _ => Err(Error::MomentOrder { m }),
        }
    }

    /// Upper bound on E|tau_i - e_i|^5 (raw-moment expansion of
    /// E[(tau+e)(tau-e)^4]).
    pub fn abs_central5_bound(&self, i: i64) -> Result<f64> {
        let b5 = self.b5.as_ref().ok_or(Error::MomentOrder { m: 5 })?;
        Ok(b5[self.idx(i)])
    }

    fn range_sum(cum: &[f64], left: i64, a: i64, b: i64) -> f64 {
        // Sum over sites i in (a, b]; cum index k covers sites left+1 ..= left+k.
        let lo = (a - left).max(0) as usize;
        let hi = (b - left).max(0) as usize;
        cum[hi] - cum[lo]
    }

    /// E[T_n] = sum of e_i over i in 1..=n.
    pub fn sum_e(&self, n: i64) -> f64 {
        Self::range_sum(&self.cum_e, self.left, 0, n)
    }

    /// Var(T_n) = sum of v_i over i in 1..=n.
    pub fn sum_v(&self, n: i64) -> f64 {
        Self::range_sum(&self.cum_v, self.left, 0, n)
    }

    pub fn sum_t3(&self, n: i64) -> f64 {
        Self::range_sum(&self.cum_t3, self.left, 0, n)
    }

    pub fn sum_c3(&self, n: i64) -> f64 {
        Self::range_sum(&self.cum_c3, self.left, 0, n)
    }

    pub fn sum_v2(&self, n: i64) -> f64 {
        Self::range_sum(&self.cum_v2, self.left, 0, n)
    }

    pub fn sum_b5(&self, n: i64) -> Result<f64> {
        let cum = self.cum_b5.as_ref().ok_or(Error::MomentOrder { m: 5 })?;
        Ok(Self::range_sum(cum, self.left, 0, n))
    }

    /// Sites carried by the profile, in order.
    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        (self.left + 1)..=self.right
    }
}

/// Raw moments of orders 2..=5 by expanding
/// E[(1 + 1{left step}(tau_{i-1} + tau_i'))^m]; the unknown top moment enters
/// with coefficient (1 - omega_{i-1}) < 1, so each site solves a well-posed
/// scalar equation. Returns ([m2, m3, m4, m5], b5).
fn raw_moment_profiles(env: &Environment) -> ([Vec<f64>; 4], Vec<f64>) {
    const MAX_M: usize = 5;
    // Pascal triangle up to row 5.
    let mut choose = [[0f64; MAX_M + 1]; MAX_M + 1];
    for n in 0..=MAX_M {
        choose[n][0] = 1.0;
        choose[n][n] = 1.0;
        for k in 1..n {
            choose[n][k] = choose[n - 1][k - 1] + choose[n - 1][k];
        }
    }

    let left = env.left();
    let last = env.right() + 1;
    let width = env.width();
    let mut m2 = Vec::with_capacity(width);
    let mut m3 = Vec::with_capacity(width);
    let mut m4 = Vec::with_capacity(width);
    let mut m5 = Vec::with_capacity(width);
    let mut b5 = Vec::with_capacity(width);

    // a_prev[j] = E[tau_{i-1}^j]; the reflection-adjacent base is handled by
    // rho_left = 0, which zeroes every use of a_prev at the first site.
    let mut a_prev = [1.0f64; MAX_M + 1];
    for i in (left + 1)..=last {
        let omega = env.omega(i - 1);
        let barw = 1.0 - omega;
        let mut a = [1.0f64; MAX_M + 1];
        for m in 1..=MAX_M {
            // conv(k) without the unknown a[m] (which sits at k = m, j = 0).
            let mut rest = 0.0;
            for k in 1..=m {
                let mut conv = 0.0;
                let j_lo = if k == m { 1 } else { 0 };
                for j in j_lo..=k {
                    conv += choose[k][j] * a_prev[j] * a[k - j];
                }
                rest += choose[m][k] * conv;
            }
            a[m] = (1.0 + barw * rest) / omega;
        }
        m2.push(a[2]);
        m3.push(a[3]);
        m4.push(a[4]);
        m5.push(a[5]);
        let e = a[1];
        // E|t-e|^5 <= E[(t+e)(t-e)^4] = m5 - 3 e m4 + 2 e^2 m3 + 2 e^3 m2 - 2 e^5.
        b5.push(a[5] - 3.0 * e * a[4] + 2.0 * e * e * a[3] + 2.0 * e * e * e * a[2]
            - 2.0 * e.powi(5));
        a_prev = a;
    }
    ([m2, m3, m4, m5], b5)
}
