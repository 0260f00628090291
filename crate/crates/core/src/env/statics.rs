//! Static functionals of a fixed environment: the potential V and the
//! product/sum families Pi, W, R.
//!
//! V is a cumulative sum of log rho, so products Pi_{i,j} are evaluated as
//! exp of potential differences (log-space, sign-free). The sums W and R use
//! the stable one-pass recursions W_j = rho_j (1 + W_{j-1}) and
//! R_{i,j} = rho_i (1 + R_{i+1,j}) instead of naive product loops.

use crate::env::Environment;
use crate::error::{Error, Result};

/// Potential and prefix structures for one environment.
#[derive(Clone, Debug)]
pub struct EnvStatics {
    left: i64,
    right: i64,
    /// V(x) for x in [left, right+1]; V(left) = +inf because rho_left = 0.
    v: Vec<f64>,
    /// W_x for x in [left, right]; W_left = 0.
    w: Vec<f64>,
}

impl EnvStatics {
    pub fn new(env: &Environment) -> Self {
        let left = env.left();
        let right = env.right();
        let width = env.width();

        // V(0) = 0 and V increments by log rho_x going right. The cumulative
        // sum starts at left+1 because rho_left = 0; V(left) itself is +inf.
        let mut v = vec![0.0f64; width + 1];
        for x in (left + 1)..=right {
            let idx = (x - left) as usize;
            v[idx + 1] = v[idx] + env.rho(x).ln();
        }
        let anchor = v[(0 - left) as usize];
        for val in v.iter_mut().skip(1) {
            *val -= anchor;
        }
        v[0] = f64::INFINITY;

        let mut w = Vec::with_capacity(width);
        w.push(0.0f64);
        for x in (left + 1)..=right {
            let prev = *w.last().unwrap();
            w.push(env.rho(x) * (1.0 + prev));
        }

        Self { left, right, v, w }
    }

    pub fn left(&self) -> i64 {
        self.left
    }

    pub fn right(&self) -> i64 {
        self.right
    }

    fn check(&self, x: i64, lo: i64, hi: i64) -> Result<()> {
        if x < lo || x > hi {
            return Err(Error::OutOfWindow {
                x,
                left: lo,
                right: hi,
            });
        }
        Ok(())
    }

    /// Potential V(x), defined for x in [left, right+1]; V(left) = +inf.
    #[inline]
    pub fn v(&self, x: i64) -> f64 {
        self.v[(x - self.left) as usize]
    }

    pub fn v_checked(&self, x: i64) -> Result<f64> {
        self.check(x, self.left, self.right + 1)?;
        Ok(self.v(x))
    }

    /// W_j = sum_{left < k <= j} Pi_{k,j}; zero at the reflection site.
    #[inline]
    pub fn w(&self, j: i64) -> f64 {
        self.w[(j - self.left) as usize]
    }

    pub fn w_checked(&self, j: i64) -> Result<f64> {
        self.check(j, self.left, self.right)?;
        Ok(self.w(j))
    }

    /// log Pi_{i,j} = V(j+1) - V(i); -inf when the product covers the reflection.
    #[inline]
    pub fn log_pi(&self, i: i64, j: i64) -> f64 {
        debug_assert!(i <= j && i >= self.left && j <= self.right);
        self.v(j + 1) - self.v(i)
    }

    /// Pi_{i,j} = prod_{k=i}^{j} rho_k.
    pub fn pi(&self, i: i64, j: i64) -> Result<f64> {
        self.check(i, self.left, self.right)?;
        self.check(j, i, self.right)?;
        Ok(self.log_pi(i, j).exp())
    }

    /// R_{i,j} = sum_{k=i}^{j} Pi_{i,k}, via exp of potential differences.
    pub fn r(&self, i: i64, j: i64) -> Result<f64> {
        self.check(i, self.left, self.right)?;
        self.check(j, i, self.right)?;
        let vi = self.v(i);
        if vi.is_infinite() {
            return Ok(0.0);
        }
        let mut acc = 0.0;
        for k in i..=j {
            acc += (self.v(k + 1) - vi).exp();
        }
        Ok(acc)
    }

    /// All W values as a slice indexed from `left`.
    pub fn w_slice(&self) -> &[f64] {
        &self.w
    }

    /// All V values as a slice indexed from `left` (length width + 1).
    pub fn v_slice(&self) -> &[f64] {
        &self.v
    }
}
