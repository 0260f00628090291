//! Environment laws: the distribution of a single site probability omega_0,
//! its derived quantities E[log rho_0] and E[rho_0^gamma] (rho = (1-omega)/omega),
//! and the tail index kappa = sup { gamma > 0 : E[rho_0^gamma] < 1 }.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};

/// Cap on the kappa search; a law whose E[rho^gamma] stays below 1 up to this
/// exponent is reported as kappa = +inf.
pub const KAPPA_CAP: f64 = 64.0;

/// Default absolute tolerance for the kappa bisection.
pub const KAPPA_TOL: f64 = 1e-9;

/// Supported families. Support must be contained in (0,1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LawKind {
    /// omega = omega_a with probability q, omega_b otherwise.
    TwoPoint { omega_a: f64, omega_b: f64, q: f64 },
    /// omega ~ Beta(a, b).
    Beta { a: f64, b: f64 },
    /// omega ~ Uniform(lo, hi) with (lo, hi) strictly inside (0,1).
    Uniform { lo: f64, hi: f64 },
}

/// An i.i.d. law for site probabilities, transient to the right.
#[derive(Clone, Debug)]
pub struct EnvironmentLaw {
    kind: LawKind,
    kappa_cache: OnceLock<f64>,
}

fn in_open_unit(x: f64) -> bool {
    x.is_finite() && x > 0.0 && x < 1.0
}

impl EnvironmentLaw {
    /// Validates support and transience (E[log rho] < 0, checked numerically).
    pub fn new(kind: LawKind) -> Result<Self> {
        match kind {
            LawKind::TwoPoint { omega_a, omega_b, q } => {
                if !in_open_unit(omega_a) {
                    return Err(Error::InvalidLaw(format!(
                        "omega_a = {omega_a} not in (0,1)"
                    )));
                }
                if !in_open_unit(omega_b) {
                    return Err(Error::InvalidLaw(format!(
                        "omega_b = {omega_b} not in (0,1)"
                    )));
                }
                if !(0.0..=1.0).contains(&q) || !q.is_finite() {
                    return Err(Error::InvalidLaw(format!("q = {q} not in [0,1]")));
                }
            }
            LawKind::Beta { a, b } => {
                if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
                    return Err(Error::InvalidLaw(format!(
                        "Beta parameters must be positive, got a = {a}, b = {b}"
                    )));
                }
            }
            LawKind::Uniform { lo, hi } => {
                if !(in_open_unit(lo) && in_open_unit(hi) && lo < hi) {
                    return Err(Error::InvalidLaw(format!(
                        "Uniform support ({lo}, {hi}) must satisfy 0 < lo < hi < 1"
                    )));
                }
            }
        }
        let law = Self {
            kind,
            kappa_cache: OnceLock::new(),
        };
        let elog = law.mean_log_rho()?;
        if !(elog < 0.0) {
            return Err(Error::NotTransient { elog });
        }
        Ok(law)
    }

    /// Constant environment omega = p, as a degenerate two-point law.
    pub fn constant(p: f64) -> Result<Self> {
        Self::new(LawKind::TwoPoint {
            omega_a: p,
            omega_b: p,
            q: 1.0,
        })
    }

    /// Two-point law on {omega_a, omega_b} with q solved so that kappa equals
    /// `target`: E[rho^target] = 1 requires rho_a < 1 < rho_b.
    pub fn two_point_with_kappa(omega_a: f64, omega_b: f64, target: f64) -> Result<Self> {
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::InvalidLaw(format!(
                "kappa target {target} must be positive and finite"
            )));
        }
        if !(in_open_unit(omega_a) && in_open_unit(omega_b)) {
            return Err(Error::InvalidLaw(
                "two-point omegas must lie in (0,1)".into(),
            ));
        }
        let ra = (1.0 - omega_a) / omega_a;
        let rb = (1.0 - omega_b) / omega_b;
        if !(ra < 1.0 && rb > 1.0) {
            return Err(Error::InvalidLaw(format!(
                "kappa target needs rho_a < 1 < rho_b, got rho_a = {ra}, rho_b = {rb}"
            )));
        }
        // q * ra^t + (1-q) * rb^t = 1
        let (pa, pb) = (ra.powf(target), rb.powf(target));
        let q = (1.0 - pb) / (pa - pb);
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidLaw(format!(
                "kappa target {target} unreachable for these omegas (q = {q})"
            )));
        }
        Self::new(LawKind::TwoPoint {
            omega_a,
            omega_b,
            q,
        })
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    /// E[log rho_0]; closed form where available, quadrature for Uniform.
    pub fn mean_log_rho(&self) -> Result<f64> {
        match self.kind {
            LawKind::TwoPoint { omega_a, omega_b, q } => {
                let la = ((1.0 - omega_a) / omega_a).ln();
                let lb = ((1.0 - omega_b) / omega_b).ln();
                Ok(q * la + (1.0 - q) * lb)
            }
            // log rho = log(1-w) - log w; E[log w] = psi(a) - psi(a+b) for Beta(a,b).
            LawKind::Beta { a, b } => Ok(digamma(b) - digamma(a)),
            LawKind::Uniform { lo, hi } => {
                let f = |w: f64| ((1.0 - w) / w).ln();
                adaptive_simpson(&f, lo, hi, 1e-12).map(|v| v / (hi - lo))
            }
        }
    }

    /// E[rho_0^gamma]; +inf when the moment diverges (Beta with gamma >= a).
    pub fn mean_rho_pow(&self, gamma: f64) -> Result<f64> {
        assert!(gamma >= 0.0);
        match self.kind {
            LawKind::TwoPoint { omega_a, omega_b, q } => {
                let ra = (1.0 - omega_a) / omega_a;
                let rb = (1.0 - omega_b) / omega_b;
                Ok(q * ra.powf(gamma) + (1.0 - q) * rb.powf(gamma))
            }
            LawKind::Beta { a, b } => {
                // E[(1-w)^g w^-g] = Gamma(a-g) Gamma(b+g) / (Gamma(a) Gamma(b))
                if gamma >= a {
                    return Ok(f64::INFINITY);
                }
                Ok((ln_gamma(a - gamma) + ln_gamma(b + gamma) - ln_gamma(a) - ln_gamma(b)).exp())
            }
            LawKind::Uniform { lo, hi } => {
                let f = move |w: f64| ((1.0 - w) / w).powf(gamma);
                adaptive_simpson(&f, lo, hi, 1e-12).map(|v| v / (hi - lo))
            }
        }
    }

    /// E[rho_0], used for window-margin heuristics.
    pub fn mean_rho(&self) -> f64 {
        self.mean_rho_pow(1.0).unwrap_or(f64::INFINITY)
    }

    /// Tail index kappa = sup { gamma > 0 : E[rho^gamma] < 1 }, cached.
    ///
    /// Brackets from 1e-6 by doubling, then bisects to [`KAPPA_TOL`]; reports
    /// +inf when E[rho^gamma] stays below 1 up to [`KAPPA_CAP`].
    pub fn kappa(&self) -> f64 {
        *self
            .kappa_cache
            .get_or_init(|| self.kappa_with_tol(KAPPA_TOL).expect("law validated at construction"))
    }

    /// Kappa with an explicit absolute tolerance (uncached path).
    pub fn kappa_with_tol(&self, tol: f64) -> Result<f64> {
        let f = |g: f64| self.mean_rho_pow(g);
        // E[rho^g] < 1 for small g > 0 since E[log rho] < 0; expand until >= 1.
        let mut lo = 1e-6;
        if f(lo)? >= 1.0 {
            // Extremely steep law; kappa is below 1e-6.
            let mut hi = lo;
            lo = 0.0;
            let mut iter = 0;
            while hi - lo > tol && iter < 200 {
                let mid = 0.5 * (lo + hi);
                if f(mid)? < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                iter += 1;
            }
            return Ok(0.5 * (lo + hi));
        }
        let mut hi = 2.0 * lo;
        while hi < KAPPA_CAP && f(hi)? < 1.0 {
            lo = hi;
            hi *= 2.0;
        }
        if hi >= KAPPA_CAP {
            if f(KAPPA_CAP)? < 1.0 {
                return Ok(f64::INFINITY);
            }
            lo = lo.max(KAPPA_CAP / 2.0);
            hi = KAPPA_CAP;
        }
        let mut iter = 0;
        while hi - lo > tol && iter < 200 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iter += 1;
        }
        Ok(0.5 * (lo + hi))
    }

    /// Draw one site probability.
    pub fn sample_omega<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            LawKind::TwoPoint { omega_a, omega_b, q } => {
                if rng.random::<f64>() < q {
                    omega_a
                } else {
                    omega_b
                }
            }
            LawKind::Beta { a, b } => {
                let d = rand_distr::Beta::new(a, b).expect("validated");
                // Guard the open-support invariant against floating underflow.
                d.sample(rng).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
            }
            LawKind::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }

    /// Compact one-line descriptor used in records headers.
    pub fn describe(&self) -> String {
        match self.kind {
            LawKind::TwoPoint { omega_a, omega_b, q } => {
                format!("two-point(omega_a={omega_a},omega_b={omega_b},q={q})")
            }
            LawKind::Beta { a, b } => format!("beta(a={a},b={b})"),
            LawKind::Uniform { lo, hi } => format!("uniform(lo={lo},hi={hi})"),
        }
    }
}

/// Adaptive Simpson quadrature on [a, b]; errors out instead of silently
/// returning when the recursion depth is exhausted.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> std::result::Result<f64, f64> {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(delta.abs() / 15.0);
        }
        let l = recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1);
        let r = recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1);
        match (l, r) {
            (Ok(x), Ok(y)) => Ok(x + y),
            (Err(e), Ok(_)) | (Ok(_), Err(e)) => Err(e),
            (Err(e1), Err(e2)) => Err(e1 + e2),
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
        .map_err(|reached| Error::QuadratureNonConvergence { tol, reached })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn two_point(q: f64) -> EnvironmentLaw {
        EnvironmentLaw::new(LawKind::TwoPoint {
            omega_a: 2.0 / 3.0,
            omega_b: 1.0 / 3.0,
            q,
        })
        .unwrap()
    }

    #[test]
    fn kappa_two_point_q_eight_ninths_is_three() {
        // rho in {1/2, 2}; E[rho^g] = q 2^-g + (1-q) 2^g = 1 at 2^g = q/(1-q),
        // so kappa = log2(q/(1-q)) = log2(8) = 3 exactly.
        let law = two_point(8.0 / 9.0);
        assert!((law.kappa() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn kappa_two_point_q_for_two_and_half() {
        let law = two_point(0.8498);
        let exact = (0.8498f64 / 0.1502).log2();
        assert!((law.kappa() - exact).abs() < 1e-8);
        assert!((law.kappa() - 2.5).abs() < 1e-3);
    }

    #[test]
    fn kappa_solved_q_hits_target() {
        let law = EnvironmentLaw::two_point_with_kappa(2.0 / 3.0, 1.0 / 3.0, 2.5).unwrap();
        assert!((law.kappa() - 2.5).abs() < 1e-8);
        if let LawKind::TwoPoint { q, .. } = law.kind() {
            // q = 2^2.5 / (1 + 2^2.5)
            let expect = 2f64.powf(2.5) / (1.0 + 2f64.powf(2.5));
            assert!((q - expect).abs() < 1e-12);
        } else {
            panic!("wrong kind");
        }
    }

    #[test]
    fn kappa_constant_law_is_infinite() {
        // rho = 1/3 < 1 so E[rho^g] = 3^-g < 1 for every g.
        let law = EnvironmentLaw::constant(0.75).unwrap();
        assert!(law.kappa().is_infinite());
    }

    #[test]
    fn rejects_non_transient_laws() {
        // Symmetric two point: E[log rho] = 0.
        let r = EnvironmentLaw::new(LawKind::TwoPoint {
            omega_a: 2.0 / 3.0,
            omega_b: 1.0 / 3.0,
            q: 0.5,
        });
        assert!(matches!(r, Err(Error::NotTransient { .. })));
        // Beta(2,2): E[log rho] = psi(2) - psi(2) = 0.
        assert!(EnvironmentLaw::new(LawKind::Beta { a: 2.0, b: 2.0 }).is_err());
        // Beta(2,5) drifts left: E[log rho] = psi(5) - psi(2) > 0.
        assert!(EnvironmentLaw::new(LawKind::Beta { a: 2.0, b: 5.0 }).is_err());
    }

    #[test]
    fn rejects_bad_support() {
        assert!(EnvironmentLaw::new(LawKind::TwoPoint {
            omega_a: 1.0,
            omega_b: 0.5,
            q: 0.5
        })
        .is_err());
        assert!(EnvironmentLaw::new(LawKind::Uniform { lo: 0.0, hi: 0.9 }).is_err());
        assert!(EnvironmentLaw::new(LawKind::Uniform { lo: 0.9, hi: 0.5 }).is_err());
    }

    #[test]
    fn beta_law_kappa_matches_closed_form_root() {
        // Beta(4,1): E[log rho] = psi(1) - psi(4) < 0. kappa solves
        // Gamma(4-g)Gamma(1+g) = Gamma(4)Gamma(1).
        let law = EnvironmentLaw::new(LawKind::Beta { a: 4.0, b: 1.0 }).unwrap();
        let k = law.kappa();
        assert!(k > 0.0 && k < 4.0);
        let check = law.mean_rho_pow(k).unwrap();
        assert!((check - 1.0).abs() < 1e-6, "E[rho^kappa] = {check}");
    }

    #[test]
    fn uniform_law_quadrature_consistency() {
        // Uniform(0.5, 0.9): rho <= 1 everywhere, so kappa = +inf.
        let law = EnvironmentLaw::new(LawKind::Uniform { lo: 0.5, hi: 0.9 }).unwrap();
        assert!(law.kappa().is_infinite());
        // Uniform(0.4, 0.9): rho_max = 1.5 > 1 gives a finite kappa with
        // E[rho^kappa] = 1 at the root.
        let law = EnvironmentLaw::new(LawKind::Uniform { lo: 0.4, hi: 0.9 }).unwrap();
        let k = law.kappa();
        assert!(k.is_finite() && k > 0.0);
        assert!((law.mean_rho_pow(k).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn beta_sampler_mean_matches() {
        // Beta(5,2) is transient (E[log rho] = psi(2) - psi(5) < 0); mean omega = 5/7.
        let law = EnvironmentLaw::new(LawKind::Beta { a: 5.0, b: 2.0 }).unwrap();
        let mut r = rng::stream(11, &[rng::purpose::ENV_P]);
        let n = 200_000;
        let m: f64 = (0..n).map(|_| law.sample_omega(&mut r)).sum::<f64>() / n as f64;
        let sd = (5.0f64 * 2.0 / (49.0 * 8.0)).sqrt();
        assert!((m - 5.0 / 7.0).abs() < 4.0 * sd / (n as f64).sqrt());
    }
}
