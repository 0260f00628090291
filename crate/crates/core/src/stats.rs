//! Small statistical utilities: the standard normal CDF, empirical two-sample
//! Kolmogorov-Smirnov distance, and sample summaries used by the experiments.

use statrs::function::erf::erfc;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn sort_f64(xs: &mut [f64]) {
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
///
/// Handles ties (lattice-valued samples) by advancing both empirical CDFs
/// through every distinct value before comparing.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    sort_f64(&mut xs);
    sort_f64(&mut ys);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Empirical quantile (type-7 style linear interpolation) of an unsorted sample.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty() && (0.0..=1.0).contains(&q));
    let mut v = xs.to_vec();
    sort_f64(&mut v);
    let h = q * (v.len() as f64 - 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Sample skewness (biased, method-of-moments); used only for qualitative
/// asymmetry checks.
pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// Lag-k sample autocovariance of a stationary series.
pub fn autocovariance(xs: &[f64], k: usize) -> f64 {
    assert!(k < xs.len());
    let m = mean(xs);
    let n = xs.len() - k;
    (0..n).map(|i| (xs[i] - m) * (xs[i + k] - m)).sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_anchors() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        // Phi(1) = 0.841344746068543...
        assert!((normal_cdf(1.0) - 0.841_344_746_068_543).abs() < 1e-10);
        assert!((normal_cdf(-1.0) + normal_cdf(1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ks_two_sample_disjoint_is_one() {
        let a = [1.0, 2.0, 3.0];
        let b = [10.0, 11.0];
        assert!((ks_two_sample(&a, &b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ks_two_sample_identical_is_zero() {
        let a = [1.0, 2.0, 2.0, 3.0];
        assert!(ks_two_sample(&a, &a) < 1e-15);
    }

    #[test]
    fn ks_two_sample_ties() {
        // F_a puts 1/2 on {0,1}, F_b puts all mass on 0: sup diff = 1/2 at 0.
        let a = [0.0, 1.0];
        let b = [0.0, 0.0];
        assert!((ks_two_sample(&a, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((quantile(&xs, 0.0) - 1.0).abs() < 1e-15);
        assert!((quantile(&xs, 1.0) - 4.0).abs() < 1e-15);
        assert!((quantile(&xs, 0.5) - 2.5).abs() < 1e-15);
    }
}
