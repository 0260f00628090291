//! Desk-scale rate experiments.
//!
//! Almost-sure asymptotics (liminf = 0, limsup = infinity) cannot be observed
//! as numbers; the experiments render them as falsifiable finite-n statistics:
//! windowed monotone trends of scaled Kolmogorov distances, distributional
//! stabilization of scaled block-moment sums, tail-index recovery, and
//! interquartile shrinkage of normalized maxima sums.
//!
//! Every task derives its random stream from (master seed, replica, n,
//! purpose), so results are independent of scheduling and worker count.

use rayon::prelude::*;

use crate::env::{Environment, EnvStatics};
use crate::env::law::EnvironmentLaw;
use crate::env::tail::{default_k_order, hill_tail_index};
use crate::error::{Error, Result};
use crate::moments::{block::block_means, BlockMoments, MomentProfile};
use crate::ratelab::{be_upper, stein_lower, RateScaling, SteinPieces, DEFAULT_BE_CONSTANT};
use crate::rng;
use crate::stats;
use crate::walk::ks::{ks_to_normal, KsMethod, KsRecord};
use crate::walk::StepBudget;

// ---------------------------------------------------------------------------
// rate experiment
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct RateOptions {
    pub mc_samples: usize,
    pub be_constant: f64,
    pub step_budget: u64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            mc_samples: crate::walk::ks::DEFAULT_MC_SAMPLES,
            be_constant: DEFAULT_BE_CONSTANT,
            step_budget: u64::MAX,
        }
    }
}

/// Scaled KS sequence along the grid for one replica environment.
#[derive(Clone, Debug)]
pub struct RateSeries {
    pub env_seed: u64,
    pub n_grid: Vec<i64>,
    pub ks: Vec<f64>,
    pub scaled: Vec<f64>,
    pub be_upper: Vec<f64>,
    pub stein: Vec<SteinPieces>,
    pub floor: Vec<f64>,
}

/// Windowed min/max trend and cross-replica band statistics.
#[derive(Clone, Debug)]
pub struct OscillationSummary {
    /// Per replica: per-window minima of the scaled KS.
    pub window_minima: Vec<Vec<f64>>,
    /// Per replica: per-window maxima.
    pub window_maxima: Vec<Vec<f64>>,
    /// Per replica: minima nonincreasing AND maxima nondecreasing.
    pub trend_pass: Vec<bool>,
    pub trend_fraction: f64,
    /// Band [0.5 min, 2 max] fitted across replicas at the smallest n.
    pub band_lo: f64,
    pub band_hi: f64,
    /// Fraction of replicas inside the band at each grid point.
    pub band_fraction: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RateResult {
    pub kappa: f64,
    pub scaling: RateScaling,
    pub series: Vec<RateSeries>,
    pub oscillation: OscillationSummary,
    /// Hard invariants: BE bound >= KS and lattice floor <= KS everywhere.
    pub be_dominates: bool,
    pub floor_dominated: bool,
}

/// Split grid indices into three contiguous windows, sizes as equal as
/// possible (earlier windows take the remainder).
pub fn three_windows(len: usize) -> [std::ops::Range<usize>; 3] {
    let base = len / 3;
    let rem = len % 3;
    let s1 = base + usize::from(rem > 0);
    let s2 = base + usize::from(rem > 1);
    [0..s1, s1..s1 + s2, s1 + s2..len]
}

/// Scaled-KS rate experiment across replicas of one law.
pub fn rate_experiment(
    law: &EnvironmentLaw,
    n_grid: &[i64],
    replicas: usize,
    master_seed: u64,
    opts: &RateOptions,
) -> Result<RateResult> {
    if n_grid.len() < 4 {
        return Err(Error::GridTooSmall {
            got: n_grid.len(),
            need: 4,
        });
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] < 1 {
        return Err(Error::InvalidWindow(
            "n grid must be strictly increasing and positive".into(),
        ));
    }
    let kappa = law.kappa();
    let scaling = RateScaling::for_kappa(kappa);
    let max_n = *n_grid.last().unwrap();
    let budget = StepBudget::new(opts.step_budget);

    let mut series = Vec::with_capacity(replicas);
    for rep in 0..replicas {
        let env_seed = rng::stream_seed(master_seed, &[rep as u64]);
        let env = Environment::sample_p_auto(law, max_n, env_seed)?;
        let st = EnvStatics::new(&env);
        let prof = MomentProfile::with_high_orders(&env, &st);
        // Parallelism lives inside ks_to_normal (chunked Monte Carlo); the
        // profile is shared read-only across grid points.
        let recs: Vec<(KsRecord, f64, SteinPieces)> = n_grid
            .iter()
            .map(|&n| {
                let rec = ks_to_normal(
                    &env,
                    &prof,
                    n,
                    KsMethod::MonteCarlo {
                        samples: opts.mc_samples,
                    },
                    master_seed,
                    &budget,
                )?;
                let be = be_upper(&prof, n, opts.be_constant)?;
                let stein = stein_lower(&prof, n)?;
                Ok((rec, be, stein))
            })
            .collect::<Result<_>>()?;
        series.push(RateSeries {
            env_seed,
            n_grid: n_grid.to_vec(),
            ks: recs.iter().map(|(r, _, _)| r.ks).collect(),
            scaled: recs
                .iter()
                .map(|(r, _, _)| scaling.apply(r.n, r.ks))
                .collect(),
            be_upper: recs.iter().map(|(_, b, _)| *b).collect(),
            stein: recs.iter().map(|(_, _, s)| *s).collect(),
            floor: recs.iter().map(|(r, _, _)| r.floor).collect(),
        });
    }

    let oscillation = summarize_oscillation(&series);
    let be_dominates = series
        .iter()
        .all(|s| s.ks.iter().zip(&s.be_upper).all(|(k, b)| k <= b));
    let floor_dominated = series
        .iter()
        .all(|s| s.ks.iter().zip(&s.floor).all(|(k, f)| f <= k));
    Ok(RateResult {
        kappa,
        scaling,
        series,
        oscillation,
        be_dominates,
        floor_dominated,
    })
}

fn summarize_oscillation(series: &[RateSeries]) -> OscillationSummary {
    let len = series.first().map(|s| s.scaled.len()).unwrap_or(0);
    let windows = three_windows(len);
    let mut window_minima = Vec::with_capacity(series.len());
    let mut window_maxima = Vec::with_capacity(series.len());
    let mut trend_pass = Vec::with_capacity(series.len());
    for s in series {
        let mins: Vec<f64> = windows
            .iter()
            .map(|w| s.scaled[w.clone()].iter().copied().fold(f64::MAX, f64::min))
            .collect();
        let maxs: Vec<f64> = windows
            .iter()
            .map(|w| s.scaled[w.clone()].iter().copied().fold(f64::MIN, f64::max))
            .collect();
        let ok = mins.windows(2).all(|p| p[0] >= p[1])
            && maxs.windows(2).all(|p| p[0] <= p[1]);
        window_minima.push(mins);
        window_maxima.push(maxs);
        trend_pass.push(ok);
    }
    let trend_fraction = if trend_pass.is_empty() {
        0.0
    } else {
        trend_pass.iter().filter(|b| **b).count() as f64 / trend_pass.len() as f64
    };

    let at0: Vec<f64> = series.iter().map(|s| s.scaled[0]).collect();
    let band_lo = 0.5 * at0.iter().copied().fold(f64::MAX, f64::min);
    let band_hi = 2.0 * at0.iter().copied().fold(f64::MIN, f64::max);
    let band_fraction: Vec<f64> = (0..len)
        .map(|j| {
            series
                .iter()
                .filter(|s| s.scaled[j] >= band_lo && s.scaled[j] <= band_hi)
                .count() as f64
                / series.len().max(1) as f64
        })
        .collect();
    OscillationSummary {
        window_minima,
        window_maxima,
        trend_pass,
        trend_fraction,
        band_lo,
        band_hi,
        band_fraction,
    }
}

// ---------------------------------------------------------------------------
// stable-sum experiment
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct StableOptions {
    /// Quantile of the largest-n sample used as the epsilon probe.
    pub eps_quantile: f64,
}

impl Default for StableOptions {
    fn default() -> Self {
        Self { eps_quantile: 0.1 }
    }
}

/// One replica's scaled block-moment sum n^{-3/kappa} sum mu_i^3.
#[derive(Clone, Copy, Debug)]
pub struct StableSumSample {
    pub n: usize,
    pub replica: u64,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct StableResult {
    pub kappa: f64,
    /// Stable index of the limiting law.
    pub alpha: f64,
    pub n_values: Vec<usize>,
    /// samples[i] holds the replicas for n_values[i].
    pub samples: Vec<Vec<f64>>,
    /// Two-sample KS between consecutive n values.
    pub pair_ks: Vec<f64>,
    /// Epsilon probe: eps and P(value < eps) at each n.
    pub eps: f64,
    pub prob_below_eps: Vec<f64>,
    /// Sample skewness at the largest n (totally asymmetric limit: strongly
    /// positive).
    pub skewness_at_max_n: f64,
}

/// Distributional stabilization of n^{-3/kappa} sum mu^3 under Q.
pub fn stable_sum_experiment(
    law: &EnvironmentLaw,
    n_values: &[usize],
    replicas: usize,
    master_seed: u64,
    opts: &StableOptions,
) -> Result<StableResult> {
    let kappa = law.kappa();
    if !(kappa > 0.0 && kappa < 3.0) {
        return Err(Error::KappaOutOfRange {
            kappa,
            need: "stable-sum experiment needs kappa in (0,3)",
        });
    }
    if n_values.is_empty() || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidWindow(
            "n values must be strictly increasing".into(),
        ));
    }
    let alpha = kappa / 3.0;
    let mut samples = Vec::with_capacity(n_values.len());
    for (ni, &n) in n_values.iter().enumerate() {
        let values: Vec<f64> = (0..replicas)
            .into_par_iter()
            .map(|rep| {
                let seed =
                    rng::stream_seed(master_seed, &[ni as u64, rep as u64, 0x57AB]);
                let (env, decomp) = Environment::sample_q(law, n, seed)?;
                let mu = block_means(&env, &decomp);
                let sum3: f64 = mu.iter().map(|m| m * m * m).sum();
                Ok(sum3 / (n as f64).powf(3.0 / kappa))
            })
            .collect::<Result<_>>()?;
        samples.push(values);
    }
    let pair_ks: Vec<f64> = samples
        .windows(2)
        .map(|w| stats::ks_two_sample(&w[0], &w[1]))
        .collect();
    let eps = stats::quantile(samples.last().unwrap(), opts.eps_quantile);
    let prob_below_eps: Vec<f64> = samples
        .iter()
        .map(|xs| xs.iter().filter(|v| **v < eps).count() as f64 / xs.len() as f64)
        .collect();
    let skewness_at_max_n = stats::skewness(samples.last().unwrap());
    Ok(StableResult {
        kappa,
        alpha,
        n_values: n_values.to_vec(),
        samples,
        pair_ks,
        eps,
        prob_below_eps,
        skewness_at_max_n,
    })
}

// ---------------------------------------------------------------------------
// tail experiment
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct TailOptions {
    /// Order-statistic count for the Hill estimates; None -> n_blocks/100.
    pub k_order: Option<usize>,
    /// Checkpoints for the kappa = 3 truncated-moment asymptotics.
    pub truncation_ns: [usize; 3],
    /// Maximum autocovariance lag reported.
    pub max_lag: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            k_order: None,
            truncation_ns: [1 << 12, 1 << 14, 1 << 16],
            max_lag: 20,
        }
    }
}

/// Truncated-moment statistics at one n (kappa = 3 regime).
#[derive(Clone, Copy, Debug)]
pub struct TruncatedMomentRow {
    pub n: usize,
    pub r_n: f64,
    /// E[mu^3 ^ r_n] / log n.
    pub mean_over_log: f64,
    /// Var[mu^3 ^ r_n] / (n sqrt(log n)).
    pub var_over_nlog: f64,
    /// var_over_nlog / (2 mean_over_log): -> 1 under the shared constant.
    pub consistency_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct TailReport {
    pub kappa: f64,
    pub n_blocks: usize,
    pub low_power: bool,
    pub hill_m: f64,
    pub hill_mu: f64,
    pub hill_s2: f64,
    /// (1/(n log n)) sum M^3 at dyadic prefixes of the block stream.
    pub m3_lln_checkpoints: Vec<(usize, f64)>,
    /// kappa = 3 truncated-moment rows (empty otherwise).
    pub truncated: Vec<TruncatedMomentRow>,
    /// Lag-k sample autocovariances of mu^3 ^ r_{n_blocks}, k = 0..=max_lag.
    pub mu3_autocov: Vec<f64>,
}

/// Tail-exponent recovery and kappa = 3 asymptotics over one long Q stream.
pub fn tail_experiment(
    law: &EnvironmentLaw,
    n_blocks: usize,
    master_seed: u64,
    opts: &TailOptions,
) -> Result<TailReport> {
    if n_blocks < 2 {
        return Err(Error::DegenerateSamples("need at least 2 blocks".into()));
    }
    let kappa = law.kappa();
    let low_power = n_blocks < 10_000;
    let seed = rng::stream_seed(master_seed, &[0x7A11]);
    let (env, decomp) = Environment::sample_q(law, n_blocks, seed)?;
    let st = EnvStatics::new(&env);
    let prof = MomentProfile::compute(&env, &st);
    let bm = BlockMoments::compute(&st, &prof, &decomp)?;

    let k = opts.k_order.unwrap_or_else(|| default_k_order(n_blocks));
    let hill_m = hill_tail_index(&bm.heights, k)?;
    let hill_mu = hill_tail_index(&bm.mu, k)?;
    let hill_s2 = hill_tail_index(&bm.s2, k)?;

    // LLN for (1/(n log n)) sum M^3 along dyadic prefixes.
    let mut m3_lln_checkpoints = Vec::new();
    let mut acc = 0.0;
    let mut next = 1024usize;
    for (i, m) in bm.heights.iter().enumerate() {
        acc += m * m * m;
        if i + 1 == next || i + 1 == n_blocks {
            let nf = (i + 1) as f64;
            m3_lln_checkpoints.push((i + 1, acc / (nf * nf.ln())));
            next *= 4;
        }
    }

    // kappa = 3: truncated mean/variance asymptotics with r_n = n sqrt(log n).
    let mut truncated = Vec::new();
    if (kappa - 3.0).abs() < 1e-6 {
        let mu3: Vec<f64> = bm.mu.iter().map(|m| m * m * m).collect();
        for &n in &opts.truncation_ns {
            let nf = n as f64;
            let r_n = nf * nf.ln().sqrt();
            let capped: Vec<f64> = mu3.iter().map(|v| v.min(r_n)).collect();
            let mean = stats::mean(&capped);
            let var = stats::variance(&capped);
            let mean_over_log = mean / nf.ln();
            let var_over_nlog = var / (nf * nf.ln().sqrt());
            truncated.push(TruncatedMomentRow {
                n,
                r_n,
                mean_over_log,
                var_over_nlog,
                consistency_ratio: var_over_nlog / (2.0 * mean_over_log),
            });
        }
    }

    // Covariance decay of the truncated cubes along the block stream.
    let nf = n_blocks as f64;
    let r_big = nf * nf.ln().sqrt();
    let capped: Vec<f64> = bm.mu.iter().map(|m| (m * m * m).min(r_big)).collect();
    let max_lag = opts.max_lag.min(n_blocks / 2);
    let mu3_autocov: Vec<f64> = (0..=max_lag)
        .map(|k| stats::autocovariance(&capped, k))
        .collect();

    Ok(TailReport {
        kappa,
        n_blocks,
        low_power,
        hill_m,
        hill_mu,
        hill_s2,
        m3_lln_checkpoints,
        truncated,
        mu3_autocov,
    })
}
