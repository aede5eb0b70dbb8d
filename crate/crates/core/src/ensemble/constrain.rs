//! Two-stage constraining: reject members far from observed warming, then
//! reweight the survivors towards target distributions and resample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kde::{Bandwidth, BinnedKde};
use super::skewnorm::fit_skew_normal;
use crate::error::{Error, Result};
use crate::stats::{p5_50_95, window_mean};

/// Default RMSE threshold against observed warming, K.
pub const RMSE_THRESHOLD: f64 = 0.16;

/// Baseline window used to align simulated and observed warming.
pub const BASELINE: (f64, f64) = (1850.0, 1900.0);

/// An annual series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Series {
    pub years: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(years: Vec<f64>, values: Vec<f64>) -> Self {
        Self { years, values }
    }

    /// Series shifted so its mean over `[from, to]` is zero.
    pub fn rebaselined(&self, from: f64, to: f64) -> Series {
        let m = window_mean(&self.years, &self.values, from, to);
        Series {
            years: self.years.clone(),
            values: self.values.iter().map(|v| v - m).collect(),
        }
    }
}

/// Root-mean-square difference over the years common to both series.
pub fn rmse(a: &Series, b: &Series) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut j = 0;
    for (ya, va) in a.years.iter().zip(&a.values) {
        while j < b.years.len() && b.years[j] < *ya {
            j += 1;
        }
        if j < b.years.len() && b.years[j] == *ya {
            sum += (va - b.values[j]).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyOverlap);
    }
    Ok((sum / n as f64).sqrt())
}

/// RMSE after both series are re-baselined to their own 1850-1900 means.
pub fn aligned_rmse(simulated: &Series, observed: &Series) -> Result<f64> {
    rmse(
        &simulated.rebaselined(BASELINE.0, BASELINE.1),
        &observed.rebaselined(BASELINE.0, BASELINE.1),
    )
}

/// Indices of the members whose aligned RMSE is at most `threshold`, in
/// input order.
pub fn rmse_filter(simulated: &[Series], observed: &Series, threshold: f64) -> Result<Vec<usize>> {
    let mut keep = Vec::new();
    for (i, s) in simulated.iter().enumerate() {
        if aligned_rmse(s, observed)? <= threshold {
            keep.push(i);
        }
    }
    Ok(keep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintTarget {
    pub name: String,
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
}

/// Importance weights moving the members' metric distributions towards the
/// targets: the product over metrics of target density / prior density.
/// `metrics[k][i]` is metric `k` of member `i`.
pub fn importance_weights(metrics: &[Vec<f64>], targets: &[ConstraintTarget]) -> Result<Vec<f64>> {
    if metrics.len() != targets.len() || metrics.is_empty() {
        return Err(Error::Ensemble("one metric column per target is required".into()));
    }
    let n = metrics[0].len();
    if metrics.iter().any(|m| m.len() != n) {
        return Err(Error::Ensemble("metric columns differ in length".into()));
    }
    let mut log_w = vec![0.0; n];
    for (col, target) in metrics.iter().zip(targets) {
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::Ensemble(format!("non-finite values in metric {}", target.name)));
        }
        let dist = fit_skew_normal(target.p5, target.p50, target.p95)?;
        let prior = BinnedKde::new(col, Bandwidth::Scott)?;
        for (lw, x) in log_w.iter_mut().zip(col) {
            let q = prior.pdf(*x);
            *lw += if q > 0.0 { dist.pdf(*x).ln() - q.ln() } else { f64::NEG_INFINITY };
        }
    }
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Resample("all weights are zero".into()));
    }
    Ok(log_w.iter().map(|l| (l - max).exp()).collect())
}

/// Draw `n_out` members with probability proportional to `weights`.
///
/// Without replacement this is systematic sampling with inclusion
/// probabilities `n_out * w / sum(w)` capped at one, over members ordered by
/// `order_key`. Ordering by a constrained metric spreads the draws across its
/// range. Returns member indices in ascending order.
pub fn resample(
    weights: &[f64],
    n_out: usize,
    order_key: &[f64],
    with_replacement: bool,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = weights.len();
    if n_out == 0 {
        return Ok(Vec::new());
    }
    if order_key.len() != n {
        return Err(Error::Resample("ordering key length differs from weights".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::Resample("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Resample("all weights are zero".into()));
    }
    let positive = weights.iter().filter(|w| **w > 0.0).count();
    if !with_replacement && n_out > positive {
        return Err(Error::Resample(format!(
            "asked for {n_out} distinct members but only {positive} have positive weight"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| order_key[*a].total_cmp(&order_key[*b]).then(a.cmp(b)));

    let probs: Vec<f64> = if with_replacement {
        weights.iter().map(|w| n_out as f64 * w / total).collect()
    } else {
        inclusion_probabilities(weights, n_out)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let mut picked = Vec::with_capacity(n_out);
    let mut cum = 0.0;
    let mut next = u;
    for &i in &order {
        cum += probs[i];
        while next < cum && picked.len() < n_out {
            picked.push(i);
            next += 1.0;
        }
    }
    // rounding can leave the last draw just past the final cumulative sum
    while picked.len() < n_out {
        let last = *order.iter().rev().find(|i| probs[**i] > 0.0).unwrap();
        picked.push(last);
    }
    picked.sort_unstable();
    if !with_replacement {
        picked.dedup();
        if picked.len() != n_out {
            return Err(Error::Resample("systematic draw produced duplicates".into()));
        }
    }
    Ok(picked)
}

/// Inclusion probabilities proportional to `weights`, summing to `n_out`,
/// with every probability capped at one.
fn inclusion_probabilities(weights: &[f64], n_out: usize) -> Vec<f64> {
    let mut p = vec![0.0; weights.len()];
    let mut certain = vec![false; weights.len()];
    loop {
        let remaining = n_out as f64 - certain.iter().filter(|c| **c).count() as f64;
        let free_total: f64 = weights
            .iter()
            .zip(&certain)
            .filter(|(_, c)| !**c)
            .map(|(w, _)| w)
            .sum();
        let mut changed = false;
        for i in 0..weights.len() {
            if certain[i] {
                p[i] = 1.0;
                continue;
            }
            p[i] = remaining * weights[i] / free_total;
            if p[i] >= 1.0 {
                certain[i] = true;
                changed = true;
            }
        }
        if !changed {
            return p;
        }
    }
}

/// One row of the target-vs-ensemble report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub name: String,
    pub target: [f64; 3],
    pub ensemble: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub threshold: f64,
    pub n_out: usize,
    pub seed: u64,
    pub with_replacement: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: RMSE_THRESHOLD,
            n_out: 101,
            seed: 0,
            with_replacement: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    /// Aligned RMSE per member; NaN where the simulation failed.
    pub rmse: Vec<f64>,
    /// `metrics[i]` holds member `i`'s value for each target; empty on failure.
    pub metrics: Vec<Vec<f64>>,
    /// Members whose simulation failed, with the reason.
    pub failed: Vec<(usize, String)>,
    /// Indices passing the RMSE filter.
    pub survivors: Vec<usize>,
    /// Selected indices, ascending.
    pub selected: Vec<usize>,
    /// Target against the selected members.
    pub report: Vec<ReportRow>,
}

impl PipelineOutcome {
    /// Percentiles of one metric over a subset of members.
    pub fn percentiles(&self, target: usize, members: &[usize]) -> [f64; 3] {
        p5_50_95(&members.iter().map(|i| self.metrics[*i][target]).collect::<Vec<_>>())
    }
}

/// Simulate every member (in parallel), drop those far from the observed
/// warming, then reweight and resample the survivors towards the targets.
///
/// `simulate(i)` returns member `i`'s simulated surface warming and its
/// metric values in target order. Resampling orders members by the first
/// target's metric.
pub fn run_constraining_pipeline<F>(
    n_members: usize,
    simulate: F,
    observed: &Series,
    targets: &[ConstraintTarget],
    cfg: &PipelineConfig,
) -> Result<PipelineOutcome>
where
    F: Fn(usize) -> Result<(Series, Vec<f64>)> + Sync,
{
    if targets.is_empty() {
        return Err(Error::Ensemble("no constraint targets".into()));
    }
    let evaluated: Vec<Result<(f64, Vec<f64>)>> = (0..n_members)
        .into_par_iter()
        .map(|i| {
            let (series, metrics) = simulate(i)?;
            if metrics.len() != targets.len() {
                return Err(Error::Ensemble(format!(
                    "member {i} returned {} metrics for {} targets",
                    metrics.len(),
                    targets.len()
                )));
            }
            Ok((aligned_rmse(&series, observed)?, metrics))
        })
        .collect();

    let mut rmse = Vec::with_capacity(n_members);
    let mut metrics = Vec::with_capacity(n_members);
    let mut failed = Vec::new();
    for (i, r) in evaluated.into_iter().enumerate() {
        match r {
            Ok((e, m)) if m.iter().all(|v| v.is_finite()) => {
                rmse.push(e);
                metrics.push(m);
            }
            Ok(_) => {
                failed.push((i, "non-finite metric".to_string()));
                rmse.push(f64::NAN);
                metrics.push(Vec::new());
            }
            Err(e) => {
                failed.push((i, e.to_string()));
                rmse.push(f64::NAN);
                metrics.push(Vec::new());
            }
        }
    }
    if !failed.is_empty() {
        log::warn!("{} of {n_members} members failed to simulate and were dropped", failed.len());
    }
    let survivors: Vec<usize> = (0..n_members).filter(|i| rmse[*i] <= cfg.threshold).collect();
    if survivors.len() < cfg.n_out {
        return Err(Error::Ensemble(format!(
            "{} members pass the RMSE filter but {} were requested",
            survivors.len(),
            cfg.n_out
        )));
    }
    let columns: Vec<Vec<f64>> = (0..targets.len())
        .map(|k| survivors.iter().map(|i| metrics[*i][k]).collect())
        .collect();
    let weights = importance_weights(&columns, targets)?;
    let picks = resample(&weights, cfg.n_out, &columns[0], cfg.with_replacement, cfg.seed)?;
    let selected: Vec<usize> = picks.iter().map(|k| survivors[*k]).collect();
    let mut out = PipelineOutcome {
        rmse,
        metrics,
        failed,
        survivors,
        selected,
        report: Vec::new(),
    };
    out.report = targets
        .iter()
        .enumerate()
        .map(|(k, t)| ReportRow {
            name: t.name.clone(),
            target: [t.p5, t.p50, t.p95],
            ensemble: out.percentiles(k, &out.selected),
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::median;
    use rand_distr::StandardNormal;

    fn yrs(n: usize) -> Vec<f64> {
        (0..n).map(|i| 1850.0 + i as f64).collect()
    }

    #[test]
    fn rmse_arithmetic() {
        let a = Series::new(yrs(4), vec![0.0; 4]);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b = Series::new(yrs(4), vec![0.2; 4]);
        assert!((rmse(&a, &b).unwrap() - 0.2).abs() < 1e-15);
        let c = Series::new(yrs(4), vec![0.1, -0.3, -0.1, 0.3]);
        assert!((rmse(&a, &c).unwrap() - 0.05f64.sqrt()).abs() < 1e-15);
        let d = Series::new(vec![1700.0], vec![1.0]);
        assert!(matches!(rmse(&a, &d), Err(Error::EmptyOverlap)));
    }

    #[test]
    fn filter_survivors() {
        let obs = Series::new(yrs(173), (0..173).map(|i| 0.005 * i as f64).collect());
        // a trend offset that survives re-baselining
        let members: Vec<Series> = [0.0, 0.1, 0.6, 0.15, 0.2]
            .iter()
            .map(|k| {
                Series::new(
                    yrs(173),
                    obs.values.iter().enumerate().map(|(i, v)| v + k * (i as f64 / 172.0)).collect(),
                )
            })
            .collect();
        let expected: Vec<usize> = members
            .iter()
            .enumerate()
            .filter(|(_, s)| aligned_rmse(s, &obs).unwrap() <= 0.16)
            .map(|(i, _)| i)
            .collect();
        let keep = rmse_filter(&members, &obs, 0.16).unwrap();
        assert_eq!(keep, expected);
        assert!(keep.contains(&0) && !keep.contains(&2));
        assert_eq!(rmse_filter(&members, &obs, 0.0).unwrap(), vec![0]);
    }

    fn normal_prior(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn shifted_target_moves_median() {
        let x = normal_prior(5000, 42);
        let t = ConstraintTarget {
            name: "x".into(),
            p5: 0.5 - 1.6448536269514722,
            p50: 0.5,
            p95: 0.5 + 1.6448536269514722,
        };
        let w = importance_weights(&[x.clone()], &[t]).unwrap();
        let pick = resample(&w, 1001, &x, false, 7).unwrap();
        assert_eq!(pick.len(), 1001);
        let chosen: Vec<f64> = pick.iter().map(|i| x[*i]).collect();
        assert!((median(&chosen) - 0.5).abs() < 0.05, "{}", median(&chosen));
    }

    #[test]
    fn identity_target_keeps_prior() {
        let x = normal_prior(5000, 3);
        let [p5, p50, p95] = p5_50_95(&x);
        let w = importance_weights(
            &[x.clone()],
            &[ConstraintTarget {
                name: "x".into(),
                p5,
                p50,
                p95,
            }],
        )
        .unwrap();
        let pick = resample(&w, 1001, &x, false, 1).unwrap();
        let got = p5_50_95(&pick.iter().map(|i| x[*i]).collect::<Vec<_>>());
        for (a, b) in got.iter().zip([p5, p50, p95]) {
            assert!((a - b).abs() < 0.1);
        }
    }

    #[test]
    fn resample_errors_and_determinism() {
        let w = vec![1.0, 0.0, 2.0];
        let key = vec![0.0, 1.0, 2.0];
        assert!(resample(&[0.0, 0.0], 1, &[0.0, 1.0], false, 0).is_err());
        assert!(resample(&w, 3, &key, false, 0).is_err());
        assert!(resample(&w, 4, &[0.0; 3], true, 0).is_ok());
        let x = normal_prior(500, 9);
        let w: Vec<f64> = x.iter().map(|v| (-v * v).exp()).collect();
        assert_eq!(resample(&w, 50, &x, false, 5).unwrap(), resample(&w, 50, &x, false, 5).unwrap());
        let dup = resample(&w, 400, &x, true, 5).unwrap();
        assert_eq!(dup.len(), 400);
    }

    #[test]
    fn inclusion_probabilities_capped() {
        let p = inclusion_probabilities(&[100.0, 1.0, 1.0, 1.0, 1.0], 3);
        assert_eq!(p[0], 1.0);
        assert!((p.iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!(p.iter().all(|v| *v <= 1.0));
    }

    #[test]
    fn anticorrelated_metrics_compromise() {
        // a and b are strongly anticorrelated; both targets ask for a higher
        // value, which cannot hold together. The weights stay finite.
        let z = normal_prior(4000, 21);
        let e = normal_prior(4000, 22);
        let a: Vec<f64> = z.iter().zip(&e).map(|(z, e)| z + 0.2 * e).collect();
        let b: Vec<f64> = z.iter().zip(&e).map(|(z, e)| -z + 0.2 * e).collect();
        let t = |name: &str| ConstraintTarget {
            name: name.into(),
            p5: 1.0 - 1.645,
            p50: 1.0,
            p95: 1.0 + 1.645,
        };
        let w = importance_weights(&[a.clone(), b.clone()], &[t("a"), t("b")]).unwrap();
        assert!(w.iter().all(|v| v.is_finite() && *v >= 0.0));
        let pick = resample(&w, 501, &a, false, 2).unwrap();
        let ma = median(&pick.iter().map(|i| a[*i]).collect::<Vec<_>>());
        let mb = median(&pick.iter().map(|i| b[*i]).collect::<Vec<_>>());
        // neither target median is reached; the pair roughly splits the difference
        assert!(ma < 1.0 && mb < 1.0 && (ma + mb).abs() < 0.5, "{ma} {mb}");
    }

    #[test]
    fn pipeline_without_filter_is_subsample() {
        let x = normal_prior(300, 4);
        let obs = Series::new(yrs(60), vec![0.0; 60]);
        let [p5, p50, p95] = p5_50_95(&x);
        let target = ConstraintTarget {
            name: "x".into(),
            p5,
            p50,
            p95,
        };
        let cfg = PipelineConfig {
            threshold: f64::INFINITY,
            n_out: 30,
            seed: 1,
            with_replacement: false,
        };
        let hook = |i: usize| Ok((obs.clone(), vec![x[i]]));
        let out = run_constraining_pipeline(300, hook, &obs, &[target.clone()], &cfg).unwrap();
        assert_eq!(out.survivors.len(), 300);
        assert_eq!(out.selected.len(), 30);
        assert_eq!(out.report[0].name, "x");
        let again = run_constraining_pipeline(300, hook, &obs, &[target.clone()], &cfg).unwrap();
        assert_eq!(out.selected, again.selected);
    }

    #[test]
    fn pipeline_filters_then_drops_failures() {
        let obs = Series::new(yrs(120), vec![0.0; 120]);
        let x = normal_prior(400, 5);
        // every fourth member warms 0.3 K too much after 1900, every tenth fails
        let hook = |i: usize| {
            if i % 10 == 0 {
                return Err(Error::Domain("diverged".into()));
            }
            let off = if i % 4 == 0 { 0.3 } else { 0.0 };
            let s = Series::new(yrs(120), (0..120).map(|k| if k > 50 { off } else { 0.0 }).collect());
            Ok((s, vec![x[i]]))
        };
        let target = ConstraintTarget {
            name: "x".into(),
            p5: -1.645,
            p50: 0.0,
            p95: 1.645,
        };
        let cfg = PipelineConfig {
            n_out: 50,
            ..PipelineConfig::default()
        };
        let out = run_constraining_pipeline(400, hook, &obs, &[target.clone()], &cfg).unwrap();
        assert_eq!(out.failed.len(), 40);
        let expected: Vec<usize> = (0..400).filter(|i| i % 10 != 0 && i % 4 != 0).collect();
        assert_eq!(out.survivors, expected);
        assert!(out.selected.iter().all(|i| expected.contains(i)));
        let too_many = PipelineConfig {
            n_out: 1000,
            ..PipelineConfig::default()
        };
        assert!(run_constraining_pipeline(400, hook, &obs, &[target], &too_many).is_err());
    }
}
