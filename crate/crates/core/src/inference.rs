//! Confidence intervals, two-sided z-tests, nearest-neighbor ranking and
//! bias comparisons built on propagated statistics. All tests use the
//! normal reference distribution.

use serde::Serialize;
use libm::erfc;

use crate::error::{Error, Result};
use crate::glove::EmbeddingModel;
use crate::propagate::{
    propagate, BiasQuery, CosineSimilarity, Difference, Propagation, Statistic, UncertainStatistic,
};
use crate::scalar::{to_f64, Real};
use crate::variance::CovarianceStore;

/// 97.5% quantile of the standard normal.
pub const Z_975: f64 = 1.959_963_984_540_054;

/// Two-sided p-value `2(1 − Φ(|z|))`.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalResult {
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: &'static str,
    pub draws: usize,
}

impl IntervalResult {
    pub fn from_statistic<T: Real>(s: &UncertainStatistic<T>) -> Self {
        let value = to_f64(s.value);
        let se = to_f64(s.std_error());
        IntervalResult {
            value,
            std_error: se,
            ci_low: value - Z_975 * se,
            ci_high: value + Z_975 * se,
            method: s.method.name(),
            draws: s.draws,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZTest {
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p: f64,
    /// Zero propagated variance with a nonzero estimate.
    pub degenerate: bool,
    pub method: &'static str,
    pub draws: usize,
}

impl ZTest {
    pub fn from_statistic<T: Real>(s: &UncertainStatistic<T>) -> Self {
        let estimate = to_f64(s.value);
        let se = to_f64(s.std_error());
        let (z, p, degenerate) = if se > 0.0 {
            let z = estimate / se;
            (z, two_sided_p(z), false)
        } else if estimate == 0.0 {
            (0.0, 1.0, false)
        } else {
            log::warn!("difference {estimate} has zero propagated variance");
            (estimate.signum() * f64::INFINITY, 0.0, true)
        };
        ZTest { estimate, std_error: se, z, p, degenerate, method: s.method.name(), draws: s.draws }
    }
}

/// Tests `φ_a − φ_b = 0` as a single statistic so that covariance through
/// shared words is accounted for.
pub fn z_test_difference<T: Real>(
    spec_a: &dyn Statistic<T>,
    spec_b: &dyn Statistic<T>,
    store: &CovarianceStore<T>,
    model: &EmbeddingModel<T>,
    how: Propagation,
) -> Result<ZTest> {
    let diff = Difference::new(spec_a, spec_b);
    Ok(ZTest::from_statistic(&propagate(&diff, store, model, how)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedNeighbor {
    pub word_id: usize,
    pub rank: usize,
    pub cosine: IntervalResult,
    /// Test against the next-ranked neighbor; `None` for the last one.
    pub vs_next: Option<ZTest>,
}

/// Ranks candidates by point-estimate cosine with `query` (ties keep input
/// order) and tests each adjacent pair.
pub fn neighbor_ranks<T: Real>(
    query: usize,
    candidates: &[usize],
    store: &CovarianceStore<T>,
    model: &EmbeddingModel<T>,
    how: Propagation,
) -> Result<Vec<RankedNeighbor>> {
    let missing: Vec<String> = std::iter::once(&query)
        .chain(candidates)
        .filter(|&&i| !store.is_covered(i))
        .map(|i| format!("#{i}"))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Uncovered(missing.join(", ")));
    }
    let specs: Vec<CosineSimilarity> = candidates.iter().map(|&c| CosineSimilarity::new(query, c)).collect();
    let mut scored = specs
        .iter()
        .zip(candidates)
        .map(|(s, &c)| Ok((c, s, propagate(s, store, model, how)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.2.value.partial_cmp(&a.2.value).unwrap_or(std::cmp::Ordering::Equal));

    let mut out = Vec::with_capacity(scored.len());
    for (k, (c, spec, stat)) in scored.iter().enumerate() {
        let vs_next = match scored.get(k + 1) {
            Some((_, next, _)) => Some(z_test_difference(*spec, *next, store, model, how)?),
            None => None,
        };
        out.push(RankedNeighbor { word_id: *c, rank: k + 1, cosine: IntervalResult::from_statistic(stat), vs_next });
    }
    Ok(out)
}

/// Tests whether two bias queries of the same kind give equal scores.
pub fn compare_bias_types<T: Real>(
    q1: &BiasQuery,
    q2: &BiasQuery,
    store: &CovarianceStore<T>,
    model: &EmbeddingModel<T>,
    how: Propagation,
) -> Result<ZTest> {
    if q1.kind() != q2.kind() {
        return Err(Error::InvalidArgument("compared bias queries must be of the same kind".into()));
    }
    let a = q1.statistic::<T>()?;
    let b = q2.statistic::<T>()?;
    z_test_difference(a.as_ref(), b.as_ref(), store, model, how)
}

/// One line of tabular output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub statistic: String,
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: Option<f64>,
    pub p: Option<f64>,
    pub method: &'static str,
    pub draws: usize,
}

impl ReportRow {
    pub const TSV_HEADER: &'static str = "statistic\tvalue\tstd_error\tci_low\tci_high\tz\tp\tmethod\tdraws";

    pub fn interval(statistic: impl Into<String>, r: &IntervalResult, test: Option<&ZTest>) -> Self {
        ReportRow {
            statistic: statistic.into(),
            value: r.value,
            std_error: r.std_error,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            z: test.map(|t| t.z),
            p: test.map(|t| t.p),
            method: r.method,
            draws: r.draws,
        }
    }

    pub fn test(statistic: impl Into<String>, t: &ZTest) -> Self {
        ReportRow {
            statistic: statistic.into(),
            value: t.estimate,
            std_error: t.std_error,
            ci_low: t.estimate - Z_975 * t.std_error,
            ci_high: t.estimate + Z_975 * t.std_error,
            z: Some(t.z),
            p: Some(t.p),
            method: t.method,
            draws: t.draws,
        }
    }

    pub fn to_tsv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| v.to_string());
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.statistic,
            self.value,
            self.std_error,
            self.ci_low,
            self.ci_high,
            opt(self.z),
            opt(self.p),
            self.method,
            self.draws
        )
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report rows serialize")
    }
}
