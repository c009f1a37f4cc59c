//! Exponential fits, threshold extrapolation, gaps and the lower/upper sandwich.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guides::PairResult;

/// Relative slack of the sandwich ordering.
pub const SANDWICH_SLACK: f64 = 1e-3;

/// Least-squares line through `(x, y)`: `(slope, intercept, max |residual|)`.
pub fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("a line fit needs two points".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument(
            "a line fit needs distinct abscissae".into(),
        ));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok((slope, intercept, res))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub max_abs_residual: f64,
    /// `(midpoint, slope)` between consecutive samples in the window.
    pub local_slopes: Vec<(f64, f64)>,
}

/// Fit of `log(dir - mix)` against `R` over `window`, from `(R, dir, mix)` triples.
pub fn fit_exponential(series: &[(f64, f64, f64)], window: (f64, f64)) -> Result<FitResult> {
    let mut pts = Vec::new();
    for &(r, d, m) in series {
        if r < window.0 - 1e-12 || r > window.1 + 1e-12 {
            continue;
        }
        if !(d - m > 0.0) {
            return Err(Error::NonpositiveDifference(r));
        }
        pts.push((r, (d - m).ln()));
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (slope, intercept, max_abs_residual) = least_squares(&pts)?;
    let local_slopes = pts
        .windows(2)
        .map(|w| {
            (
                0.5 * (w[0].0 + w[1].0),
                (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
            )
        })
        .collect();
    Ok(FitResult {
        slope,
        intercept,
        window,
        max_abs_residual,
        local_slopes,
    })
}

/// Default window `[R_max - width, R_max]`, clipped to the sampled lengths.
pub fn default_window(rs: &[f64], width: f64) -> (f64, f64) {
    let lo = rs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ((hi - width).max(lo), hi)
}

/// Window width for 2D guides.
pub const WINDOW_2D: f64 = 6.0;
/// Window width for 3D layers.
pub const WINDOW_3D: f64 = 4.0;

/// Threshold estimate with its error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub half_gap: f64,
    pub over_pi2: f64,
}

/// Mean of the two truncations at the largest length, with half their difference.
pub fn extrapolate_lambda_inf(dir: f64, mix: f64) -> Estimate {
    let value = 0.5 * (dir + mix);
    Estimate {
        value,
        half_gap: 0.5 * (dir - mix),
        over_pi2: value / (PI * PI),
    }
}

pub fn estimate_from_pair(pair: &PairResult) -> Estimate {
    extrapolate_lambda_inf(pair.dir[0], pair.mix[0])
}

/// Limit of a degree ladder assuming geometric convergence of the last three values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PExtrapolation {
    pub degrees: Vec<usize>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// Contraction factor of consecutive differences.
    pub ratio: f64,
    /// The last computed value and the limit, ordered.
    pub bracket: (f64, f64),
}

pub fn p_extrapolate(ladder: &[(usize, f64)]) -> Result<PExtrapolation> {
    if ladder.len() < 3 {
        return Err(Error::InvalidArgument(
            "geometric extrapolation needs three degrees".into(),
        ));
    }
    let n = ladder.len();
    let (a, b, c) = (ladder[n - 3].1, ladder[n - 2].1, ladder[n - 1].1);
    let (d1, d2) = (b - a, c - b);
    let ratio = d2 / d1;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "degree ladder is not geometrically convergent (ratio {ratio})"
        )));
    }
    let limit = c + d2 * ratio / (1.0 - ratio);
    Ok(PExtrapolation {
        degrees: ladder.iter().map(|l| l.0).collect(),
        values: ladder.iter().map(|l| l.1).collect(),
        limit,
        ratio,
        bracket: (limit.min(c), limit.max(c)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub lambda_ess: f64,
    pub lambda_1: f64,
    pub lambda_1_bracket: (f64, f64),
    /// `(lambda_ess - lambda_1)/lambda_1`.
    pub gap: f64,
    /// `sqrt(lambda_ess - lambda_1)` when a bound state is resolved.
    pub agmon_gamma: Option<f64>,
    pub fitted_beta: Option<f64>,
    /// `|beta - 2 gamma|` when both are known.
    pub beta_vs_two_gamma: Option<f64>,
    pub bound_state: bool,
}

pub fn gap_report(
    lambda_ess: f64,
    lambda_1: f64,
    lambda_1_bracket: (f64, f64),
    fitted_beta: Option<f64>,
) -> GapReport {
    let gap = (lambda_ess - lambda_1) / lambda_1;
    let agmon_gamma = (lambda_1 <= lambda_ess).then(|| (lambda_ess - lambda_1).sqrt());
    let beta_vs_two_gamma = match (fitted_beta, agmon_gamma) {
        (Some(b), Some(g)) => Some((b - 2.0 * g).abs()),
        _ => None,
    };
    GapReport {
        lambda_ess,
        lambda_1,
        lambda_1_bracket,
        gap,
        agmon_gamma,
        fitted_beta,
        beta_vs_two_gamma,
        bound_state: lambda_1 < lambda_ess,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub mu_star: f64,
    pub lambda_1: f64,
    pub lambda_inf: f64,
    /// `lambda_1 - mu_star`.
    pub lower_margin: f64,
    /// `lambda_inf - lambda_1`.
    pub upper_margin: f64,
    pub pass: bool,
}

/// Checks `mu_star <= lambda_1 <= lambda_inf` up to the relative slack.
pub fn lower_upper_sandwich(mu_star: f64, lambda_inf: f64, lambda_1: f64) -> Sandwich {
    let lower_margin = lambda_1 - mu_star;
    let upper_margin = lambda_inf - lambda_1;
    let pass = lower_margin >= -SANDWICH_SLACK * lambda_1.abs()
        && upper_margin >= -SANDWICH_SLACK * lambda_inf.abs();
    Sandwich {
        mu_star,
        lambda_1,
        lambda_inf,
        lower_margin,
        upper_margin,
        pass,
    }
}

/// Whether every second eigenvalue exceeds the threshold and decreases towards it.
pub fn approaches_from_above(values: &[(f64, f64)], threshold: f64) -> bool {
    values.iter().all(|v| v.1 > threshold) && values.windows(2).all(|w| w[1].1 <= w[0].1)
}

/// Table of a sweep with columns `R,dir_1..dir_k,mix_1..mix_k`.
pub fn pairs_csv(pairs: &[PairResult]) -> String {
    let k = pairs
        .iter()
        .map(|p| p.dir.len().min(p.mix.len()))
        .min()
        .unwrap_or(0);
    let mut out = String::from("R");
    for t in ["dir", "mix"] {
        for i in 1..=k {
            out.push_str(&format!(",{t}_{i}"));
        }
    }
    out.push('\n');
    for p in pairs {
        out.push_str(&format!("{:.17e}", p.r));
        for v in p.dir[..k].iter().chain(&p.mix[..k]) {
            out.push_str(&format!(",{v:.17e}"));
        }
        out.push('\n');
    }
    out
}

/// Table with columns `R,log_diff` of the lowest pair.
pub fn log_difference_csv(pairs: &[PairResult]) -> String {
    let mut out = String::from("R,log_diff\n");
    for p in pairs {
        out.push_str(&format!(
            "{:.17e},{:.17e}\n",
            p.r,
            (p.dir[0] - p.mix[0]).ln()
        ));
    }
    out
}

/// Sweep summary written as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub geometry: String,
    pub discretization: Vec<String>,
    pub pairs: Vec<PairResult>,
    pub lambda_inf: Estimate,
    pub fit: Option<FitResult>,
    pub gap_report: Option<GapReport>,
    pub sandwich: Option<Sandwich>,
    pub config_hash: String,
    pub seed: u64,
}

impl SweepReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_slope() {
        let c = 1.7;
        let series: Vec<_> = (1..=10)
            .map(|r| {
                let r = r as f64;
                (r, 3.0 * (-c * r).exp(), 0.0)
            })
            .collect();
        let fit = fit_exponential(&series, (4.0, 10.0)).unwrap();
        assert!((fit.slope + c).abs() < 1e-10);
        assert_eq!(fit.local_slopes.len(), 6);
        assert!(fit.max_abs_residual < 1e-10);
    }

    #[test]
    fn nonpositive_difference_is_reported() {
        let series = [(1.0, 1.0, 0.5), (2.0, 1.0, 1.0)];
        assert!(matches!(
            fit_exponential(&series, (0.0, 3.0)),
            Err(Error::NonpositiveDifference(r)) if r == 2.0
        ));
    }

    #[test]
    fn geometric_ladder_limit() {
        let ladder: Vec<_> = (1..=5)
            .map(|p| (p, 3.0 + 0.4 * 0.3f64.powi(p as i32)))
            .collect();
        let e = p_extrapolate(&ladder).unwrap();
        assert!((e.limit - 3.0).abs() < 1e-13);
        assert!((e.ratio - 0.3).abs() < 1e-12);
        assert!(p_extrapolate(&[(1, 1.0), (2, 0.5), (3, 0.7)]).is_err());
    }

    #[test]
    fn gap_and_sandwich_cases() {
        let pi2 = PI * PI;
        let g = gap_report(0.9291205 * pi2, 0.9032 * pi2, (0.0, 0.0), Some(1.0));
        assert!((g.gap - 0.0287).abs() < 1e-3);
        assert!((g.agmon_gamma.unwrap() - 0.5056).abs() < 1e-3);
        let same = gap_report(2.0, 2.0, (2.0, 2.0), None);
        assert_eq!((same.gap, same.agmon_gamma), (0.0, Some(0.0)));
        assert!(!same.bound_state);
        assert!(gap_report(1.0, 2.0, (2.0, 2.0), None).agmon_gamma.is_none());
        assert!(lower_upper_sandwich(0.8387, 0.9291, 0.9032).pass);
        assert!(!lower_upper_sandwich(0.95, 0.9291, 0.9032).pass);
        let eq = lower_upper_sandwich(1.0, 1.0, 1.0);
        assert!(eq.pass && eq.lower_margin == 0.0 && eq.upper_margin == 0.0);
    }
}
