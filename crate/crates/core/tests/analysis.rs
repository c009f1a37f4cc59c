use std::f64::consts::PI;

use fichera::analysis::{fit_exponential, lower_upper_sandwich, p_extrapolate, pairs_csv};
use fichera::guides::PairResult;
use proptest::prelude::*;

fn pair(r: f64, dir: f64, mix: f64) -> PairResult {
    PairResult {
        r,
        dir: vec![dir],
        mix: vec![mix],
        dir_residuals: vec![0.0],
        mix_residuals: vec![0.0],
        n_dofs: 0,
    }
}

/// Parses the first two eigenvalue columns of a pair table.
fn parse_pairs(csv: &str) -> Vec<PairResult> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            pair(v[0], v[1], v[2])
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slope_ignores_a_common_factor(c in 0.3f64..3.0, scale in 1e-3f64..1e3, noise in 0.0f64..0.1) {
        let series: Vec<_> = (1..=10)
            .map(|r| {
                let r = r as f64;
                let d = (-c * r + noise * (r * 1.7).sin()).exp();
                (r, 5.0 + d, 5.0)
            })
            .collect();
        let scaled: Vec<_> = series.iter().map(|&(r, d, m)| (r, scale * (d - m), 0.0)).collect();
        let a = fit_exponential(&series, (4.0, 10.0)).unwrap();
        let b = fit_exponential(&scaled, (4.0, 10.0)).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-6 * a.slope.abs());
    }

    #[test]
    fn geometric_ladders_extrapolate_exactly(limit in 1.0f64..10.0, amp in 0.01f64..1.0, q in 0.05f64..0.9) {
        let ladder: Vec<_> = (1..=4).map(|p| (p, limit + amp * q.powi(p as i32))).collect();
        let e = p_extrapolate(&ladder).unwrap();
        prop_assert!((e.limit - limit).abs() < 1e-9 * limit);
        prop_assert!(e.bracket.0 <= e.bracket.1);
    }

    #[test]
    fn sandwich_accepts_ordered_triples(mu in 0.5f64..0.8, a in 0.0f64..0.1, b in 0.0f64..0.1) {
        let l1 = mu + a;
        let s = lower_upper_sandwich(mu, l1 + b, l1);
        prop_assert!(s.pass);
        prop_assert!(!lower_upper_sandwich(l1 + 0.01, l1 + b, l1).pass);
    }

    #[test]
    fn pair_tables_round_trip_byte_for_byte(values in prop::collection::vec((0.5f64..1.0, 0.0f64..0.1), 1..8)) {
        let pairs: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &(m, d))| pair(i as f64 + 1.0, (m + d) * PI * PI, m * PI * PI))
            .collect();
        let csv = pairs_csv(&pairs);
        prop_assert_eq!(pairs_csv(&parse_pairs(&csv)), csv);
    }
}
