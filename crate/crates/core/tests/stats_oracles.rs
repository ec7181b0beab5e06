use proptest::prelude::*;
use recast_core::stats::{binomial_ci, kendall_tau_b, PairedSample, ProportionEstimate};

/// Classifies every unordered pair directly.
fn brute_force(samples: &[PairedSample]) -> (u64, u64, u64, u64, f64) {
    let (mut c, mut d, mut tx, mut ty) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let dx = samples[i].x - samples[j].x;
            let dy = samples[i].y - samples[j].y;
            match (dx == 0.0, dy == 0.0) {
                (true, true) => {}
                (true, false) => tx += 1,
                (false, true) => ty += 1,
                (false, false) if (dx > 0.0) == (dy > 0.0) => c += 1,
                _ => d += 1,
            }
        }
    }
    let tau = (c as f64 - d as f64) / (((c + d + tx) as f64) * ((c + d + ty) as f64)).sqrt();
    (c, d, tx, ty, tau)
}

fn likert() -> impl Strategy<Value = Vec<PairedSample>> {
    prop::collection::vec((1i32..=5, 1i32..=5), 2..50).prop_map(|v| {
        v.into_iter()
            .map(|(x, y)| PairedSample::new(x as f64, y as f64))
            .collect()
    })
}

#[test]
fn hand_example_counts() {
    let s: Vec<PairedSample> = [(1.0, 1.0), (2.0, 3.0), (3.0, 2.0), (4.0, 4.0)]
        .iter()
        .map(|&(x, y)| PairedSample::new(x, y))
        .collect();
    let (c, d, tx, ty, tau) = brute_force(&s);
    assert_eq!((c, d, tx, ty), (5, 1, 0, 0));
    let r = kendall_tau_b(&s).unwrap();
    assert_eq!((r.concordant, r.discordant), (c, d));
    assert!((r.tau - tau).abs() < 1e-12);
}

proptest! {
    #[test]
    fn matches_pair_enumeration(samples in likert()) {
        let (c, d, tx, ty, tau) = brute_force(&samples);
        match kendall_tau_b(&samples) {
            Ok(r) => {
                prop_assert_eq!((r.concordant, r.discordant, r.ties_x, r.ties_y), (c, d, tx, ty));
                prop_assert!((r.tau - tau).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&r.tau));
            }
            Err(_) => prop_assert!(c + d + tx == 0 || c + d + ty == 0),
        }
    }

    #[test]
    fn antisymmetric_in_y(samples in likert()) {
        let negated: Vec<PairedSample> = samples.iter().map(|s| PairedSample::new(s.x, -s.y)).collect();
        if let (Ok(a), Ok(b)) = (kendall_tau_b(&samples), kendall_tau_b(&negated)) {
            prop_assert!((a.tau + b.tau).abs() < 1e-12);
        }
    }

    #[test]
    fn invariant_under_increasing_transforms(samples in likert()) {
        let moved: Vec<PairedSample> = samples
            .iter()
            .map(|s| PairedSample::new(s.x.powi(3) + 7.0, (s.y / 3.0).exp()))
            .collect();
        if let (Ok(a), Ok(b)) = (kendall_tau_b(&samples), kendall_tau_b(&moved)) {
            prop_assert_eq!(a.tau, b.tau);
        }
    }

    #[test]
    fn wald_interval_brackets_point(k in 0u64..200, extra in 0u64..200) {
        let n = (k + extra).max(1);
        let k = k.min(n);
        let (lo, hi) = binomial_ci(k, n, 1.96).unwrap();
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        let w1 = ProportionEstimate::new(k, n).unwrap().halfwidth(1.96);
        let w4 = ProportionEstimate::new(4 * k, 4 * n).unwrap().halfwidth(1.96);
        prop_assert!((w4 - w1 / 2.0).abs() < 1e-12);
    }
}
