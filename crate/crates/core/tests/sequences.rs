use orthodac::sequence::{sequence_trace, sequence_value, verify_comb, SequenceSpec};
use orthodac::TimeGrid;
use proptest::prelude::*;

fn spec(n: usize, bw: f64, l: usize) -> SequenceSpec {
    SequenceSpec::new(n, bw, l).unwrap()
}

#[test]
fn shifted_sequences_are_orthogonal_over_a_period() {
    for n in [3usize, 5, 7] {
        let bw = 60e9;
        let points = 64 * n;
        let grid = TimeGrid::new(0.0, points as f64 * bw / n as f64, points).unwrap();
        let traces: Vec<Vec<f64>> = (1..=n)
            .map(|l| sequence_trace(&spec(n, bw, l), &grid, None).unwrap().into_samples())
            .collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let own = dot(&traces[0], &traces[0]);
        for m in 1..n {
            let cross = dot(&traces[0], &traces[m]);
            assert!(cross.abs() <= 1e-10 * own, "N={n} m={m}: {cross} vs {own}");
        }
    }
}

proptest! {
    #[test]
    fn branches_partition_unity(t in -1e-9f64..1e-9, n in prop::sample::select(vec![3usize, 5, 7, 9])) {
        let total: f64 = (1..=n).map(|l| sequence_value(&spec(n, 60e9, l), t)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "{}", total);
    }

    #[test]
    fn sequence_is_periodic(t in -1e-9f64..1e-9, l in 1usize..=5, shift in -4i32..4) {
        let s = spec(5, 60e9, l);
        let a = sequence_value(&s, t);
        let b = sequence_value(&s, t + f64::from(shift) * s.period());
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn sequence_stays_within_its_bounds(t in -1e-9f64..1e-9, n in prop::sample::select(vec![3usize, 5, 7])) {
        // the Dirichlet kernel never exceeds its peak value
        let v = sequence_value(&spec(n, 60e9, 1), t);
        prop_assert!(v <= 1.0 + 1e-12);
        prop_assert!(v >= -1.0 / n as f64 * 2.0);
    }
}

#[test]
fn sequences_sample_only_their_own_branch() {
    for n in [3usize, 5] {
        for l in 1..=n {
            let s = spec(n, 60e9, l);
            for m in -20i64..20 {
                let v = sequence_value(&s, m as f64 / 60e9);
                let own = (m - (l as i64 - 1)).rem_euclid(n as i64) == 0;
                assert!((v - if own { 1.0 } else { 0.0 }).abs() < 1e-12, "N={n} l={l} m={m}: {v}");
            }
        }
    }
}

#[test]
fn jitter_free_traces_form_flat_combs() {
    for n in [3usize, 5] {
        for l in 1..=n {
            let s = spec(n, 60e9, l);
            let grid = TimeGrid::new(0.0, 480e9, 8 * n * 16).unwrap();
            let report = verify_comb(&sequence_trace(&s, &grid, None).unwrap(), &s).unwrap();
            assert_eq!(report.magnitudes.len(), n);
            assert!(report.is_flat_comb(1e-10, 1e-9), "{report:?}");
            assert!((report.line_spacing() - 60e9 / n as f64).abs() < 1e-3);
            for m in &report.magnitudes {
                assert!((m - 1.0 / n as f64).abs() < 1e-12);
            }
        }
    }
}
