use orthodac_web::{coherent_tone_ghz, enob_vs_jitter, sequences, synthesize_tone, FULL_RATE, RECORD};

#[test]
fn tones_snap_to_odd_bins() {
    let bin = FULL_RATE / RECORD as f64 / 1e9;
    for ghz in [0.0, 1.0, 7.3, 18.0, 29.99, 100.0] {
        let k = coherent_tone_ghz(ghz) / bin;
        assert!((k - k.round()).abs() < 1e-9);
        assert_eq!(k.round() as u64 % 2, 1, "{ghz} GHz");
        assert!(k < (RECORD / 2) as f64);
    }
}

#[test]
fn sequences_sum_to_one_and_comb_is_flat() {
    let out = sequences(5, 40).unwrap();
    let points = out[0] as usize;
    let traces = &out[1..1 + 5 * points];
    for i in 0..points {
        let sum: f64 = (0..5).map(|l| traces[l * points + i]).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
    let lines = &out[1 + 5 * points..];
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|m| (m - 0.2).abs() < 1e-9));
}

#[test]
fn noiseless_synthesis_matches_ideal() {
    let out = synthesize_tone(3, 12.0, 0.0, 1, 500).unwrap();
    let len = out[0] as usize;
    assert_eq!(len, 500);
    let ideal = &out[2..2 + len];
    let direct = &out[2 + len..2 + 2 * len];
    for (a, b) in ideal.iter().zip(direct) {
        assert!((a - b).abs() < 1e-9);
    }
    let branches = &out[2 + 2 * len..];
    let worst = ideal.iter().zip(branches).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn branches_resist_jitter() {
    let enob = enob_vs_jitter(3, 29.0, 1.0, 4).unwrap();
    assert!(enob[1] > enob[0] + 1.0, "{enob:?}");
    assert!(synthesize_tone(3, 10.0, -1.0, 1, 10).is_err());
    assert!(sequences(4, 10).is_err());
}
