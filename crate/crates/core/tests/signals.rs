use num_complex::Complex64;
use orthodac::dsp::{spectrum, Extent};
use orthodac::signals::{
    demap_symbols, map_symbols, nrz_shape, nyquist_shape, prbs_bits, tone, Lfsr, Modulation,
    Quadrature, SymbolStream,
};
use orthodac::TimeGrid;
use proptest::prelude::*;

fn bpsk(values: &[f64], rate: f64) -> SymbolStream {
    let bits: Vec<u8> = values.iter().map(|&v| u8::from(v > 0.0)).collect();
    map_symbols(&bits, Modulation::Bpsk, rate).unwrap()
}

#[test]
fn prbs_orders_have_full_period() {
    for order in [7u32, 9, 15] {
        let period = (1usize << order) - 1;
        let bits = prbs_bits(order, 2 * period, 1).unwrap();
        assert_eq!(bits[..period], bits[period..]);
        let ones = bits[..period].iter().filter(|&&b| b == 1).count();
        assert_eq!(2 * ones as i64 - period as i64, 1, "order {order}");
        assert_eq!(Lfsr::new(order, 3).unwrap().period(), period as u64);
    }
    assert!(prbs_bits(7, 10, 0).is_err());
    assert!(prbs_bits(8, 10, 1).is_err());
}

#[test]
fn prbs7_has_no_shorter_period() {
    let bits = prbs_bits(7, 254, 5).unwrap();
    for shift in 1..127 {
        assert!((0..127).any(|i| bits[i] != bits[i + shift]), "shift {shift}");
    }
}

#[test]
fn qam16_constellation() {
    let all: Vec<u8> = (0..16u8).flat_map(|v| (0..4).rev().map(move |b| (v >> b) & 1)).collect();
    let s = map_symbols(&all, Modulation::Qam16, 120e9).unwrap();
    assert_eq!(s.len(), 16);
    let power = s.symbols.iter().map(|z| z.norm_sqr()).sum::<f64>() / 16.0;
    assert!((power - 1.0).abs() < 1e-12);
    let step = 2.0 / 10f64.sqrt();
    for i in 0..16 {
        for j in 0..16 {
            let d = s.symbols[i] - s.symbols[j];
            let neighbour = ((d.re.abs() - step).abs() < 1e-9 && d.im.abs() < 1e-9)
                || ((d.im.abs() - step).abs() < 1e-9 && d.re.abs() < 1e-9);
            if neighbour {
                assert_eq!((i ^ j).count_ones(), 1, "{i:04b} vs {j:04b}");
            }
        }
    }
    assert!(map_symbols(&all[..6], Modulation::Qam16, 120e9).is_err());
}

proptest! {
    #[test]
    fn mapping_round_trips(bits in prop::collection::vec(0u8..2, 4..64).prop_map(|mut v| { v.truncate(v.len() / 4 * 4); v })) {
        for format in [Modulation::Bpsk, Modulation::Qam16] {
            let s = map_symbols(&bits, format, 1e9).unwrap();
            prop_assert_eq!(demap_symbols(&s.symbols, format), bits.clone());
        }
    }

    #[test]
    fn nyquist_shaping_is_linear(a in prop::collection::vec(-2f64..2.0, 24), b in prop::collection::vec(-2f64..2.0, 24), alpha in -3f64..3.0) {
        let grid = TimeGrid::covering(10e9, 24, 3).unwrap();
        let stream = |v: &[f64]| SymbolStream {
            symbols: v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            ..bpsk(&vec![1.0; v.len()], 10e9)
        };
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + y).collect();
        let ya = nyquist_shape(&stream(&a), Quadrature::I, &grid, Extent::Finite).unwrap();
        let yb = nyquist_shape(&stream(&b), Quadrature::I, &grid, Extent::Finite).unwrap();
        let ym = nyquist_shape(&stream(&mix), Quadrature::I, &grid, Extent::Finite).unwrap();
        for i in 0..grid.len {
            prop_assert!((ym.samples()[i] - alpha * ya.samples()[i] - yb.samples()[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn nyquist_waveform_hits_symbols() {
    let bits = prbs_bits(7, 256, 1).unwrap();
    let s = map_symbols(&bits, Modulation::Bpsk, 60e9).unwrap();
    let grid = TimeGrid::covering(60e9, s.len(), 8).unwrap();
    let w = nyquist_shape(&s, Quadrature::I, &grid, Extent::Finite).unwrap();
    for k in 16..s.len() - 16 {
        assert!((w.samples()[8 * k] - s.symbols[k].re).abs() < 1e-9);
    }
    assert!(nyquist_shape(&s, Quadrature::I, &TimeGrid::covering(30e9, 10, 1).unwrap(), Extent::Finite).is_err());
}

#[test]
fn nyquist_spectrum_is_contained() {
    let bits = prbs_bits(9, 1024, 3).unwrap();
    let s = map_symbols(&bits, Modulation::Bpsk, 60e9).unwrap();
    let grid = TimeGrid::covering(60e9, s.len(), 4).unwrap();
    let w = nyquist_shape(&s, Quadrature::I, &grid, Extent::Periodic).unwrap();
    let spec = spectrum(&w).unwrap();
    let (mut inside, mut outside) = (0.0, 0.0);
    for q in 0..spec.len() {
        let p = spec.magnitudes[q].powi(2);
        if spec.signed_frequency(q).abs() <= 30e9 {
            inside += p;
        } else {
            outside += p;
        }
    }
    assert!(10.0 * (outside / inside).log10() <= -60.0);
}

#[test]
fn nrz_recovers_symbols() {
    let bits = prbs_bits(7, 127, 1).unwrap();
    let s = map_symbols(&bits, Modulation::Bpsk, 12e9).unwrap();
    let grid = TimeGrid::covering(12e9, s.len(), 16).unwrap();
    let narrow = nrz_shape(&s, Quadrature::I, 6e9, &grid).unwrap();
    let wide = nrz_shape(&s, Quadrature::I, 96e9, &grid).unwrap();
    for k in 2..s.len() - 2 {
        let sym = s.symbols[k].re;
        assert_eq!(narrow.samples()[16 * k].signum(), sym.signum(), "symbol {k}");
        assert!((wide.samples()[16 * k] - sym).abs() < 0.1, "symbol {k}");
    }
    let ones = bpsk(&[1.0; 32], 12e9);
    let flat = nrz_shape(&ones, Quadrature::I, 24e9, &TimeGrid::new(-0.5 / 12e9, 12e9 * 8.0, 256).unwrap()).unwrap();
    for v in flat.samples() {
        assert!((v - 1.0).abs() < 1e-9);
    }
}

#[test]
fn tone_is_a_single_line() {
    let grid = TimeGrid::new(0.0, 480e9, 1024).unwrap();
    let w = tone(30e9, 0.0, 1.0, &grid).unwrap();
    assert_eq!(w.samples()[0], 1.0);
    assert!(tone(30e9, 90.0, 1.0, &grid).unwrap().samples()[0].abs() < 1e-15);
    let spec = spectrum(&w).unwrap();
    let line = 64;
    for q in 0..spec.len() {
        if q != line && q != spec.len() - line {
            assert!(spec.magnitudes[q] < 1e-9 * spec.magnitudes[line]);
        }
    }
    assert!(tone(240e9, 0.0, 1.0, &grid).is_err());
}
