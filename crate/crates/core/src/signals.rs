//! Test-signal sources.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::{brickwall_lowpass, render, Extent};
use crate::error::{invalid_input, Result};
use crate::waveform::{SampledWaveform, TimeGrid};

/// Fibonacci LFSR over the ITU-T O.150 polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lfsr {
    order: u32,
    tap: u32,
    state: u32,
}

impl Lfsr {
    /// `seed` is the initial register content (low `order` bits, nonzero).
    pub fn new(order: u32, seed: u32) -> Result<Self> {
        let tap = match order {
            7 => 6,
            9 => 5,
            15 => 14,
            23 => 18,
            31 => 28,
            _ => {
                return invalid_input(format!(
                    "unsupported PRBS order {order}; use 7, 9, 15, 23 or 31"
                ))
            }
        };
        let state = seed & mask(order);
        if state == 0 {
            return invalid_input("PRBS seed must be nonzero");
        }
        Ok(Self { order, tap, state })
    }

    pub fn period(&self) -> u64 {
        (1u64 << self.order) - 1
    }

    pub fn next_bit(&mut self) -> u8 {
        // x^order + x^tap + 1
        let bit = ((self.state >> (self.order - 1)) ^ (self.state >> (self.tap - 1))) & 1;
        self.state = ((self.state << 1) | bit) & mask(self.order);
        bit as u8
    }
}

fn mask(order: u32) -> u32 {
    if order >= 32 {
        u32::MAX
    } else {
        (1u32 << order) - 1
    }
}

/// `length` bits of a maximal-length sequence.
pub fn prbs_bits(order: u32, length: usize, seed: u32) -> Result<Vec<u8>> {
    let mut lfsr = Lfsr::new(order, seed)?;
    Ok((0..length).map(|_| lfsr.next_bit()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qam16,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qam16 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    I,
    Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    pub symbols: Vec<Complex64>,
    pub symbol_rate: f64,
    pub format: Modulation,
    pub source_bits: Vec<u8>,
}

const QAM16_SCALE: f64 = 0.316_227_766_016_837_94; // 1/√10

// Gray code over two bits: 00 → -3, 01 → -1, 11 → +1, 10 → +3
fn gray_level(b0: u8, b1: u8) -> f64 {
    match (b0, b1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

fn gray_bits(level: f64) -> [u8; 2] {
    if level < -2.0 {
        [0, 0]
    } else if level < 0.0 {
        [0, 1]
    } else if level < 2.0 {
        [1, 1]
    } else {
        [1, 0]
    }
}

/// BPSK: 0 → -1, 1 → +1. QAM-16: bits `[i0 i1 q0 q1]` Gray-coded per
/// quadrature onto `{-3, -1, 1, 3}/√10` (unit average power).
pub fn map_symbols(bits: &[u8], format: Modulation, symbol_rate: f64) -> Result<SymbolStream> {
    let bps = format.bits_per_symbol();
    if bits.is_empty() || !bits.len().is_multiple_of(bps) {
        return invalid_input(format!(
            "{} bits cannot be mapped to whole {format:?} symbols",
            bits.len()
        ));
    }
    if !(symbol_rate > 0.0 && symbol_rate.is_finite()) {
        return invalid_input("symbol rate must be positive");
    }
    if bits.iter().any(|&b| b > 1) {
        return invalid_input("bits must be 0 or 1");
    }
    let symbols = match format {
        Modulation::Bpsk => bits
            .iter()
            .map(|&b| Complex64::new(if b == 1 { 1.0 } else { -1.0 }, 0.0))
            .collect(),
        Modulation::Qam16 => bits
            .chunks_exact(4)
            .map(|c| {
                Complex64::new(gray_level(c[0], c[1]), gray_level(c[2], c[3])) * QAM16_SCALE
            })
            .collect(),
    };
    Ok(SymbolStream {
        symbols,
        symbol_rate,
        format,
        source_bits: bits.to_vec(),
    })
}

/// Nearest-point decisions back to bits.
pub fn demap_symbols(symbols: &[Complex64], format: Modulation) -> Vec<u8> {
    match format {
        Modulation::Bpsk => symbols.iter().map(|s| u8::from(s.re >= 0.0)).collect(),
        Modulation::Qam16 => symbols
            .iter()
            .flat_map(|s| {
                let i = gray_bits(s.re / QAM16_SCALE);
                let q = gray_bits(s.im / QAM16_SCALE);
                [i[0], i[1], q[0], q[1]]
            })
            .collect(),
    }
}

impl SymbolStream {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn component(&self, quadrature: Quadrature) -> Vec<f64> {
        self.symbols
            .iter()
            .map(|s| match quadrature {
                Quadrature::I => s.re,
                Quadrature::Q => s.im,
            })
            .collect()
    }

    /// Time of symbol `k`.
    pub fn instant(&self, k: usize) -> f64 {
        k as f64 / self.symbol_rate
    }
}

/// Ideal Nyquist (sinc) pulse shaping of one quadrature:
/// `Σ_k a_k · sinc(R t - k)`, or its looped version for [`Extent::Periodic`].
pub fn nyquist_shape(
    stream: &SymbolStream,
    quadrature: Quadrature,
    grid: &TimeGrid,
    extent: Extent,
) -> Result<SampledWaveform> {
    if grid.rate < stream.symbol_rate * (1.0 - 1e-12) {
        return invalid_input("grid rate below the symbol rate");
    }
    let amps = stream.component(quadrature);
    SampledWaveform::on_grid(
        render(&amps, stream.symbol_rate, 0.0, None, grid, extent)?,
        grid,
    )
}

/// Rectangular (NRZ) symbols centred on `k / R`, then an ideal low-pass at
/// `bandwidth`.
pub fn nrz_shape(
    stream: &SymbolStream,
    quadrature: Quadrature,
    bandwidth: f64,
    grid: &TimeGrid,
) -> Result<SampledWaveform> {
    if bandwidth < stream.symbol_rate / 2.0 * (1.0 - 1e-12) {
        return invalid_input("NRZ bandwidth below half the symbol rate");
    }
    let amps = stream.component(quadrature);
    let r = stream.symbol_rate;
    let held: Vec<f64> = grid
        .times()
        .map(|t| {
            let k = (t * r + 0.5).floor();
            if k >= 0.0 && (k as usize) < amps.len() {
                amps[k as usize]
            } else {
                0.0
            }
        })
        .collect();
    let held = SampledWaveform::on_grid(held, grid)?;
    brickwall_lowpass(&held, bandwidth)
}

/// `amplitude · cos(2πft + phase)` on a grid; `f` must stay below the grid's
/// Nyquist frequency.
pub fn tone(frequency: f64, phase_deg: f64, amplitude: f64, grid: &TimeGrid) -> Result<SampledWaveform> {
    if !(frequency >= 0.0 && frequency < grid.rate / 2.0) {
        return invalid_input(format!(
            "tone at {frequency} Hz aliases on a {} Hz grid",
            grid.rate
        ));
    }
    let phase = phase_deg / 360.0;
    let samples = (0..grid.len)
        .map(|i| {
            let cycles = (frequency * grid.time(i) + phase).rem_euclid(1.0);
            amplitude * (2.0 * PI * cycles).cos()
        })
        .collect();
    SampledWaveform::on_grid(samples, grid)
}

/// Samples of a cosine taken at `rate` for use as a DAC input stream. Unlike
/// [`tone`] a frequency exactly at `rate / 2` is allowed (alternating ±A for
/// zero phase).
pub fn tone_samples(
    frequency: f64,
    phase_deg: f64,
    amplitude: f64,
    rate: f64,
    len: usize,
) -> Result<Vec<f64>> {
    if !(frequency >= 0.0 && frequency <= rate / 2.0) {
        return invalid_input(format!(
            "tone at {frequency} Hz exceeds the Nyquist frequency of {rate} Hz sampling"
        ));
    }
    let ratio = frequency / rate;
    let phase = phase_deg / 360.0;
    Ok((0..len)
        .map(|k| {
            let cycles = (ratio * k as f64 + phase).rem_euclid(1.0);
            if cycles == 0.0 {
                amplitude
            } else if cycles == 0.5 {
                -amplitude
            } else {
                amplitude * (2.0 * PI * cycles).cos()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{sinc, spectrum};

    #[test]
    fn prbs7_is_periodic_and_balanced() {
        let bits = prbs_bits(7, 254, 1).unwrap();
        assert_eq!(&bits[..127], &bits[127..]);
        // no shorter period
        for p in 1..127 {
            assert!((0..127).any(|i| bits[i] != bits[(i + p) % 127]), "period {p}");
        }
        for seed in [1u32, 0x2a, 0x7f, 0x55] {
            let b = prbs_bits(7, 127, seed).unwrap();
            let ones = b.iter().filter(|&&x| x == 1).count() as i64;
            assert_eq!(ones - (127 - ones), 1);
        }
    }

    #[test]
    fn prbs_orders_have_full_period() {
        for order in [7u32, 9, 15] {
            let mut l = Lfsr::new(order, 1).unwrap();
            let start = l;
            let mut n = 0u64;
            loop {
                l.next_bit();
                n += 1;
                if l == start {
                    break;
                }
            }
            assert_eq!(n, l.period());
        }
    }

    #[test]
    fn prbs_rejects_bad_input() {
        assert!(prbs_bits(7, 10, 0).is_err());
        assert!(prbs_bits(7, 10, 0x80).is_err());
        assert!(prbs_bits(8, 10, 1).is_err());
    }

    #[test]
    fn bpsk_mapping() {
        let s = map_symbols(&[0, 1, 1, 0], Modulation::Bpsk, 1.0).unwrap();
        let re: Vec<f64> = s.symbols.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![-1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn qam16_unit_power_and_gray() {
        let bits: Vec<u8> = (0..16u8)
            .flat_map(|v| [(v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1])
            .collect();
        let s = map_symbols(&bits, Modulation::Qam16, 1.0).unwrap();
        let power = s.symbols.iter().map(|c| c.norm_sqr()).sum::<f64>() / 16.0;
        assert!((power - 1.0).abs() < 1e-15);
        let step = 2.0 * QAM16_SCALE;
        for (a, ba) in s.symbols.iter().zip(bits.chunks(4)) {
            for (b, bb) in s.symbols.iter().zip(bits.chunks(4)) {
                let d = a - b;
                let adjacent = ((d.re.abs() - step).abs() < 1e-9 && d.im.abs() < 1e-9)
                    || ((d.im.abs() - step).abs() < 1e-9 && d.re.abs() < 1e-9);
                if adjacent {
                    let diff = ba.iter().zip(bb).filter(|(x, y)| x != y).count();
                    assert_eq!(diff, 1);
                }
            }
        }
    }

    #[test]
    fn mapping_length_mismatch() {
        assert!(map_symbols(&[0, 1, 1], Modulation::Qam16, 1.0).is_err());
        assert!(map_symbols(&[], Modulation::Bpsk, 1.0).is_err());
    }

    #[test]
    fn single_symbol_is_one_kernel() {
        let s = map_symbols(&[1], Modulation::Bpsk, 2.0).unwrap();
        let grid = TimeGrid::new(-3.0, 8.0, 64).unwrap();
        let w = nyquist_shape(&s, Quadrature::I, &grid, Extent::Finite).unwrap();
        for (i, v) in w.samples().iter().enumerate() {
            assert!((v - sinc(2.0 * grid.time(i))).abs() < 1e-14);
        }
    }

    #[test]
    fn nyquist_hits_symbols() {
        let bits = prbs_bits(7, 400, 3).unwrap();
        let s = map_symbols(&bits, Modulation::Bpsk, 60e9).unwrap();
        let grid = TimeGrid::covering(60e9, 400, 4).unwrap();
        let w = nyquist_shape(&s, Quadrature::I, &grid, Extent::Finite).unwrap();
        for k in 64..336 {
            assert!((w.samples()[4 * k] - s.symbols[k].re).abs() < 1e-9);
        }
        let coarse = TimeGrid::new(0.0, 30e9, 10).unwrap();
        assert!(nyquist_shape(&s, Quadrature::I, &coarse, Extent::Finite).is_err());
    }

    #[test]
    fn nrz_square_and_constant() {
        let alt: Vec<u8> = (0..64).map(|k| (k % 2) as u8).collect();
        let s = map_symbols(&alt, Modulation::Bpsk, 1.0).unwrap();
        let grid = TimeGrid::covering(1.0, 64, 8).unwrap();
        let w = nrz_shape(&s, Quadrature::I, 4.0, &grid).unwrap();
        for k in 0..64 {
            assert!((w.samples()[8 * k] - s.symbols[k].re).abs() < 0.02);
        }
        let ones = map_symbols(&[1; 32], Modulation::Bpsk, 1.0).unwrap();
        let grid = TimeGrid::new(-0.5, 8.0, 256).unwrap();
        let w = nrz_shape(&ones, Quadrature::I, 0.5, &grid).unwrap();
        assert!(w.samples().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(nrz_shape(&ones, Quadrature::I, 0.4, &grid).is_err());
    }

    #[test]
    fn nrz_eye_open_at_half_rate() {
        let bits = prbs_bits(7, 254, 1).unwrap();
        let s = map_symbols(&bits, Modulation::Bpsk, 12e9).unwrap();
        let grid = TimeGrid::covering(12e9, 254, 8).unwrap();
        let w = nrz_shape(&s, Quadrature::I, 6e9, &grid).unwrap();
        for (k, &b) in bits.iter().enumerate() {
            assert_eq!(w.samples()[8 * k] > 0.0, b == 1, "symbol {k}");
        }
    }

    #[test]
    fn tone_values() {
        let grid = TimeGrid::new(0.0, 480e9, 480).unwrap();
        let a = tone(30e9, 0.0, 0.7, &grid).unwrap();
        assert_eq!(a.samples()[0], 0.7);
        let b = tone(30e9, 90.0, 1.0, &grid).unwrap();
        assert!(b.samples()[0].abs() < 1e-15);
        assert!(tone(240e9, 0.0, 1.0, &grid).is_err());
        let spec = spectrum(&a).unwrap();
        // 480 samples at 480 GS/s span 30 periods → bin 30
        for (q, m) in spec.magnitudes.iter().enumerate() {
            if q == 30 || q == 450 {
                assert!((m - 0.7 * 240.0).abs() < 1e-9);
            } else {
                assert!(*m < 1e-9);
            }
        }
    }

    #[test]
    fn nyquist_edge_samples_alternate() {
        let s = tone_samples(30e9, 0.0, 1.0, 60e9, 6).unwrap();
        assert_eq!(s, vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        assert!(tone_samples(31e9, 0.0, 1.0, 60e9, 6).is_err());
    }

    #[test]
    fn bits_round_trip() {
        let bits = prbs_bits(9, 400, 77).unwrap();
        for fmt in [Modulation::Bpsk, Modulation::Qam16] {
            let s = map_symbols(&bits, fmt, 1.0).unwrap();
            assert_eq!(demap_symbols(&s.symbols, fmt), bits);
        }
    }
}
