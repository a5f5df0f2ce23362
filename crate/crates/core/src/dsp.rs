//! Sinc kernel, band-limited reconstruction and DFT-based filtering.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Result};
use crate::waveform::{SampledWaveform, TimeGrid};

/// Normalized sinc, `sin(πx) / (πx)`, with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        sin_pi(x) / px
    }
}

/// `sin(πx)` with the argument reduced modulo 2 first so that integer `x`
/// gives an exact zero.
#[inline]
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x % 2.0;
    if r == 0.0 || r.abs() == 1.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

#[inline]
pub(crate) fn cos_pi(x: f64) -> f64 {
    let r = x % 2.0;
    if r.abs() == 0.5 || r.abs() == 1.5 {
        0.0
    } else {
        (PI * r).cos()
    }
}

/// Renders a train of sinc kernels on `grid`:
///
/// `y(t) = Σ_k samples[k] · sinc(rate · (t - origin - shifts[k]) - k)`
///
/// `shifts` are per-kernel timing offsets in seconds (jitter); `None` means
/// every kernel sits on its nominal instant `origin + k / rate`.
///
/// The sum runs over the whole sample array. Large problems on a grid whose
/// rate is an integer multiple of `rate` go through FFT convolutions (see
/// `sinc_train_fast`); everything else is summed term by term.
pub fn sinc_train(
    samples: &[f64],
    rate: f64,
    origin: f64,
    shifts: Option<&[f64]>,
    grid: &TimeGrid,
) -> Vec<f64> {
    let work = samples.len() as f64 * grid.len as f64;
    match integer_ratio(grid.rate / rate) {
        Some(over) if work > FAST_THRESHOLD => {
            sinc_train_fast(samples, rate, origin, shifts, grid, over)
        }
        _ => sinc_train_direct(samples, rate, origin, shifts, grid),
    }
}

const FAST_THRESHOLD: f64 = 4e6;

fn integer_ratio(r: f64) -> Option<usize> {
    let n = r.round();
    (n >= 1.0 && (r - n).abs() <= 1e-9 * n).then_some(n as usize)
}

// Splits every kernel into sin(πx)·a_k - cos(πx)·b_k over π(x - k - d_k), with
// a_k = (-1)^k s_k cos(πd_k) and b_k = (-1)^k s_k sin(πd_k).
fn kernel_weights(samples: &[f64], rate: f64, shifts: Option<&[f64]>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = samples.len();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    let mut d = Vec::with_capacity(m);
    for (k, &s) in samples.iter().enumerate() {
        let dk = shifts.map_or(0.0, |sh| rate * sh[k]);
        let sgn = if k % 2 == 0 { s } else { -s };
        if dk == 0.0 {
            a.push(sgn);
            b.push(0.0);
        } else {
            a.push(sgn * cos_pi(dk));
            b.push(sgn * sin_pi(dk));
        }
        d.push(dk);
    }
    (a, b, d)
}

/// Term-by-term evaluation, one division per kernel; kernels within one
/// sample of the evaluation point are summed directly to avoid the removable
/// singularity.
pub(crate) fn sinc_train_direct(
    samples: &[f64],
    rate: f64,
    origin: f64,
    shifts: Option<&[f64]>,
    grid: &TimeGrid,
) -> Vec<f64> {
    let m = samples.len();
    let (a, b, d) = kernel_weights(samples, rate, shifts);
    let dmax = d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let c: Vec<f64> = d.iter().enumerate().map(|(k, dk)| k as f64 + dk).collect();

    let x0 = rate * (grid.t0 - origin);
    let step = rate / grid.rate;
    let reach = dmax + 1.0;
    (0..grid.len)
        .map(|j| {
            let x = x0 + j as f64 * step;
            let lo = (x - reach).floor().max(0.0).min(m as f64) as usize;
            let hi = ((x + reach).ceil() + 1.0).max(0.0).min(m as f64) as usize;
            let (s1a, s2a) = far_sum(x, &a[..lo], &b[..lo], &c[..lo]);
            let (s1b, s2b) = far_sum(x, &a[hi..], &b[hi..], &c[hi..]);
            let far = (sin_pi(x) * (s1a + s1b) - cos_pi(x) * (s2a + s2b)) / PI;
            let near: f64 = (lo..hi).map(|k| samples[k] * sinc(x - c[k])).sum();
            far + near
        })
        .collect()
}

/// FFT evaluation for grids with `over` points per sample period.
///
/// Grid points sharing a phase `p` sit at `x = φ_p + q`. Kernels more than
/// `M` samples away contribute `w_k / (n + f - d_k)` with integer `n`; the
/// expansion `Σ_m d_k^m / (n + f)^(m+1)` turns each order into a discrete
/// convolution. `M ≥ 16 · max|d_k|` keeps the series ratio below 1/16 and it is
/// summed until the remainder drops below double precision. Kernels within
/// `M` samples are summed directly.
pub(crate) fn sinc_train_fast(
    samples: &[f64],
    rate: f64,
    origin: f64,
    shifts: Option<&[f64]>,
    grid: &TimeGrid,
    over: usize,
) -> Vec<f64> {
    let k_len = samples.len();
    let (a, b, d) = kernel_weights(samples, rate, shifts);
    let dmax = d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let near = (16.0 * dmax).ceil().max(8.0) as i64;
    let terms = if dmax == 0.0 {
        1
    } else {
        let ratio = dmax / near as f64;
        ((-37.0 / ratio.log10().min(-1.0)).ceil() as usize).max(1)
    };

    let x0 = rate * (grid.t0 - origin);
    let q_max = grid.len.div_ceil(over);
    let size = (k_len + q_max).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    // spectra of (a + jb)·d^m, shared by all phases
    let mut weights: Vec<Complex64> = a
        .iter()
        .zip(&b)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    let mut spectra = Vec::with_capacity(terms);
    for m in 0..terms {
        if m > 0 {
            weights.iter_mut().zip(&d).for_each(|(w, dk)| *w *= *dk);
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        buf[..k_len].copy_from_slice(&weights);
        fwd.process(&mut buf);
        spectra.push(buf);
    }

    let mut out = vec![0.0; grid.len];
    let scale = 1.0 / size as f64;
    for p in 0..over.min(grid.len) {
        let count = (grid.len - p).div_ceil(over);
        let phi = x0 + p as f64 / over as f64;
        let n0 = phi.floor();
        let f = phi - n0;
        let n0 = n0 as i64;
        // kernel index t covers n = nlo + t
        let nlo = n0 - k_len as i64 + 1;
        let mut acc = vec![Complex64::new(0.0, 0.0); size];
        let mut kernel = vec![Complex64::new(0.0, 0.0); size];
        for (m, spec) in spectra.iter().enumerate() {
            for (t, h) in kernel.iter_mut().enumerate() {
                let n = nlo + t as i64;
                *h = if t >= k_len + count - 1 || n.abs() <= near {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new((n as f64 + f).powi(-(m as i32 + 1)), 0.0)
                };
            }
            fwd.process(&mut kernel);
            acc.iter_mut()
                .zip(spec)
                .zip(&kernel)
                .for_each(|((o, u), h)| *o += u * h);
        }
        inv.process(&mut acc);

        for q in 0..count {
            let x = phi + q as f64;
            let i = n0 + q as i64;
            let mut t = acc[q + k_len - 1] * scale;
            let mut y = 0.0;
            let lo = (i - near).clamp(0, k_len as i64) as usize;
            let hi = (i + near + 1).clamp(0, k_len as i64) as usize;
            for k in lo..hi {
                let u = x - k as f64 - d[k];
                if u.abs() < 0.5 {
                    y += samples[k] * sinc(u);
                } else {
                    t += Complex64::new(a[k], b[k]) / u;
                }
            }
            out[p + q * over] = y + (sin_pi(x) * t.re - cos_pi(x) * t.im) / PI;
        }
    }
    out
}

/// How a finite sample memory is played out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extent {
    /// The samples are played once; the output is the finite kernel sum.
    #[default]
    Finite,
    /// The memory loops forever, as in an arbitrary waveform generator. Each
    /// kernel becomes its periodic sum with period `len / rate`.
    Periodic,
}

/// [`sinc_train`] or [`periodic_sinc_train`] depending on `extent`.
pub fn render(
    samples: &[f64],
    rate: f64,
    origin: f64,
    shifts: Option<&[f64]>,
    grid: &TimeGrid,
    extent: Extent,
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return invalid_input("no samples to render");
    }
    if let Some(sh) = shifts {
        if sh.len() != samples.len() {
            return invalid_input(format!(
                "{} timing offsets for {} samples",
                sh.len(),
                samples.len()
            ));
        }
    }
    match extent {
        Extent::Finite => Ok(sinc_train(samples, rate, origin, shifts, grid)),
        Extent::Periodic => periodic_sinc_train(samples, rate, origin, shifts, grid),
    }
}

/// Periodic sinc kernel for an even period of `k` samples:
/// `Σ_m sinc(u - m·k) = sin(πu) · cot(πu/k) / k`.
pub fn periodic_sinc(u: f64, k: usize) -> f64 {
    let kf = k as f64;
    let v = u - kf * (u / kf).round();
    if v.abs() < 1e-9 {
        // sin(πv)cot(πv/k)/k = 1 - π²v²(k² - 1)/(6k²) + ...
        return 1.0 - PI * PI * v * v * (kf * kf - 1.0) / (6.0 * kf * kf);
    }
    sin_pi(v) / ((PI * v / kf).tan() * kf)
}

const PERIODIC_FAST_THRESHOLD: f64 = 2.5e5;

/// Looped playback of an even-length sample memory:
///
/// `y(t) = Σ_k samples[k] · P(rate · (t - origin - shifts[k]) - k)` with the
/// periodic kernel [`periodic_sinc`].
pub fn periodic_sinc_train(
    samples: &[f64],
    rate: f64,
    origin: f64,
    shifts: Option<&[f64]>,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let k_len = samples.len();
    if k_len == 0 || !k_len.is_multiple_of(2) {
        return invalid_input(format!(
            "periodic playback needs an even, nonzero sample count, got {k_len}"
        ));
    }
    let work = k_len as f64 * grid.len as f64;
    Ok(match integer_ratio(grid.rate / rate) {
        Some(over) if work > PERIODIC_FAST_THRESHOLD && k_len >= 64 => {
            periodic_train_fast(samples, rate, origin, shifts, grid, over)
        }
        _ => periodic_train_direct(samples, rate, origin, shifts, grid),
    })
}

pub(crate) fn periodic_train_direct(
    samples: &[f64],
    rate: f64,
    origin: f64,
    shifts: Option<&[f64]>,
    grid: &TimeGrid,
) -> Vec<f64> {
    let k_len = samples.len();
    let x0 = rate * (grid.t0 - origin);
    let step = rate / grid.rate;
    (0..grid.len)
        .map(|j| {
            let x = x0 + j as f64 * step;
            samples
                .iter()
                .enumerate()
                .map(|(k, &s)| {
                    let d = shifts.map_or(0.0, |sh| rate * sh[k]);
                    s * periodic_sinc(x - k as f64 - d, k_len)
                })
                .sum()
        })
        .collect()
}

/// `(-1)^m g^(m)(z) / m!` for `g(z) = (π/K)·cot(πz/K)` is
/// `(π/K)^(m+1) · Q_m(cot(πz/K))` with `Q_0(c) = c` and
/// `Q_(m+1) = (1 + c²) Q_m' / (m + 1)`. Returns the coefficient vectors.
fn cot_taylor_polys(terms: usize) -> Vec<Vec<f64>> {
    let mut polys = vec![vec![0.0, 1.0]];
    for m in 0..terms.saturating_sub(1) {
        let p = &polys[m];
        let deriv: Vec<f64> = (1..p.len()).map(|i| i as f64 * p[i]).collect();
        let mut next = vec![0.0; deriv.len() + 2];
        for (i, c) in deriv.iter().enumerate() {
            next[i] += c / (m + 1) as f64;
            next[i + 2] += c / (m + 1) as f64;
        }
        polys.push(next);
    }
    polys
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Periodic counterpart of [`sinc_train_fast`]. With
/// `Σ_m sinc(u - mK) = sin(πu)/π · g(u)`, the far field of every grid phase is
/// a cyclic convolution of length `K` per Taylor order of `g(z - d)`.
fn periodic_train_fast(
    samples: &[f64],
    rate: f64,
    origin: f64,
    shifts: Option<&[f64]>,
    grid: &TimeGrid,
    over: usize,
) -> Vec<f64> {
    let k_len = samples.len();
    let kf = k_len as f64;
    let (a, b, d) = kernel_weights(samples, rate, shifts);
    let dmax = d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let near = ((16.0 * dmax).ceil().max(8.0) as i64).min(k_len as i64 / 2 - 1);
    if dmax >= near as f64 / 4.0 {
        return periodic_train_direct(samples, rate, origin, shifts, grid);
    }
    let terms = if dmax == 0.0 {
        1
    } else {
        let ratio = dmax / near as f64;
        ((-37.0 / ratio.log10().min(-0.5)).ceil() as usize).max(1)
    };
    let polys = cot_taylor_polys(terms);

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(k_len);
    let inv = planner.plan_fft_inverse(k_len);

    let mut weights: Vec<Complex64> = a
        .iter()
        .zip(&b)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    let mut spectra = Vec::with_capacity(terms);
    for m in 0..terms {
        if m > 0 {
            weights.iter_mut().zip(&d).for_each(|(w, dk)| *w *= *dk);
        }
        let mut buf = weights.clone();
        fwd.process(&mut buf);
        spectra.push(buf);
    }

    let x0 = rate * (grid.t0 - origin);
    let unit = PI / kf;
    let half = k_len as i64 / 2;
    let mut out = vec![0.0; grid.len];
    let scale = 1.0 / kf;
    for p in 0..over.min(grid.len) {
        let count = (grid.len - p).div_ceil(over);
        let phi = x0 + p as f64 / over as f64;
        let n0 = phi.floor();
        let f = phi - n0;
        let n0 = n0 as i64;
        let cots: Vec<f64> = (0..k_len)
            .map(|n| 1.0 / (unit * (n as f64 + f)).tan())
            .collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); k_len];
        let mut kernel = vec![Complex64::new(0.0, 0.0); k_len];
        for (m, spec) in spectra.iter().enumerate() {
            let gain = unit.powi(m as i32 + 1);
            for (n, h) in kernel.iter_mut().enumerate() {
                // signed periodic distance of index n
                let ns = if (n as i64) > half { n as i64 - k_len as i64 } else { n as i64 };
                *h = if ns.abs() <= near {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(gain * poly_eval(&polys[m], cots[n]), 0.0)
                };
            }
            fwd.process(&mut kernel);
            acc.iter_mut()
                .zip(spec)
                .zip(&kernel)
                .for_each(|((o, u), h)| *o += u * h);
        }
        inv.process(&mut acc);

        for q in 0..count {
            let x = phi + q as f64;
            let i = n0 + q as i64;
            let mut t = acc[i.rem_euclid(k_len as i64) as usize] * scale;
            let mut y = 0.0;
            for off in -near..=near {
                let k = (i - off).rem_euclid(k_len as i64) as usize;
                // periodic image of kernel k closest to x
                let u = (off as f64 + f) - d[k];
                if u.abs() < 0.5 {
                    y += samples[k] * periodic_sinc(u, k_len);
                } else {
                    t += Complex64::new(a[k], b[k]) * unit / (unit * u).tan();
                }
            }
            out[p + q * over] = y + (sin_pi(x) * t.re - cos_pi(x) * t.im) / PI;
        }
    }
    out
}

#[inline]
fn far_sum(x: f64, a: &[f64], b: &[f64], c: &[f64]) -> (f64, f64) {
    let mut s1 = [0.0f64; 4];
    let mut s2 = [0.0f64; 4];
    let n4 = a.len() / 4 * 4;
    for ((ac, bc), cc) in a[..n4]
        .chunks_exact(4)
        .zip(b[..n4].chunks_exact(4))
        .zip(c[..n4].chunks_exact(4))
    {
        for i in 0..4 {
            let inv = 1.0 / (x - cc[i]);
            s1[i] += ac[i] * inv;
            s2[i] += bc[i] * inv;
        }
    }
    let mut t1 = s1[0] + s1[1] + s1[2] + s1[3];
    let mut t2 = s2[0] + s2[1] + s2[2] + s2[3];
    for i in n4..a.len() {
        let inv = 1.0 / (x - c[i]);
        t1 += a[i] * inv;
        t2 += b[i] * inv;
    }
    (t1, t2)
}

/// Band-limited reconstruction `Σ_k samples[k] · sinc(rate · t - k)` on a
/// uniform grid. Sample `k` sits at `t = k / rate`.
pub fn ideal_reconstruct(samples: &[f64], rate: f64, grid: &TimeGrid) -> Result<SampledWaveform> {
    if samples.is_empty() {
        return invalid_input("cannot reconstruct from an empty sample array");
    }
    if !(rate.is_finite() && rate > 0.0) {
        return invalid_input(format!("sample rate must be positive, got {rate}"));
    }
    SampledWaveform::on_grid(sinc_train(samples, rate, 0.0, None, grid), grid)
}

/// Signed frequency of DFT bin `q` for a length-`len` transform.
pub fn bin_frequency(q: usize, len: usize, rate: f64) -> f64 {
    if q <= len / 2 {
        q as f64 * rate / len as f64
    } else {
        (q as f64 - len as f64) * rate / len as f64
    }
}

pub(crate) fn fft_in_place(data: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(data.len()).process(data);
}

/// Unnormalized inverse DFT.
pub(crate) fn ifft_in_place(data: &mut [Complex64]) {
    FftPlanner::new().plan_fft_inverse(data.len()).process(data);
}

pub(crate) fn fft_real(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf);
    buf
}

/// Ideal low-pass on a complex sequence: bins with `|f| > cutoff` are zeroed.
/// A bin exactly at `|f| = cutoff` passes.
pub fn brickwall_complex(samples: &[Complex64], rate: f64, cutoff: f64) -> Vec<Complex64> {
    let len = samples.len();
    let mut buf = samples.to_vec();
    fft_in_place(&mut buf);
    let edge = cutoff * (1.0 + 1e-12);
    for (q, v) in buf.iter_mut().enumerate() {
        if bin_frequency(q, len, rate).abs() > edge {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft_in_place(&mut buf);
    let norm = 1.0 / len as f64;
    buf.iter_mut().for_each(|v| *v *= norm);
    buf
}

/// Ideal (rectangular) low-pass with unit passband gain for `|f| ≤ cutoff`.
///
/// The filter acts on the record as one period of a periodic signal, so
/// quantitative use should stay away from the record edges.
pub fn brickwall_lowpass(wave: &SampledWaveform, cutoff: f64) -> Result<SampledWaveform> {
    let rate = wave.sample_rate();
    if !(cutoff > 0.0 && cutoff <= rate / 2.0 * (1.0 + 1e-12)) {
        return invalid_input(format!(
            "cutoff {cutoff} Hz outside (0, {}] Hz",
            rate / 2.0
        ));
    }
    let input: Vec<Complex64> = wave
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let out = brickwall_complex(&input, rate, cutoff);
    SampledWaveform::new(out.iter().map(|v| v.re).collect(), rate, wave.t0())
}

/// DFT of a real waveform. Bin `q` sits at `q · rate / len` (unsigned,
/// FFT order); magnitudes are unnormalized, so Parseval reads
/// `Σ|x|² = Σ|X|² / len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bin_frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub sample_rate: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn bin(&self, q: usize) -> Complex64 {
        Complex64::from_polar(self.magnitudes[q], self.phases[q])
    }

    pub fn resolution(&self) -> f64 {
        self.sample_rate / self.len() as f64
    }

    /// Signed frequency of bin `q`.
    pub fn signed_frequency(&self, q: usize) -> f64 {
        bin_frequency(q, self.len(), self.sample_rate)
    }

    /// Inverse DFT back to real samples (imaginary residue dropped).
    pub fn inverse(&self) -> Vec<f64> {
        let mut buf: Vec<Complex64> = (0..self.len()).map(|q| self.bin(q)).collect();
        ifft_in_place(&mut buf);
        let norm = 1.0 / self.len() as f64;
        buf.iter().map(|v| v.re * norm).collect()
    }
}

pub fn spectrum(wave: &SampledWaveform) -> Result<Spectrum> {
    let len = wave.len();
    if len < 2 {
        return invalid_input("spectrum needs at least two samples");
    }
    let rate = wave.sample_rate();
    let bins = fft_real(wave.samples());
    Ok(Spectrum {
        bin_frequencies: (0..len).map(|q| q as f64 * rate / len as f64).collect(),
        magnitudes: bins.iter().map(|v| v.norm()).collect(),
        phases: bins.iter().map(|v| v.arg()).collect(),
        sample_rate: rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_train(samples: &[f64], rate: f64, shifts: Option<&[f64]>, t: f64) -> f64 {
        samples
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let d = shifts.map_or(0.0, |sh| sh[k]);
                let x = rate * (t - d) - k as f64;
                let v = if x == 0.0 {
                    1.0
                } else {
                    (PI * x).sin() / (PI * x)
                };
                s * v
            })
            .sum()
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert_eq!(sinc(1.0), 0.0);
        assert_eq!(sinc(-3.0), 0.0);
        assert!((sinc(0.5) - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn sinc_is_even() {
        for i in 0..1000 {
            let x = i as f64 * 0.0137 - 6.3;
            assert_eq!(sinc(x), sinc(-x));
        }
    }

    #[test]
    fn single_kernel_reconstruction() {
        let grid = TimeGrid::new(0.0, 2.0, 3).unwrap();
        let w = ideal_reconstruct(&[1.0], 1.0, &grid).unwrap();
        let s = w.samples();
        assert_eq!(s[0], 1.0);
        assert!((s[1] - 2.0 / PI).abs() < 1e-15);
        assert!(s[2].abs() < 1e-15);
    }

    #[test]
    fn empty_reconstruction_rejected() {
        let grid = TimeGrid::new(0.0, 2.0, 3).unwrap();
        assert!(ideal_reconstruct(&[], 1.0, &grid).is_err());
    }

    #[test]
    fn all_ones_interior_is_unity() {
        let ones = vec![1.0; 512];
        // interior points, including off-sample instants
        let grid = TimeGrid::new(200.0, 8.0, 8 * 100).unwrap();
        let w = ideal_reconstruct(&ones, 1.0, &grid).unwrap();
        for (i, v) in w.samples().iter().enumerate() {
            let brute = naive_train(&ones, 1.0, None, grid.time(i));
            assert!((v - brute).abs() < 1e-11, "{v} vs {brute}");
            assert!((v - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn cosine_reconstruction_interior() {
        let f = 0.2;
        let samples: Vec<f64> = (0..4096)
            .map(|k| (2.0 * PI * f * k as f64).cos())
            .collect();
        let grid = TimeGrid::new(1024.0, 16.0, 16 * 2048).unwrap();
        let w = ideal_reconstruct(&samples, 1.0, &grid).unwrap();
        for (i, v) in w.samples().iter().enumerate() {
            let t = grid.time(i);
            assert!((v - (2.0 * PI * f * t).cos()).abs() < 1e-3);
        }
    }

    #[test]
    fn reconstruction_hits_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<f64> = (0..400).map(|_| rng.random_range(-1.0..1.0)).collect();
        let grid = TimeGrid::new(64.0, 1.0, 400 - 128).unwrap();
        let w = ideal_reconstruct(&samples, 1.0, &grid).unwrap();
        for (i, v) in w.samples().iter().enumerate() {
            assert!((v - samples[64 + i]).abs() < 1e-9);
        }
    }

    #[test]
    fn periodic_kernel_is_image_sum() {
        for k in [4usize, 10, 64] {
            for &u in &[0.0, 0.3, -1.7, 5.5, 2.0, 1e-11] {
                let images: f64 = (-20000i64..=20000)
                    .map(|m| sinc(u - (m * k as i64) as f64))
                    .sum();
                assert!((periodic_sinc(u, k) - images).abs() < 1e-4, "k {k} u {u}");
            }
            assert_eq!(periodic_sinc(k as f64, k), 1.0);
            assert!(periodic_sinc(3.0, k).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_nyquist_cosine_is_exact() {
        let samples: Vec<f64> = (0..256).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let grid = TimeGrid::new(-3.0, 3.0, 3000).unwrap();
        let y = periodic_sinc_train(&samples, 1.0, 0.0, None, &grid).unwrap();
        for (j, v) in y.iter().enumerate() {
            let x = grid.time(j);
            assert!((v - (PI * x).cos()).abs() < 1e-11, "{x}: {v}");
        }
        assert!(periodic_sinc_train(&samples[..255], 1.0, 0.0, None, &grid).is_err());
    }

    #[test]
    fn periodic_fft_path_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rate = 20e9;
        let samples: Vec<f64> = (0..600).map(|_| rng.random_range(-1.0..1.0)).collect();
        let shifts: Vec<f64> = (0..600).map(|_| rng.random_range(-4e-12..4e-12)).collect();
        for (over, t0, origin) in [(3usize, 0.0, 0.0), (4, -1.3e-10, 2.5e-11), (1, 3e-11, 0.0)] {
            let grid = TimeGrid::new(t0, over as f64 * rate, over * 700 + 5).unwrap();
            for sh in [None, Some(&shifts[..])] {
                let direct = periodic_train_direct(&samples, rate, origin, sh, &grid);
                let fast = periodic_train_fast(&samples, rate, origin, sh, &grid, over);
                for (i, (x, y)) in direct.iter().zip(&fast).enumerate() {
                    assert!((x - y).abs() < 1e-11, "over {over} at {i}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn fft_path_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rate = 20e9;
        let samples: Vec<f64> = (0..1500).map(|_| rng.random_range(-1.0..1.0)).collect();
        let shifts: Vec<f64> = (0..1500).map(|_| rng.random_range(-4e-12..4e-12)).collect();
        for (over, t0, origin) in [(3usize, 0.0, 0.0), (4, -1.3e-10, 2.5e-11), (1, 3e-11, 0.0)] {
            let grid = TimeGrid::new(t0, over as f64 * rate, over * 1400 + 7).unwrap();
            for sh in [None, Some(&shifts[..])] {
                let direct = sinc_train_direct(&samples, rate, origin, sh, &grid);
                let fast = sinc_train_fast(&samples, rate, origin, sh, &grid, over);
                for (i, (x, y)) in direct.iter().zip(&fast).enumerate() {
                    assert!((x - y).abs() < 1e-11, "over {over} at {i}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn fft_path_handles_large_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rate = 1.0;
        let samples: Vec<f64> = (0..800).map(|_| rng.random_range(-1.0..1.0)).collect();
        let shifts: Vec<f64> = (0..800).map(|_| rng.random_range(-2.5..2.5)).collect();
        let grid = TimeGrid::new(-20.0, 2.0, 1700).unwrap();
        let direct = sinc_train_direct(&samples, rate, 0.0, Some(&shifts), &grid);
        let fast = sinc_train_fast(&samples, rate, 0.0, Some(&shifts), &grid, 2);
        for (x, y) in direct.iter().zip(&fast) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn jittered_train_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rate = 60e9;
        let samples: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let shifts: Vec<f64> = (0..300).map(|_| rng.random_range(-3e-12..3e-12)).collect();
        let grid = TimeGrid::new(0.0, 4.0 * rate, 1200).unwrap();
        let fast = sinc_train(&samples, rate, 0.0, Some(&shifts), &grid);
        for (i, v) in fast.iter().enumerate() {
            let brute = naive_train(&samples, rate, Some(&shifts), grid.time(i));
            assert!((v - brute).abs() < 1e-10, "at {i}: {v} vs {brute}");
        }
    }

    #[test]
    fn kernel_exactly_on_grid_point() {
        // a jittered kernel landing on a grid point must not blow up
        let rate = 1.0;
        let shifts = [0.0, 0.25, 0.0];
        let grid = TimeGrid::new(0.0, 4.0, 12).unwrap();
        let y = sinc_train(&[0.0, 1.0, 0.0], rate, 0.0, Some(&shifts), &grid);
        assert!((y[5] - 1.0).abs() < 1e-15);
        assert!(y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn brickwall_passes_dc() {
        let w = SampledWaveform::new(vec![1.0; 256], 10.0, 0.0).unwrap();
        for cutoff in [0.1, 1.0, 5.0] {
            let out = brickwall_lowpass(&w, cutoff).unwrap();
            for v in out.samples() {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn brickwall_removes_stopband_tone() {
        let len = 1000;
        let rate = 1.0;
        let samples: Vec<f64> = (0..len)
            .map(|k| (2.0 * PI * 0.4 * k as f64).cos())
            .collect();
        let w = SampledWaveform::new(samples, rate, 0.0).unwrap();
        let out = brickwall_lowpass(&w, 0.25 * rate).unwrap();
        assert!(out.rms() <= 1e-10 * w.rms());
    }

    #[test]
    fn brickwall_cutoff_bounds() {
        let w = SampledWaveform::new(vec![0.0; 16], 10.0, 0.0).unwrap();
        assert!(brickwall_lowpass(&w, 0.0).is_err());
        assert!(brickwall_lowpass(&w, 5.1).is_err());
        assert!(brickwall_lowpass(&w, 5.0).is_ok());
    }

    #[test]
    fn brickwall_keeps_real_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Complex64> = (0..1024)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        let once = brickwall_complex(&x, 1.0, 0.2);
        assert!(once.iter().all(|v| v.im.abs() < 1e-12));
        let twice = brickwall_complex(&once, 1.0, 0.2);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn brickwall_noise_energy_fraction() {
        // Parseval expectation: output energy ≈ (2·cutoff/rate)·input energy
        use rand_distr::{Distribution, StandardNormal};
        let len = 4096;
        let mut ratios = Vec::new();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
            let w = SampledWaveform::new(x, 1.0, 0.0).unwrap();
            let out = brickwall_lowpass(&w, 0.15).unwrap();
            ratios.push(out.power() / w.power());
        }
        for r in &ratios {
            assert!((r / 0.3 - 1.0).abs() < 0.1, "ratio {r}");
        }
    }

    #[test]
    fn impulse_spectrum_is_flat() {
        let mut x = vec![0.0; 64];
        x[0] = 1.0;
        let s = spectrum(&SampledWaveform::new(x, 1.0, 0.0).unwrap()).unwrap();
        assert!(s.magnitudes.iter().all(|m| (m - 1.0).abs() < 1e-15));
    }

    #[test]
    fn cosine_on_bin() {
        let len = 256;
        let m = 17;
        let x: Vec<f64> = (0..len)
            .map(|k| (2.0 * PI * (m * k) as f64 / len as f64).cos())
            .collect();
        let s = spectrum(&SampledWaveform::new(x, 1.0, 0.0).unwrap()).unwrap();
        for q in 0..len {
            if q == m || q == len - m {
                assert!((s.magnitudes[q] - len as f64 / 2.0).abs() < 1e-9);
            } else {
                assert!(s.magnitudes[q] <= 1e-10 * len as f64);
            }
        }
        assert!((s.resolution() - 1.0 / 256.0).abs() < 1e-18);
    }

    #[test]
    fn spectrum_needs_two_samples() {
        assert!(spectrum(&SampledWaveform::new(vec![1.0], 1.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn parseval_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..1000).map(|_| rng.random_range(-2.0..2.0)).collect();
        let w = SampledWaveform::new(x.clone(), 3.0, 0.0).unwrap();
        let s = spectrum(&w).unwrap();
        let time_energy: f64 = x.iter().map(|v| v * v).sum();
        let freq_energy: f64 =
            s.magnitudes.iter().map(|m| m * m).sum::<f64>() / x.len() as f64;
        assert!((time_energy - freq_energy).abs() <= 1e-9 * time_energy);
        let back = s.inverse();
        let err: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum();
        assert!((err / time_energy).sqrt() < 1e-10);
    }
}
