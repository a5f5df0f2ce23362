//! Orthogonal-sampling DAC simulation.
//!
//! A full-rate sample stream at `Δf_s` is split into `N` branches running at
//! `Δf_s / N`. Each branch is rendered by a low-bandwidth DAC model, multiplied
//! by a time-shifted sinc-pulse sequence (a DC level plus `(N - 1) / 2` RF
//! tones) and the branches are summed. With ideal components the sum equals
//! the band-limited reconstruction of the original stream.
//!
//! Modules:
//!
//! * [`dsp`]: sinc kernel, ideal reconstruction, brick-wall filter, DFT helpers
//! * [`sequence`]: sinc-pulse sequences, RF phase plan, comb verification
//! * [`ortho`]: branch decomposition, branch DACs, synthesis, direct DAC
//! * [`signals`]: tones, PRBS, BPSK/QAM-16 mapping, Nyquist and NRZ shaping
//! * [`impairments`]: jitter, quantization, OSNR noise loading
//! * [`metrics`]: RMS error, SINAD/ENOB, Q-factor, EVM
//! * [`link`]: MZM, coherent receiver and decision sampling

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsp;
pub mod error;
pub mod impairments;
pub mod link;
pub mod metrics;
pub mod ortho;
pub mod sequence;
pub mod signals;
pub mod waveform;

pub use error::{Error, Result};
pub use waveform::{ComplexWaveform, SampledWaveform, TimeGrid};
