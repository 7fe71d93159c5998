//! BPSK over AWGN and conversion of channel outputs to soft symbol estimates.
//!
//! Noise comes from ChaCha8 seeded per frame, sampled with
//! `rand_distr::StandardNormal` (ziggurat), so a frame depends only on
//! `(master seed, frame index)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::code_model::{bpsk, CodeSpec, Trellis};
use crate::error::{Error, Result};

/// Saturation margin for soft symbol estimates.
pub const SSE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SnrConvention {
    /// Energy per information bit; `sigma^2 = 1 / (2 R 10^(snr/10))`.
    #[default]
    EbN0,
    /// Energy per coded symbol; `sigma^2 = 1 / (2 * 10^(snr/10))`.
    EsN0,
}

impl std::str::FromStr for SnrConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ebn0" => Ok(Self::EbN0),
            "esn0" => Ok(Self::EsN0),
            _ => Err(Error::Config(format!("unknown SNR convention {s:?} (ebn0|esn0)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub snr_db: f64,
    pub rate: f64,
    pub convention: SnrConvention,
    pub sigma: f64,
    pub seed: u64,
}

impl ChannelParams {
    pub fn new(snr_db: f64, rate: f64, convention: SnrConvention, seed: u64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) || !snr_db.is_finite() {
            return Err(Error::Config(format!("bad channel parameters snr={snr_db} rate={rate}")));
        }
        let lin = 10f64.powf(snr_db / 10.0);
        let var = match convention {
            SnrConvention::EbN0 => 1.0 / (2.0 * rate * lin),
            SnrConvention::EsN0 => 1.0 / (2.0 * lin),
        };
        Ok(Self {
            snr_db,
            rate,
            convention,
            sigma: var.sqrt(),
            seed,
        })
    }

    /// Rate-1/2, Eb/N0.
    pub fn ebn0(snr_db: f64, seed: u64) -> Result<Self> {
        Self::new(snr_db, 0.5, SnrConvention::EbN0, seed)
    }
}

/// `y = x + n`, `n ~ N(0, sigma^2)` drawn from a generator seeded by `params.seed`.
pub fn transmit(symbols: &[f64], params: &ChannelParams) -> Result<Vec<f64>> {
    if params.sigma.is_nan() || params.sigma < 0.0 {
        return Err(Error::Config(format!("sigma must be positive, got {}", params.sigma)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok(add_noise(symbols, params.sigma, &mut rng))
}

fn add_noise(symbols: &[f64], sigma: f64, rng: &mut impl Rng) -> Vec<f64> {
    symbols
        .iter()
        .map(|&x| {
            let n: f64 = rng.sample(StandardNormal);
            x + sigma * n
        })
        .collect()
}

/// `tanh(y / sigma^2)`, the soft estimate `p(0|y) - p(1|y)`, clamped away from `±1`.
pub fn sse_from_channel(y: f64, sigma: f64) -> f64 {
    clamp_sse((y / (sigma * sigma)).tanh())
}

pub fn clamp_sse(x: f64) -> f64 {
    x.clamp(-1.0 + SSE_EPS, 1.0 - SSE_EPS)
}

/// `ln((1 + x) / (1 - x))`.
pub fn sse_to_llr(x: f64) -> f64 {
    ((1.0 + x) / (1.0 - x)).ln()
}

/// Per-step soft estimates `[c1, c2]`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SseFrame {
    pub sym: Vec<[f64; 2]>,
}

impl SseFrame {
    pub fn new(sym: Vec<[f64; 2]>) -> Self {
        Self { sym }
    }

    /// Pairs up an interleaved `c1 c2 c1 c2 ...` sequence, clamping each value.
    pub fn from_interleaved(values: &[f64]) -> Result<Self> {
        if !values.len().is_multiple_of(2) {
            return Err(Error::InvalidInput("odd number of soft values".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite soft value".into()));
        }
        Ok(Self {
            sym: values
                .chunks_exact(2)
                .map(|c| [clamp_sse(c[0]), clamp_sse(c[1])])
                .collect(),
        })
    }

    /// Soft estimates of received samples (interleaved `c1, c2`).
    pub fn from_received(y: &[f64], sigma: f64) -> Result<Self> {
        let x: Vec<f64> = y.iter().map(|&v| sse_from_channel(v, sigma)).collect();
        Self::from_interleaved(&x)
    }

    pub fn len(&self) -> usize {
        self.sym.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sym.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Self {
            sym: self.sym.iter().rev().copied().collect(),
        }
    }

    /// Exchanges the roles of `c1` and `c2`.
    pub fn swapped(&self) -> Self {
        Self {
            sym: self.sym.iter().map(|&[a, b]| [b, a]).collect(),
        }
    }
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of frame `index` under `master`.
pub fn frame_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// A random message, its codeword and the received soft frame.
#[derive(Clone, Debug)]
pub struct SimFrame {
    pub info: Vec<u8>,
    pub codeword: Vec<u8>,
    pub sse: SseFrame,
}

/// Draws message bits and noise from one generator seeded with `seed`.
pub fn simulate_frame(
    code: &CodeSpec,
    trellis: &Trellis,
    len: usize,
    sigma: f64,
    seed: u64,
) -> Result<SimFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let info: Vec<u8> = (0..len).map(|_| rng.random_range(0..2u8)).collect();
    let codeword = code.encode_with(trellis, &info)?;
    let y = add_noise(&bpsk(&codeword), sigma, &mut rng);
    let sse = SseFrame::from_received(&y, sigma)?;
    Ok(SimFrame { info, codeword, sse })
}
