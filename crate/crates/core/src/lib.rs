//! Linear MAP (LMAP) decoding of rate-1/2 convolutional codes.
//!
//! The decoder tracks, per trellis step, the soft estimates of every XOR
//! combination of encoder memories. For codes with a primitive feedforward
//! polynomial these registers update through two interleaved shift
//! registers whose wiring is derived offline from the generator polynomials
//! ([`synth`]). The [`bcjr`] module is the probability-domain reference the
//! engine is checked against, and [`sim`] drives Monte Carlo experiments.

pub mod bcjr;
pub mod channel;
pub mod code_model;
pub mod engine;
pub mod error;
pub mod gf2poly;
pub mod label;
pub mod real;
pub mod sim;
pub mod synth;

pub use bcjr::BackwardBoundary;
pub use channel::{ChannelParams, SnrConvention, SseFrame};
pub use code_model::{CodeKind, CodeSpec, Termination, Trellis};
pub use engine::{Decoder, Mode, RegisterBank};
pub use error::{Error, Result};
pub use gf2poly::Gf2Poly;
pub use label::Label;
pub use real::{Counted, Dd, Real};
pub use synth::{synthesize, DecoderSpec, DualStructure};
