//! Simulation core for LDPC-coded computational ghost imaging.
//!
//! A binary (or grayscale) target is illuminated by the patterns of a
//! systematic LDPC generator matrix, observed by a single bucket detector
//! through a Rayleigh-fading, additive-Gaussian channel, and reconstructed by
//! belief propagation. The crate also carries the classical correlation and
//! pseudo-inverse baselines, a closed-form lower bound on the pixel error
//! rate, and the image metrics used to compare them.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, experiment
//! drivers and the command-line tool live in the `ldpcgi` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baselines;
pub mod bound;
pub mod bp;
pub mod code;
pub mod error;
pub mod forward;
pub mod metrics;
pub mod rng;

pub use baselines::{cgi_reconstruct, dgi_reconstruct, pinv_reconstruct, Method, Reconstruction};
pub use bound::{ber_lower_bound, bound_terms, BoundParams, BoundTerms, EnergyRule};
pub use bp::{decode_gf2_bp, decode_sum_bp, BpMode, BpOptions, BpState, DecodeResult, Diagnostics};
pub use code::{
    build_generator, derive_parity_check, encode, CodeSpec, DegreeDistribution, GeneratorMatrix,
    ParityCheckMatrix,
};
pub use error::{Error, Result};
pub use forward::{
    patterns_from_generator, random_speckle, sense, transmit_codeword, ChannelParams, Fading, IlluminationEnsemble,
    Measurement, PatternSource, SceneImage,
};
pub use metrics::{FrameStack, GrayImage};
