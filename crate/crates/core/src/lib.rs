//! Socially aware trajectory forecasting with a generative adversarial network.
//!
//! People in a scene are encoded one by one with an LSTM. A pooling module
//! lets every person see everyone else, and an LSTM decoder driven by a noise
//! vector samples joint futures. Training pairs an adversarial discriminator
//! with a best-of-`k` variety loss, so samples spread over the distinct ways
//! a crowd can move instead of collapsing to their average.
//!
//! - [`numerics`]: `f64` tensors, a reverse-mode tape, Adam, checkpoints and
//!   finite-difference gradient checks.
//! - [`nets`]: MLPs and the LSTM cell.
//! - [`pooling`]: max-over-MLP social pooling and the occupancy-grid baseline.
//! - [`sgan`]: generator, discriminator, losses and the training loop.
//! - [`data`]: dataset parsing, scene extraction, synthetic scenarios and
//!   displacement metrics.
//!
//! ```
//! use rand::SeedableRng;
//! use rand_chacha::ChaCha8Rng;
//! use sgan::data::{synth_scenarios, ScenarioKind};
//! use sgan::sgan::{Generator, SganConfig};
//!
//! let cfg = SganConfig::default();
//! let mut rng = ChaCha8Rng::seed_from_u64(0);
//! let scene = synth_scenarios(ScenarioKind::Merge, 1, cfg.t_obs, cfg.t_pred, 0.02, &mut rng)?.remove(0);
//! let generator = Generator::new(&cfg, &mut rng);
//! let futures = generator.sample(&scene, 5, false, &mut rng)?;
//! assert!(futures.iter().all(|f| f.is_finite()));
//! # Ok::<(), sgan::Error>(())
//! ```

// Pooling takes a slice of scene ranges; a single scene is `&[0..n]`.
#![allow(clippy::single_range_in_vec_init)]

pub mod data;
pub mod error;
pub mod nets;
pub mod numerics;
pub mod pooling;
pub mod sgan;

pub use error::{Error, Result};
