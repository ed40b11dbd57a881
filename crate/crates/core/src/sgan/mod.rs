//! The social GAN: generator, discriminator, losses and the training loop.

mod batch;
mod config;
mod discriminator;
mod generator;
mod losses;
mod train;

pub use batch::SceneBatch;
pub use config::{
    PoolMode, SganConfig, DECODER_HIDDEN, DISC_HIDDEN, EMBED_DIM, ENCODER_HIDDEN, MLP_DIM, POOL_DIM,
};
pub use discriminator::Discriminator;
pub use generator::{GenOutput, Generator, GridKernel};
pub use losses::{loss_adversarial, loss_discriminator, loss_variety};
pub use train::{
    substream, EpochLog, Sgan, StepLosses, STREAM_INIT, STREAM_JITTER, STREAM_NOISE, STREAM_SHUFFLE,
};
