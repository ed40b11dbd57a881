//! Command implementations behind the `sgan` binary: training, evaluation,
//! prediction dumps, latent sweeps and the pooling benchmark.

pub mod bench;
pub mod commands;
pub mod corpus;
pub mod run_config;
pub mod variant;

pub use bench::{run_bench, write_bench, BenchModel, BenchRow, BENCH_HEADER};
pub use commands::{
    cmd_eval, cmd_predict, cmd_sweep, cmd_train, sample_scenes, scene_rng, score, Direction,
    TrainOutcome, TRAIN_LOG_HEADER,
};
pub use corpus::{fold_dir, load_dir, load_folds, load_set, Fold, NamedSet};
pub use run_config::RunConfig;
pub use variant::Variant;
