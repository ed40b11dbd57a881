//! Dense `f64` matrices, reverse-mode differentiation, Adam, gradient
//! checking and checkpoint storage.

mod adam;
mod checkpoint;
mod gradcheck;
mod param;
mod tape;
mod tensor;

pub use adam::AdamState;
pub use checkpoint::{Checkpoint, MAGIC as CHECKPOINT_MAGIC};
pub use gradcheck::{finite_diff_check, finite_diff_check_smooth, GradCheck};
pub use param::{Param, Parameters};
pub use tape::{bce_with_logits, sigmoid, Tape, Var};
pub use tensor::Tensor;
