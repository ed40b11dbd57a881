use crate::error::{Error, Result};
use crate::numerics::{Tape, Var};

/// Per person, the smallest L2 norm of `sample - gt` over the samples, then
/// averaged over people. Rows are people, columns the stacked coordinates of
/// every predicted step. Only the best sample receives gradient.
pub fn loss_variety(tape: &mut Tape, gt: Var, samples: &[Var]) -> Result<Var> {
    if samples.is_empty() {
        return Err(Error::Empty("loss_variety"));
    }
    let norms = samples
        .iter()
        .map(|&s| {
            let diff = tape.sub(s, gt)?;
            Ok(tape.row_norm(diff))
        })
        .collect::<Result<Vec<Var>>>()?;
    let table = tape.concat_cols(&norms)?;
    let best = tape.row_min(table)?;
    Ok(tape.mean(best))
}

/// Mean binary cross-entropy of real logits against 1 plus fake logits against 0.
pub fn loss_discriminator(tape: &mut Tape, real: Var, fake: Var) -> Result<Var> {
    let r = tape.bce_with_logits(real, 1.0);
    let r = tape.mean(r);
    let f = tape.bce_with_logits(fake, 0.0);
    let f = tape.mean(f);
    tape.add(r, f)
}

/// Non-saturating generator term: mean cross-entropy of fake logits against 1.
pub fn loss_adversarial(tape: &mut Tape, fake: Var) -> Var {
    let l = tape.bce_with_logits(fake, 1.0);
    tape.mean(l)
}
