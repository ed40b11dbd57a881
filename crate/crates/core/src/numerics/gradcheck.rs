use super::param::Parameters;
use super::tape::{Tape, Var};
use crate::error::{Error, Result};

/// Outcome of comparing tape gradients against central differences.
#[derive(Clone, Debug)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// Parameter name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
    /// Analytic and numeric derivative at `worst`.
    pub worst_pair: (f64, f64),
    pub coords_checked: usize,
    /// Coordinates skipped because no probe step stayed inside one smooth
    /// piece. Always 0 for [`finite_diff_check`].
    pub unresolved: usize,
    /// Smallest kink margin seen on the unperturbed forward pass.
    pub kink_margin: f64,
}

/// Central-difference check of `f` over every scalar in `params`.
///
/// `f` must record a `1 x 1` output on the tape it is given. The relative
/// error per coordinate is `|a - b| / max(|a|, |b|, 1e-8)`. With
/// `max_per_param` set, only that many evenly spaced coordinates of each
/// parameter are probed.
pub fn finite_diff_check<P, F>(
    params: &mut P,
    f: F,
    eps: f64,
    max_per_param: Option<usize>,
) -> Result<GradCheck>
where
    P: Parameters,
    F: Fn(&P, &mut Tape) -> Result<Var>,
{
    check(params, f, eps, max_per_param, false)
}

/// Kink-aware, extrapolated variant of [`finite_diff_check`].
///
/// Each coordinate is probed at `eps`, `eps / 2` and `eps / 4`. Richardson
/// extrapolation of the first two central differences cancels the `eps²`
/// truncation term and gives the estimate. The last two give a second
/// extrapolation that must agree with it.
///
/// A probe whose forward passes take different branches through relu, max
/// or min than the unperturbed pass straddles a kink, where a difference
/// quotient says nothing about the derivative. A branch can also flip and
/// flip back between two probes, which only the disagreement between the
/// two extrapolations reveals. Either way the coordinate is retried with the
/// step divided by 4, up to 5 times, and skipped (counted in
/// [`GradCheck::unresolved`]) if no step fits inside one smooth piece. The
/// skip depends only on the objective, never on the tape gradient.
///
/// This allows a step around `1e-3`. At small steps the difference quotient
/// is quantized at roughly `ulp(f) / eps`, which swamps gradient components
/// near `1e-9`.
pub fn finite_diff_check_smooth<P, F>(
    params: &mut P,
    f: F,
    eps: f64,
    max_per_param: Option<usize>,
) -> Result<GradCheck>
where
    P: Parameters,
    F: Fn(&P, &mut Tape) -> Result<Var>,
{
    check(params, f, eps, max_per_param, true)
}

const KINK_RETRIES: usize = 5;
/// Largest relative gap between the two extrapolations that still counts as
/// one smooth piece.
const CONSISTENCY: f64 = 2e-5;

fn check<P, F>(
    params: &mut P,
    f: F,
    eps: f64,
    max_per_param: Option<usize>,
    smooth: bool,
) -> Result<GradCheck>
where
    P: Parameters,
    F: Fn(&P, &mut Tape) -> Result<Var>,
{
    if eps.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Config(format!(
            "finite-difference eps must be > 0, got {eps}"
        )));
    }
    let eval = |params: &P| -> Result<(f64, u64)> {
        let mut tape = Tape::new();
        let out = f(params, &mut tape)?;
        let v = tape.value(out).item();
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("objective evaluated to {v}")));
        }
        Ok((v, tape.kink_signature()))
    };

    let mut tape = Tape::new();
    let out = f(params, &mut tape)?;
    let v0 = tape.value(out).item();
    if !v0.is_finite() {
        return Err(Error::NonFinite(format!("objective evaluated to {v0}")));
    }
    tape.backward(out)?;
    let kink_margin = tape.min_kink_margin();
    let sig0 = tape.kink_signature();

    let mut analytic: Vec<(String, Vec<f64>)> = Vec::new();
    params.visit(&mut |p| {
        let g = tape
            .param_grad(p.name())
            .map(|g| g.data().to_vec())
            .unwrap_or_else(|| vec![0.0; p.value().len()]);
        analytic.push((p.name().to_owned(), g));
    });
    drop(tape);

    let mut result = GradCheck {
        max_rel_error: 0.0,
        worst: None,
        worst_pair: (0.0, 0.0),
        coords_checked: 0,
        unresolved: 0,
        kink_margin,
    };
    for (pi, (name, grads)) in analytic.iter().enumerate() {
        let n = grads.len();
        let stride = match max_per_param {
            Some(m) if m > 0 && n > m => n.div_ceil(m),
            _ => 1,
        };
        for c in (0..n).step_by(stride) {
            let original = nudge(params, pi, c, None);
            let mut probe = |step: f64| -> Result<(f64, bool)> {
                nudge(params, pi, c, Some(original + step));
                let plus = eval(params);
                nudge(params, pi, c, Some(original - step));
                let minus = eval(params);
                nudge(params, pi, c, Some(original));
                let ((fp, sp), (fm, sm)) = (plus?, minus?);
                Ok(((fp - fm) / (2.0 * step), sp == sig0 && sm == sig0))
            };
            let mut numeric = None;
            if smooth {
                let mut step = eps;
                for _ in 0..=KINK_RETRIES {
                    let (d1, ok1) = probe(step)?;
                    let (d2, ok2) = probe(step / 2.0)?;
                    let (d4, ok4) = probe(step / 4.0)?;
                    if !(ok1 && ok2 && ok4) {
                        step /= 4.0;
                        continue;
                    }
                    let coarse = (4.0 * d2 - d1) / 3.0;
                    let fine = (4.0 * d4 - d2) / 3.0;
                    let spread = (coarse - fine).abs() / coarse.abs().max(fine.abs()).max(1e-8);
                    if spread <= CONSISTENCY {
                        numeric = Some(coarse);
                    }
                    break;
                }
            } else {
                numeric = Some(probe(eps)?.0);
            }
            let Some(numeric) = numeric else {
                result.unresolved += 1;
                continue;
            };
            let a = grads[c];
            let denom = a.abs().max(numeric.abs()).max(1e-8);
            let rel = (a - numeric).abs() / denom;
            result.coords_checked += 1;
            if rel > result.max_rel_error {
                result.max_rel_error = rel;
                result.worst = Some((name.clone(), c));
                result.worst_pair = (a, numeric);
            }
        }
    }
    Ok(result)
}

/// Reads (and optionally overwrites) one scalar of the `pi`-th parameter.
fn nudge<P: Parameters>(params: &mut P, pi: usize, c: usize, set: Option<f64>) -> f64 {
    let mut idx = 0;
    let mut old = 0.0;
    params.visit_mut(&mut |p| {
        if idx == pi {
            let d = p.value_mut().data_mut();
            old = d[c];
            if let Some(v) = set {
                d[c] = v;
            }
        }
        idx += 1;
    });
    old
}
