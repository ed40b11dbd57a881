use std::fmt;
use std::str::FromStr;

use sgan::sgan::{PoolMode, SganConfig};

/// Model family tag, following the `kV` / `kVP` naming: `k` samples in the
/// variety loss, `P` for social pooling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Sgan {
        k: usize,
        pooling: bool,
    },
    /// Encoder-decoder trained on L2 alone, no pooling, no discriminator.
    LstmOnly,
    /// Least-squares line per person; nothing to train.
    Linear,
}

impl Variant {
    /// Tag that describes an already-built model configuration.
    pub fn of(cfg: &SganConfig) -> Self {
        Variant::Sgan {
            k: cfg.k_variety,
            pooling: cfg.pool_mode != PoolMode::None,
        }
    }

    pub fn is_trainable(self) -> bool {
        self != Variant::Linear
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Sgan { k, pooling: true } => write!(f, "{k}VP"),
            Variant::Sgan { k, pooling: false } => write!(f, "{k}V"),
            Variant::LstmOnly => f.write_str("lstm-only"),
            Variant::Linear => f.write_str("linear"),
        }
    }
}

impl FromStr for Variant {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let tag = s.trim();
        match tag.to_ascii_lowercase().as_str() {
            "lstm-only" | "lstm" => return Ok(Variant::LstmOnly),
            "linear" => return Ok(Variant::Linear),
            _ => {}
        }
        let (digits, rest) =
            tag.split_at(tag.find(|c: char| !c.is_ascii_digit()).unwrap_or(tag.len()));
        let k: usize = digits.parse().map_err(|_| {
            anyhow::anyhow!("variant {tag:?} should look like 20VP, 1V, lstm-only or linear")
        })?;
        let pooling = match rest {
            "V" | "v" => false,
            "VP" | "vp" => true,
            _ => anyhow::bail!("variant {tag:?} should end in V or VP"),
        };
        anyhow::ensure!(k >= 1, "variant {tag:?} needs k >= 1");
        Ok(Variant::Sgan { k, pooling })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for tag in ["20VP", "1V", "5VP", "lstm-only", "linear"] {
            assert_eq!(tag.parse::<Variant>().unwrap().to_string(), tag);
        }
        assert_eq!(
            "20VP".parse::<Variant>().unwrap(),
            Variant::Sgan {
                k: 20,
                pooling: true
            }
        );
        for bad in ["VP", "0V", "20X", "20VPP", ""] {
            assert!(bad.parse::<Variant>().is_err(), "{bad}");
        }
    }
}
