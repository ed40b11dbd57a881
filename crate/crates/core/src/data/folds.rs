use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<String>,
    pub test: String,
}

/// One fold per set: train on the others, test on it.
pub fn leave_one_out(names: &[String]) -> Result<Vec<FoldSplit>> {
    for (i, a) in names.iter().enumerate() {
        if names[..i].contains(a) {
            return Err(Error::Config(format!("duplicate set name {a:?}")));
        }
    }
    if names.len() < 2 {
        return Err(Error::Config(format!(
            "leave-one-out needs at least 2 sets, got {}",
            names.len()
        )));
    }
    Ok(names
        .iter()
        .map(|test| FoldSplit {
            train: names.iter().filter(|n| *n != test).cloned().collect(),
            test: test.clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eth_ucy() -> Vec<String> {
        ["ETH", "HOTEL", "UNIV", "ZARA1", "ZARA2"]
            .map(String::from)
            .to_vec()
    }

    #[test]
    fn five_sets_five_folds() {
        let folds = leave_one_out(&eth_ucy()).unwrap();
        assert_eq!(folds.len(), 5);
        for f in &folds {
            assert_eq!(f.train.len(), 4);
            assert!(!f.train.contains(&f.test));
            let mut all: Vec<String> = f.train.iter().cloned().chain([f.test.clone()]).collect();
            all.sort();
            let mut want = eth_ucy();
            want.sort();
            assert_eq!(all, want);
        }
        for name in eth_ucy() {
            assert_eq!(folds.iter().filter(|f| f.test == name).count(), 1);
        }
    }

    #[test]
    fn duplicates_rejected() {
        let mut names = eth_ucy();
        names[4] = "ETH".into();
        assert!(leave_one_out(&names).is_err());
    }
}
