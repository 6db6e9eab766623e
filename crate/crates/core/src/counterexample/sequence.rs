use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// An injective enumeration `n ↦ q_n` of points of `(0, 1]` with dense range.
///
/// The builtin enumeration walks the dyadics breadth-first:
/// `1, 1/2, 1/4, 3/4, 1/8, 3/8, 5/8, 7/8, 1/16, …`. A custom sequence uses
/// the supplied values first and then continues with the builtin
/// enumeration, skipping values already used, so it stays injective and
/// dense.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum DenseSeq {
    #[default]
    Dyadic,
    Custom(Arc<Vec<Rational>>),
}

impl DenseSeq {
    pub fn custom(values: Vec<Rational>) -> Result<Self> {
        let mut seen = HashSet::new();
        for q in &values {
            if !q.is_positive() || *q > Rational::one() {
                return Err(Error::Parameter(format!("q = {} is not in (0,1]", rational::format(q))));
            }
            if !seen.insert(q.clone()) {
                return Err(Error::Parameter(format!("q = {} repeats", rational::format(q))));
            }
        }
        Ok(DenseSeq::Custom(Arc::new(values)))
    }

    /// One rational per line; blank lines and `#` comments are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        let values = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(rational::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::custom(values)
    }

    /// `q_n` for `n ≥ 1`.
    pub fn get(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Err(Error::Parameter("sequence positions start at 1".into()));
        }
        match self {
            DenseSeq::Dyadic => Ok(dyadic_at(n)),
            DenseSeq::Custom(values) => {
                let len = values.len() as u64;
                if n <= len {
                    return Ok(values[(n - 1) as usize].clone());
                }
                let used: HashSet<&Rational> = values.iter().collect();
                let mut remaining = n - len;
                let mut pos = 0u64;
                loop {
                    pos += 1;
                    let q = dyadic_at(pos);
                    if !used.contains(&q) {
                        remaining -= 1;
                        if remaining == 0 {
                            return Ok(q);
                        }
                    }
                }
            }
        }
    }
}

fn dyadic_at(n: u64) -> Rational {
    if n == 1 {
        return Rational::one();
    }
    // n − 1 ∈ [2^{j−1}, 2^j) lists level j: (2i + 1) / 2^j.
    let j = 64 - (n - 1).leading_zeros();
    let i = (n - 1) - (1u64 << (j - 1));
    Rational::new((2 * i + 1).into(), (1u64 << j).into())
}

/// `q_n` of the builtin enumeration.
pub fn dense_sequence(n: u64) -> Result<Rational> {
    DenseSeq::Dyadic.get(n)
}

/// Position of `k / 2^j` (`k` odd, or `k = j = 0` for `1`) in the builtin
/// enumeration.
pub fn dyadic_position(k: u64, j: u32) -> Result<u64> {
    if j == 0 {
        return if k == 1 { Ok(1) } else { Err(Error::Parameter("only 1/1 lives at level 0".into())) };
    }
    if k.is_multiple_of(2) || k >= (1u64 << j) {
        return Err(Error::Parameter(format!("{k}/2^{j} is not a reduced dyadic in (0,1)")));
    }
    Ok((1u64 << (j - 1)) + (k - 1) / 2 + 1)
}
