use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{NemoError, Result};

/// Per-quantizer bit widths in canonical quantizer order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BitConfig(pub Vec<u32>);

impl BitConfig {
    pub fn uniform(bits: u32, len: usize) -> Self {
        Self(vec![bits; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Checks every entry against the allowed set.
    pub fn validate(&self, allowed: &BitSet) -> Result<()> {
        match self.0.iter().find(|b| !allowed.contains(**b)) {
            Some(b) => Err(NemoError::contract(format!("bit width {b} not in {allowed}"))),
            None => Ok(()),
        }
    }
}

/// Sorted set of selectable bit widths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct BitSet(Vec<u32>);

impl BitSet {
    pub fn new(mut bits: Vec<u32>) -> Result<Self> {
        let sorted = bits.windows(2).all(|w| w[0] < w[1]);
        if !sorted {
            return Err(NemoError::config(format!(
                "bit set must be strictly ascending, got {bits:?}"
            )));
        }
        if bits.len() < 2 {
            return Err(NemoError::config("bit set needs at least 2 entries"));
        }
        if bits[0] < 2 || *bits.last().unwrap() > 32 {
            return Err(NemoError::config("bit widths must lie in 2..=32"));
        }
        bits.shrink_to_fit();
        Ok(Self(bits))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> u32 {
        self.0[0]
    }

    pub fn max(&self) -> u32 {
        *self.0.last().unwrap()
    }

    pub fn contains(&self, b: u32) -> bool {
        self.0.binary_search(&b).is_ok()
    }
}

impl Default for BitSet {
    /// The seven widths 2..=8.
    fn default() -> Self {
        Self((2..=8).collect())
    }
}

impl TryFrom<Vec<u32>> for BitSet {
    type Error = NemoError;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BitSet> for Vec<u32> {
    fn from(b: BitSet) -> Self {
        b.0
    }
}

impl fmt::Display for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitset_validation() {
        assert!(BitSet::new(vec![2, 4, 8]).is_ok());
        assert!(BitSet::new(vec![4, 2]).is_err());
        assert!(BitSet::new(vec![4]).is_err());
        assert!(BitSet::new(vec![1, 2]).is_err());
        assert_eq!(BitSet::default().len(), 7);
        let parsed: BitSet = serde_json::from_str("[2,4,8]").unwrap();
        assert_eq!(parsed.as_slice(), &[2, 4, 8]);
        assert!(serde_json::from_str::<BitSet>("[8,2]").is_err());
    }

    #[test]
    fn config_validation() {
        let set = BitSet::new(vec![2, 4, 8]).unwrap();
        assert!(BitConfig(vec![2, 8, 4]).validate(&set).is_ok());
        assert!(BitConfig(vec![2, 3]).validate(&set).is_err());
    }
}
