use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Product state space `S_1 x ... x S_n` with row-major flat encoding
/// (the last coordinate varies fastest).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct StateSpace {
    dims: Vec<usize>,
    total: usize,
}

impl StateSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::StateSpace("no dimensions".into()));
        }
        let mut total: usize = 1;
        for (i, &d) in dims.iter().enumerate() {
            if d == 0 {
                return Err(Error::StateSpace(format!("dimension {i} has cardinality 0")));
            }
            total = total
                .checked_mul(d)
                .ok_or_else(|| Error::StateSpace(format!("product of {dims:?} overflows")))?;
        }
        Ok(Self { dims, total })
    }

    /// One-dimensional space with `n` states.
    pub fn flat(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_states(&self) -> usize {
        self.total
    }

    pub fn encode(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                got: coords.len(),
            });
        }
        let mut idx = 0usize;
        for (i, (&c, &d)) in coords.iter().zip(&self.dims).enumerate() {
            if c >= d {
                return Err(Error::StateSpace(format!(
                    "coordinate {i} = {c} out of range 0..{d}"
                )));
            }
            idx = idx * d + c;
        }
        Ok(idx)
    }

    pub fn decode(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.total {
            return Err(Error::StateSpace(format!(
                "flat index {index} out of range 0..{}",
                self.total
            )));
        }
        let mut coords = vec![0; self.dims.len()];
        let mut rest = index;
        for (slot, &d) in coords.iter_mut().zip(&self.dims).rev() {
            *slot = rest % d;
            rest /= d;
        }
        Ok(coords)
    }

    /// Componentwise partial order: `a <= b` in every coordinate.
    pub fn dominated_by(&self, a: usize, b: usize) -> Result<bool> {
        let (ca, cb) = (self.decode(a)?, self.decode(b)?);
        Ok(ca.iter().zip(&cb).all(|(x, y)| x <= y))
    }
}

impl TryFrom<Vec<usize>> for StateSpace {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<StateSpace> for Vec<usize> {
    fn from(s: StateSpace) -> Self {
        s.dims
    }
}
