use num_traits::ToPrimitive;

use super::IntMat;
use crate::error::{Error, Result};
use crate::field::RatExpr;

/// A point of `G^n = G_a^n x G_m^n`; multiplicative coordinates are nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GPoint {
    pub additive: Vec<RatExpr>,
    pub multiplicative: Vec<RatExpr>,
}

impl GPoint {
    pub fn new(additive: Vec<RatExpr>, multiplicative: Vec<RatExpr>) -> Result<GPoint> {
        if additive.len() != multiplicative.len() {
            return Err(Error::Dimension(format!(
                "{} additive vs {} multiplicative coordinates",
                additive.len(),
                multiplicative.len()
            )));
        }
        if multiplicative.iter().any(RatExpr::is_zero) {
            return Err(Error::ZeroInput("multiplicative coordinate is zero".into()));
        }
        Ok(GPoint { additive, multiplicative })
    }

    pub fn identity(n: usize) -> GPoint {
        GPoint { additive: vec![RatExpr::zero(); n], multiplicative: vec![RatExpr::one(); n] }
    }

    pub fn dim(&self) -> usize {
        self.additive.len()
    }

    /// Group law: add additively, multiply multiplicatively.
    pub fn op(&self, other: &GPoint) -> Result<GPoint> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(GPoint {
            additive: self.additive.iter().zip(&other.additive).map(|(a, b)| a.add(b)).collect(),
            multiplicative: self.multiplicative.iter().zip(&other.multiplicative).map(|(a, b)| a.mul(b)).collect(),
        })
    }

    pub fn inverse(&self) -> GPoint {
        GPoint {
            additive: self.additive.iter().map(RatExpr::neg).collect(),
            multiplicative: self.multiplicative.iter().map(|w| w.inv().unwrap()).collect(),
        }
    }
}

/// `M . (z, w) = (M z, w^M)` for an `r x n` integer matrix.
pub fn act(m: &IntMat, p: &GPoint) -> Result<GPoint> {
    if m.cols() != p.dim() {
        return Err(Error::Dimension(format!("matrix has {} columns, point has dimension {}", m.cols(), p.dim())));
    }
    let mut additive = Vec::with_capacity(m.rows());
    let mut multiplicative = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let mut z = RatExpr::zero();
        let mut w = RatExpr::one();
        for j in 0..m.cols() {
            let e = m.get(i, j).to_i64().ok_or_else(|| Error::Invalid("exponent too large".into()))?;
            if e != 0 {
                z = z.add(&p.additive[j].scale_int(e));
                w = w.mul(&p.multiplicative[j].pow(e).unwrap());
            }
        }
        additive.push(z);
        multiplicative.push(w);
    }
    Ok(GPoint { additive, multiplicative })
}
