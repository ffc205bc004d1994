//! Radial potentials `V(r)` together with the radial form `r·V′(r)` of `(DV(x), x)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V ≡ v_inf`.
    Constant(f64),
    /// Sampled profile, linearly interpolated.
    Radial(RadialPotential),
}

/// Samples of `V` (and optionally `r·V′`) at strictly increasing radii.
///
/// Between samples both are interpolated linearly; outside the sampled range
/// the nearest sample is held and `r·V′` is taken as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPotential {
    r: Vec<f64>,
    v: Vec<f64>,
    r_dv: Option<Vec<f64>>,
    v_inf: f64,
}

/// Potential values at the grid nodes, possibly pulled back by a scaling `r ↦ t·r`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalPotential {
    pub v: Vec<f64>,
    pub r_dv: Vec<f64>,
}

impl RadialPotential {
    pub fn new(r: Vec<f64>, v: Vec<f64>, r_dv: Option<Vec<f64>>, v_inf: f64) -> Result<Self> {
        if r.len() < 2 {
            return Err(Error::InvalidPotential("at least two samples are required".into()));
        }
        if v.len() != r.len() {
            return Err(Error::Shape { expected: r.len(), got: v.len() });
        }
        if let Some(d) = &r_dv {
            if d.len() != r.len() {
                return Err(Error::Shape { expected: r.len(), got: d.len() });
            }
        }
        if !(r[0] >= 0.0) || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential("radii must be nonnegative and strictly increasing".into()));
        }
        let all = r.iter().chain(&v).chain(r_dv.iter().flatten());
        if all.clone().any(|x| !x.is_finite()) || !v_inf.is_finite() {
            return Err(Error::InvalidPotential("non-finite sample".into()));
        }
        Ok(Self { r, v, r_dv, v_inf })
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn r_dv(&self) -> Option<&[f64]> {
        self.r_dv.as_deref()
    }

    pub fn v_inf(&self) -> f64 {
        self.v_inf
    }

    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let last = self.r.len() - 1;
        if x <= self.r[0] || x >= self.r[last] {
            return None;
        }
        let k = self.r.partition_point(|&ri| ri <= x) - 1;
        Some((k, (x - self.r[k]) / (self.r[k + 1] - self.r[k])))
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some((k, s)) => self.v[k] + s * (self.v[k + 1] - self.v[k]),
            None if x <= self.r[0] => self.v[0],
            None => self.v[self.v.len() - 1],
        }
    }

    /// `r·V′(r)`, or `None` if it was not supplied.
    pub fn r_dv_at(&self, x: f64) -> Option<f64> {
        let d = self.r_dv.as_ref()?;
        Some(match self.locate(x) {
            Some((k, s)) => d[k] + s * (d[k + 1] - d[k]),
            None => 0.0,
        })
    }
}

impl PotentialSpec {
    pub fn constant(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidPotential(format!("constant {v} is not finite")));
        }
        Ok(Self::Constant(v))
    }

    /// `V(r) = v1 − 1/(r+1)`, `r·V′ = r/(r+1)²`, sampled on `[0, r_hi]` at
    /// `samples + 1` radii clustered towards the origin.
    pub fn shifted_coulomb(v1: f64, r_hi: f64, samples: usize) -> Result<Self> {
        if !(r_hi > 0.0) || samples < 2 {
            return Err(Error::InvalidPotential("need r_hi > 0 and at least two samples".into()));
        }
        let r: Vec<f64> = (0..=samples)
            .map(|k| {
                let s = k as f64 / samples as f64;
                r_hi * s * s
            })
            .collect();
        let v = r.iter().map(|&x| v1 - 1.0 / (x + 1.0)).collect();
        let d = r.iter().map(|&x| x / ((x + 1.0) * (x + 1.0))).collect();
        Ok(Self::Radial(RadialPotential::new(r, v, Some(d), v1)?))
    }

    pub fn v_inf(&self) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Radial(p) => p.v_inf,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Radial(p) => p.value(r),
        }
    }

    pub fn r_dv_at(&self, r: f64) -> Result<f64> {
        match self {
            Self::Constant(_) => Ok(0.0),
            Self::Radial(p) => p.r_dv_at(r).ok_or(Error::IncompleteSpec("r·V′ profile is missing")),
        }
    }

    /// `V(t·rᵢ)` and `(r·V′)(t·rᵢ)` at every node.
    pub fn nodal(&self, grid: &RadialGrid, t: f64) -> Result<NodalPotential> {
        match self {
            Self::Constant(c) => Ok(NodalPotential { v: alloc::vec![*c; grid.n()], r_dv: alloc::vec![0.0; grid.n()] }),
            Self::Radial(p) => {
                if p.r_dv.is_none() {
                    return Err(Error::IncompleteSpec("r·V′ profile is missing"));
                }
                let v = grid.nodes().iter().map(|&r| p.value(t * r)).collect();
                let r_dv = grid.nodes().iter().map(|&r| p.r_dv_at(t * r).unwrap_or(0.0)).collect();
                Ok(NodalPotential { v, r_dv })
            }
        }
    }
}
