//! Latin hypercube sampling of box parameter spaces.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRange {
    pub name: String,
    pub range: [f64; 2],
}

/// Named box `prod [lo_i, hi_i]`; may be zero-dimensional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterSpace {
    pub params: Vec<ParameterRange>,
}

impl ParameterSpace {
    pub fn new(params: Vec<ParameterRange>) -> Result<ParameterSpace> {
        for p in &params {
            if !(p.range[0] <= p.range[1]) || !p.range[0].is_finite() || !p.range[1].is_finite() {
                return Err(RomError::config(format!("parameter `{}` has invalid range {:?}", p.name, p.range)));
            }
        }
        for (i, p) in params.iter().enumerate() {
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(RomError::config(format!("parameter `{}` declared twice", p.name)));
            }
        }
        Ok(ParameterSpace { params })
    }

    pub fn from_bounds(names: &[&str], bounds: &[[f64; 2]]) -> Result<ParameterSpace> {
        ParameterSpace::new(
            names.iter().zip(bounds).map(|(n, b)| ParameterRange { name: n.to_string(), range: *b }).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        mu.len() == self.dim() && self.params.iter().zip(mu).all(|(p, &v)| p.range[0] <= v && v <= p.range[1])
    }

    /// Indices of components outside their range.
    pub fn out_of_range(&self, mu: &[f64]) -> Vec<usize> {
        self.params
            .iter()
            .zip(mu)
            .enumerate()
            .filter(|(_, (p, &v))| !(p.range[0] <= v && v <= p.range[1]))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LhsMode {
    /// Uniform jitter inside each stratum.
    #[default]
    Jittered,
    /// Stratum midpoints.
    Midpoint,
}

/// `n` Latin hypercube points in `space`, deterministic in `seed`.
///
/// Each axis is cut into `n` equal strata and every stratum holds exactly one point.
pub fn latin_hypercube(space: &ParameterSpace, n: usize, seed: u64, mode: LhsMode) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(RomError::EmptySample("zero samples requested".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::with_capacity(space.dim());
    for p in &space.params {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        let [lo, hi] = p.range;
        let col: Vec<f64> = strata
            .iter()
            .map(|&s| {
                let u = match mode {
                    LhsMode::Jittered => rng.random::<f64>(),
                    LhsMode::Midpoint => 0.5,
                };
                (lo + (s as f64 + u) / n as f64 * (hi - lo)).min(hi)
            })
            .collect();
        columns.push(col);
    }
    Ok((0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect())
}
