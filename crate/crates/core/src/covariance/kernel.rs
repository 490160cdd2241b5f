use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{cov_binrep, cov_closed, cov_f4, cov_series_oracle, margin_for_tolerance};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovMethod {
    ClosedForm,
    AppellF4,
    BinomialRep,
    SeriesOracle,
}

impl CovMethod {
    pub const ALL: [CovMethod; 4] = [
        CovMethod::ClosedForm,
        CovMethod::AppellF4,
        CovMethod::BinomialRep,
        CovMethod::SeriesOracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CovMethod::ClosedForm => "closed-form",
            CovMethod::AppellF4 => "appell-f4",
            CovMethod::BinomialRep => "binomial-rep",
            CovMethod::SeriesOracle => "series-oracle",
        }
    }
}

impl fmt::Display for CovMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CovMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown covariance method '{s}'")))
    }
}

/// Covariance evaluator for one parameter point, memoizing `R(k, l)`.
///
/// Lags are folded onto a canonical representative of `{(k, l), (-k, -l)}` before
/// lookup, so `R(k, l) == R(-k, -l)` holds bit-for-bit. The cache is behind a lock:
/// a kernel can be shared by reference between workers and every evaluation is
/// idempotent.
pub struct CovKernel {
    params: ModelParams,
    method: CovMethod,
    tolerance: f64,
    cache: RwLock<HashMap<(i64, i64), f64>>,
}

impl CovKernel {
    pub fn new(params: ModelParams, method: CovMethod, tolerance: f64) -> Result<Self> {
        params.check_stationary()?;
        if !(tolerance > 0.0) {
            return Err(Error::OutOfRange(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(Self {
            params,
            method,
            tolerance,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Closed-form kernel; the tolerance is unused.
    pub fn closed(params: ModelParams) -> Result<Self> {
        Self::new(params, CovMethod::ClosedForm, 1e-12)
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn method(&self) -> CovMethod {
        self.method
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    pub fn get(&self, k: i64, l: i64) -> Result<f64> {
        let key = canonical(k, l);
        if let Some(v) = self.cache.read().ok().and_then(|c| c.get(&key).copied()) {
            return Ok(v);
        }
        let v = self.evaluate(key.0, key.1)?;
        if let Ok(mut c) = self.cache.write() {
            c.entry(key).or_insert(v);
        }
        Ok(v)
    }

    /// Evaluates without touching the cache.
    pub fn evaluate(&self, k: i64, l: i64) -> Result<f64> {
        let p = self.params;
        match self.method {
            CovMethod::ClosedForm => cov_closed(p, k, l),
            CovMethod::AppellF4 => cov_f4(p, k, l, self.tolerance),
            CovMethod::BinomialRep => cov_binrep(p, k, l, self.tolerance),
            CovMethod::SeriesOracle => {
                let margin = margin_for_tolerance(p.q(), self.tolerance)?;
                cov_series_oracle(p, k, l, margin)
            }
        }
    }

    /// Covariance matrix of `X` at the given lattice points.
    pub fn matrix(&self, points: &[(i64, i64)]) -> Result<DMatrix<f64>> {
        let n = points.len();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = self.get(points[a].0 - points[b].0, points[a].1 - points[b].1)?;
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        Ok(m)
    }
}

impl Clone for CovKernel {
    fn clone(&self) -> Self {
        let cache = self.cache.read().map(|c| c.clone()).unwrap_or_default();
        Self {
            params: self.params,
            method: self.method,
            tolerance: self.tolerance,
            cache: RwLock::new(cache),
        }
    }
}

impl fmt::Debug for CovKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CovKernel")
            .field("params", &self.params)
            .field("method", &self.method)
            .field("tolerance", &self.tolerance)
            .field("cached", &self.cached_len())
            .finish()
    }
}

fn canonical(k: i64, l: i64) -> (i64, i64) {
    if k < 0 || (k == 0 && l < 0) {
        (-k, -l)
    } else {
        (k, l)
    }
}
