//! Sampling the stationary field on the hull of a triangle window.
//!
//! The default method draws only the `d = 0` anti-diagonal from its exact joint law
//! and fills layers `1..=s` with the recursion. That is exact: every value on layer
//! 0 is a function of innovations `e(u, v)` with `u + v <= 0`, while the recursion
//! above it only adds innovations with `u + v >= 1`, so the two are independent and
//! the result has the stationary law on the whole hull. The boundary needs one
//! `(s+1) x (s+1)` factorization instead of one for the full hull.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::covariance::{margin_for_tolerance, CovKernel};
use crate::error::{Error, Result};
use crate::linalg::chol_spd;
use crate::model::{hull_indices, Field, ModelParams, TriangleWindow};
use crate::rng::{InnovationDist, RngStream};

/// Tail variance allowed when the series sets up the boundary layer.
pub const BOUNDARY_SERIES_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMethod {
    /// Exact Gaussian layer 0, recursion above it.
    BoundaryCholesky,
    /// Whole hull jointly; for validation at small `s`.
    FullCholesky,
    /// Every hull value from the moving-average series cut at depth `margin`.
    TruncatedSeries { margin: u32 },
    /// Layer 0 from the series (tail variance below [`BOUNDARY_SERIES_TOL`]),
    /// recursion above it. Works for every innovation law.
    BoundarySeries,
}

impl SimMethod {
    pub fn is_cholesky(&self) -> bool {
        matches!(self, SimMethod::BoundaryCholesky | SimMethod::FullCholesky)
    }

    /// Default method for an innovation law.
    pub fn default_for(dist: InnovationDist) -> Self {
        match dist {
            InnovationDist::Gaussian => SimMethod::BoundaryCholesky,
            _ => SimMethod::BoundarySeries,
        }
    }
}

impl fmt::Display for SimMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimMethod::BoundaryCholesky => f.write_str("boundary-cholesky"),
            SimMethod::FullCholesky => f.write_str("full-cholesky"),
            SimMethod::TruncatedSeries { margin } => write!(f, "truncated-series:{margin}"),
            SimMethod::BoundarySeries => f.write_str("boundary-series"),
        }
    }
}

impl FromStr for SimMethod {
    type Err = Error;

    /// Accepts `boundary-cholesky`, `full-cholesky`, `boundary-series` and
    /// `truncated-series:<margin>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boundary-cholesky" => Ok(SimMethod::BoundaryCholesky),
            "full-cholesky" => Ok(SimMethod::FullCholesky),
            "boundary-series" => Ok(SimMethod::BoundarySeries),
            _ => {
                let margin = s
                    .strip_prefix("truncated-series:")
                    .and_then(|m| m.parse().ok())
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!("unknown simulation method '{s}'"))
                    })?;
                Ok(SimMethod::TruncatedSeries { margin })
            }
        }
    }
}

enum Plan {
    Boundary(DMatrix<f64>),
    Full(DMatrix<f64>),
    Series(usize),
    BoundarySeries(usize),
}

/// A sampler for one `(params, window, method, law)`; factorizations are done once
/// at construction and shared read-only by every draw.
pub struct Simulator {
    params: ModelParams,
    window: TriangleWindow,
    method: SimMethod,
    dist: InnovationDist,
    jitter: f64,
    plan: Plan,
}

impl Simulator {
    pub fn new(
        params: ModelParams,
        window: TriangleWindow,
        method: SimMethod,
        dist: InnovationDist,
    ) -> Result<Self> {
        params.check_stationary()?;
        if window.s() < 1 {
            return Err(Error::OutOfRange(format!(
                "window ({}, {}) is empty",
                window.k, window.l
            )));
        }
        if method.is_cholesky() && dist != InnovationDist::Gaussian {
            return Err(Error::MethodUnsupported {
                method: method.to_string(),
                dist: dist.to_string(),
            });
        }
        let mut jitter = 0.0;
        let plan = match method {
            SimMethod::BoundaryCholesky | SimMethod::FullCholesky => {
                let kernel = CovKernel::closed(params)?;
                let points = if method == SimMethod::BoundaryCholesky {
                    (0..window.layer_len(0)).map(|o| window.point(0, o)).collect()
                } else {
                    hull_indices(window)
                };
                let chol = chol_spd(&kernel.matrix(&points)?)?;
                jitter = chol.jitter;
                if method == SimMethod::BoundaryCholesky {
                    Plan::Boundary(chol.lower)
                } else {
                    Plan::Full(chol.lower)
                }
            }
            SimMethod::TruncatedSeries { margin } => Plan::Series(margin as usize),
            SimMethod::BoundarySeries => {
                let margin = margin_for_tolerance(params.q(), BOUNDARY_SERIES_TOL)?;
                Plan::BoundarySeries(margin as usize)
            }
        };
        Ok(Self {
            params,
            window,
            method,
            dist,
            jitter,
            plan,
        })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn window(&self) -> TriangleWindow {
        self.window
    }

    pub fn method(&self) -> SimMethod {
        self.method
    }

    pub fn dist(&self) -> InnovationDist {
        self.dist
    }

    /// Diagonal jitter the factorization needed (zero for a healthy covariance).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Series depth used, if the method is series based.
    pub fn margin(&self) -> Option<usize> {
        match self.plan {
            Plan::Series(m) | Plan::BoundarySeries(m) => Some(m),
            _ => None,
        }
    }

    /// Draws one field. Consumes the stream from its current position.
    pub fn sample(&self, stream: &mut RngStream) -> Result<Field> {
        let w = self.window;
        let s = w.s() as usize;
        match &self.plan {
            Plan::Boundary(lower) => {
                let z = DVector::from_fn(s + 1, |_, _| stream.normal());
                let boundary = lower * z;
                let eps = self.innovations(stream, w.triangle_len());
                Field::from_recursion(self.params, w, boundary.as_slice(), Some(eps))
            }
            Plan::Full(lower) => {
                let z = DVector::from_fn(w.hull_len(), |_, _| stream.normal());
                let values = lower * z;
                let eps = self.residuals(values.as_slice());
                Field::new(w, values.as_slice().to_vec(), Some(eps))
            }
            Plan::Series(margin) => {
                let layers = ExtendedLayers::draw(w, *margin, s, self.dist, stream);
                let mut values = Vec::with_capacity(w.hull_len());
                for d in 0..=s {
                    values.extend(layers.series_layer(self.params, d, *margin));
                }
                Field::new(w, values, Some(layers.triangle()))
            }
            Plan::BoundarySeries(margin) => {
                let layers = ExtendedLayers::draw(w, *margin, 0, self.dist, stream);
                let boundary = layers.series_layer(self.params, 0, *margin);
                let eps = self.innovations(stream, w.triangle_len());
                Field::from_recursion(self.params, w, &boundary, Some(eps))
            }
        }
    }

    fn innovations(&self, stream: &mut RngStream, n: usize) -> Vec<f64> {
        let mut eps = vec![0.0; n];
        stream.fill(self.dist, &mut eps);
        eps
    }

    fn residuals(&self, values: &[f64]) -> Vec<f64> {
        let w = self.window;
        let (a, b) = (self.params.alpha, self.params.beta);
        let mut eps = Vec::with_capacity(w.triangle_len());
        for d in 1..=w.s() as usize {
            let prev = w.layer_start(d - 1);
            let cur = w.layer_start(d);
            for o in 0..w.layer_len(d) {
                eps.push(values[cur + o] - a * values[prev + o] - b * values[prev + o + 1]);
            }
        }
        eps
    }
}

/// Draws a field with a one-off [`Simulator`].
pub fn simulate(
    params: ModelParams,
    window: TriangleWindow,
    method: SimMethod,
    dist: InnovationDist,
    stream: &mut RngStream,
) -> Result<Field> {
    Simulator::new(params, window, method, dist)?.sample(stream)
}

/// Innovations on anti-diagonals `e = -margin..=top`, layer `e` holding offsets
/// `0..=s-e` (the same offset convention as the hull, so the ancestors of hull
/// point `(d, o)` at depth `t` sit at offsets `o..=o+t` of layer `d - t`).
struct ExtendedLayers {
    s: usize,
    margin: usize,
    layers: Vec<Vec<f64>>,
}

impl ExtendedLayers {
    fn draw(
        w: TriangleWindow,
        margin: usize,
        top: usize,
        dist: InnovationDist,
        stream: &mut RngStream,
    ) -> Self {
        let s = w.s() as usize;
        let layers = (0..=margin + top)
            .map(|idx| {
                // layer e = idx - margin has s - e + 1 entries
                let mut v = vec![0.0; s + margin + 1 - idx];
                stream.fill(dist, &mut v);
                v
            })
            .collect();
        Self { s, margin, layers }
    }

    fn layer(&self, e: isize) -> &[f64] {
        &self.layers[(e + self.margin as isize) as usize]
    }

    /// Values on hull layer `d`, each summed over its ancestors down to depth `depth`,
    /// by Horner's rule with `(P v)[o] = a v[o] + b v[o+1]`.
    fn series_layer(&self, p: ModelParams, d: usize, depth: usize) -> Vec<f64> {
        let d = d as isize;
        let bottom = d - depth as isize;
        let mut v = self.layer(bottom).to_vec();
        for e in bottom + 1..=d {
            let eps = self.layer(e);
            let len = (self.s as isize - e + 1) as usize;
            for o in 0..len {
                v[o] = p.alpha * v[o] + p.beta * v[o + 1] + eps[o];
            }
            v.truncate(len);
        }
        v
    }

    /// Layers `1..=s` concatenated: the innovations on the triangle.
    fn triangle(&self) -> Vec<f64> {
        (1..=self.s as isize).flat_map(|e| self.layer(e).iter().copied()).collect()
    }
}
