//! Index geometry, parameter records, nearly-unstable designs and field storage.
//!
//! Lattice values on a window are stored by anti-diagonal layers `d = i + j`.
//! Within a layer the offset of `(i, j)` is `l - j`, so that the two regressors
//! of a point, `(i-1, j)` and `(i, j-1)`, sit at offsets `o` and `o + 1` of the
//! previous layer. The recursion `X = a X(i-1,j) + b X(i,j-1) + e` is then a
//! contiguous sweep over layers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `(alpha, beta)` pair defining one planar AR field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
}

impl ModelParams {
    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Builds the pair and rejects it unless `|alpha| + |beta| < 1`.
    pub fn stationary(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self::new(alpha, beta);
        p.check_stationary()?;
        Ok(p)
    }

    /// `|alpha| + |beta|`.
    pub fn q(&self) -> f64 {
        self.alpha.abs() + self.beta.abs()
    }

    pub fn is_stationary(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.q() < 1.0
    }

    pub fn check_stationary(&self) -> Result<()> {
        if self.is_stationary() {
            Ok(())
        } else {
            Err(Error::NonStationary {
                alpha: self.alpha,
                beta: self.beta,
            })
        }
    }

    /// True when one coefficient vanishes and the field is a stack of 1-D AR(1) lines.
    pub fn is_degenerate(&self) -> bool {
        self.alpha == 0.0 || self.beta == 0.0
    }
}

/// A point on the unstable boundary `|alpha| + |beta| = 1`.
///
/// Only `alpha` and the sign of `beta` are stored; `|beta| = 1 - |alpha|` is derived,
/// so the boundary identity holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    alpha: f64,
    beta_negative: bool,
}

impl BoundaryPoint {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || alpha.abs() > 1.0 {
            return Err(Error::OutOfRange(format!(
                "boundary point ({alpha}, {beta}) needs |alpha| <= 1"
            )));
        }
        if (alpha.abs() + beta.abs() - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!(
                "boundary point ({alpha}, {beta}) violates |alpha| + |beta| = 1"
            )));
        }
        Ok(Self {
            alpha,
            beta_negative: beta < 0.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        let b = 1.0 - self.alpha.abs();
        if self.beta_negative {
            -b
        } else {
            b
        }
    }

    pub fn case_tag(&self) -> CaseTag {
        let a = self.alpha.abs();
        if a > 0.0 && a < 1.0 {
            CaseTag::Interior
        } else {
            CaseTag::Boundary
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    /// `0 < |alpha| < 1`
    Interior,
    /// `|alpha|` in `{0, 1}`
    Boundary,
}

/// Closed-form schedules for `gamma_m` and `delta_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Schedule {
    Const { c: f64 },
    /// `c * ln(m)`
    Log { c: f64 },
    /// `c * m^p`, `p < 1`
    Power { c: f64, p: f64 },
}

impl Schedule {
    pub fn value(&self, m: u64) -> f64 {
        let mf = m as f64;
        match *self {
            Schedule::Const { c } => c,
            Schedule::Log { c } => c * mf.ln(),
            Schedule::Power { c, p } => c * mf.powf(p),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Schedule::Const { c } | Schedule::Log { c } => c.is_finite(),
            Schedule::Power { c, p } => c.is_finite() && p.is_finite() && p < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad schedule {self:?}")))
        }
    }
}

/// A boundary point approached along `alpha_m = alpha - gamma(m)/m`,
/// `beta_m = beta - delta(m)/m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DesignSpec", into = "DesignSpec")]
pub struct NearlyUnstableDesign {
    pub boundary: BoundaryPoint,
    pub gamma: Schedule,
    pub delta: Schedule,
    pub case_tag: CaseTag,
}

impl NearlyUnstableDesign {
    pub fn new(boundary: BoundaryPoint, gamma: Schedule, delta: Schedule) -> Result<Self> {
        gamma.validate()?;
        delta.validate()?;
        Ok(Self {
            boundary,
            gamma,
            delta,
            case_tag: boundary.case_tag(),
        })
    }

    /// Design with constant schedules.
    pub fn constant(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self::new(
            BoundaryPoint::new(alpha, beta)?,
            Schedule::Const { c: gamma },
            Schedule::Const { c: delta },
        )
    }

    pub fn gamma_at(&self, m: u64) -> f64 {
        self.gamma.value(m)
    }

    pub fn delta_at(&self, m: u64) -> f64 {
        self.delta.value(m)
    }

    /// Parameters of the `m`-th stationary model; fails when `m` is too small
    /// for the schedule to land inside the stationary region.
    pub fn params_at(&self, m: u64) -> Result<ModelParams> {
        if m == 0 {
            return Err(Error::OutOfRange("model index must be >= 1".into()));
        }
        let mf = m as f64;
        ModelParams::stationary(
            self.boundary.alpha() - self.gamma_at(m) / mf,
            self.boundary.beta() - self.delta_at(m) / mf,
        )
    }
}

/// Serialized form of a design: `{alpha, beta, gamma, delta, case}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Schedule,
    pub delta: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseTag>,
}

impl TryFrom<DesignSpec> for NearlyUnstableDesign {
    type Error = Error;

    fn try_from(spec: DesignSpec) -> Result<Self> {
        let design = Self::new(
            BoundaryPoint::new(spec.alpha, spec.beta)?,
            spec.gamma,
            spec.delta,
        )?;
        if let Some(case) = spec.case {
            if case != design.case_tag {
                return Err(Error::InvalidConfig(format!(
                    "case {case:?} does not match alpha = {}",
                    spec.alpha
                )));
            }
        }
        Ok(design)
    }
}

impl From<NearlyUnstableDesign> for DesignSpec {
    fn from(d: NearlyUnstableDesign) -> Self {
        Self {
            alpha: d.boundary.alpha(),
            beta: d.boundary.beta(),
            gamma: d.gamma,
            delta: d.delta,
            case: Some(d.case_tag),
        }
    }
}

/// The triangle `T_{k,l} = {(i, j) : i + j >= 1, i <= k, j <= l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriangleWindow {
    pub k: i64,
    pub l: i64,
}

impl TriangleWindow {
    pub const fn new(k: i64, l: i64) -> Self {
        Self { k, l }
    }

    /// The balanced split `k = floor(s/2)`, `l = ceil(s/2)`.
    pub fn balanced(s: i64) -> Self {
        let k = s.div_euclid(2);
        Self { k, l: s - k }
    }

    /// Window sum `k + l`.
    pub fn s(&self) -> i64 {
        self.k + self.l
    }

    /// Number of layers holding data (`0..=s`), zero for an empty window.
    fn depth(&self) -> usize {
        if self.s() >= 1 {
            self.s() as usize
        } else {
            0
        }
    }

    pub fn triangle_len(&self) -> usize {
        let s = self.depth();
        s * (s + 1) / 2
    }

    pub fn hull_len(&self) -> usize {
        let s = self.depth();
        if s == 0 {
            0
        } else {
            (s + 1) * (s + 2) / 2
        }
    }

    /// Points on anti-diagonal `d` (hull layout).
    pub fn layer_len(&self, d: usize) -> usize {
        self.depth() + 1 - d
    }

    /// Flat offset of layer `d` in the hull layout.
    pub fn layer_start(&self, d: usize) -> usize {
        let s = self.depth();
        d * (s + 1) - d * d.saturating_sub(1) / 2
    }

    /// Flat offset of layer `d >= 1` in the triangle layout.
    pub fn triangle_layer_start(&self, d: usize) -> usize {
        self.layer_start(d) - (self.depth() + 1)
    }

    /// Layer and offset of `(i, j)` if it lies in the hull.
    pub fn locate(&self, i: i64, j: i64) -> Option<(usize, usize)> {
        let d = i + j;
        if self.depth() == 0 || d < 0 || d > self.s() || i > self.k || j > self.l {
            return None;
        }
        Some((d as usize, (self.l - j) as usize))
    }

    pub fn hull_index(&self, i: i64, j: i64) -> Option<usize> {
        self.locate(i, j).map(|(d, o)| self.layer_start(d) + o)
    }

    pub fn triangle_index(&self, i: i64, j: i64) -> Option<usize> {
        match self.locate(i, j) {
            Some((d, o)) if d >= 1 => Some(self.triangle_layer_start(d) + o),
            _ => None,
        }
    }

    /// Lattice index at layer `d`, offset `o`.
    pub fn point(&self, d: usize, o: usize) -> (i64, i64) {
        let j = self.l - o as i64;
        (d as i64 - j, j)
    }
}

fn layered_points(w: TriangleWindow, from: usize) -> Vec<(i64, i64)> {
    let s = w.depth();
    if s == 0 {
        return Vec::new();
    }
    (from..=s)
        .flat_map(|d| (0..w.layer_len(d)).map(move |o| w.point(d, o)))
        .collect()
}

/// Triangle points ordered by anti-diagonal, then by `i`.
pub fn triangle_indices(w: TriangleWindow) -> Vec<(i64, i64)> {
    layered_points(w, 1)
}

/// The triangle plus every regressor `(i-1, j)`, `(i, j-1)` of its points.
///
/// Only layer `d = 0` adds points: `s + 1` of them, `(i, -i)` for `-l <= i <= k`.
pub fn hull_indices(w: TriangleWindow) -> Vec<(i64, i64)> {
    layered_points(w, 0)
}

/// Sample values on the hull of a window, optionally with the innovations
/// that drove the triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    window: TriangleWindow,
    values: Vec<f64>,
    innovations: Option<Vec<f64>>,
}

impl Field {
    pub fn new(
        window: TriangleWindow,
        values: Vec<f64>,
        innovations: Option<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != window.hull_len() {
            return Err(Error::OutOfRange(format!(
                "field needs {} hull values, got {}",
                window.hull_len(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (d, o) = layer_of(window, pos);
            let (i, j) = window.point(d, o);
            return Err(Error::OutOfRange(format!("non-finite value at ({i}, {j})")));
        }
        if let Some(eps) = &innovations {
            if eps.len() != window.triangle_len() {
                return Err(Error::OutOfRange(format!(
                    "field needs {} innovations, got {}",
                    window.triangle_len(),
                    eps.len()
                )));
            }
        }
        Ok(Self {
            window,
            values,
            innovations,
        })
    }

    /// Fills layers `1..=s` by the AR recursion from a boundary on layer 0.
    pub fn from_recursion(
        params: ModelParams,
        window: TriangleWindow,
        boundary: &[f64],
        innovations: Option<Vec<f64>>,
    ) -> Result<Self> {
        let s = window.depth();
        if s == 0 {
            return Self::new(window, Vec::new(), innovations);
        }
        if boundary.len() != s + 1 {
            return Err(Error::OutOfRange(format!(
                "boundary layer needs {} values, got {}",
                s + 1,
                boundary.len()
            )));
        }
        let mut values = Vec::with_capacity(window.hull_len());
        values.extend_from_slice(boundary);
        let (a, b) = (params.alpha, params.beta);
        for d in 1..=s {
            let prev = window.layer_start(d - 1);
            let tri = window.triangle_layer_start(d);
            for o in 0..window.layer_len(d) {
                let e = innovations.as_ref().map_or(0.0, |eps| eps[tri + o]);
                let v = a * values[prev + o] + b * values[prev + o + 1] + e;
                values.push(v);
            }
        }
        Self::new(window, values, innovations)
    }

    pub fn window(&self) -> TriangleWindow {
        self.window
    }

    /// Hull values in layer order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn innovations(&self) -> Option<&[f64]> {
        self.innovations.as_deref()
    }

    pub fn layer(&self, d: usize) -> &[f64] {
        let start = self.window.layer_start(d);
        &self.values[start..start + self.window.layer_len(d)]
    }

    pub fn value(&self, i: i64, j: i64) -> Option<f64> {
        self.window.hull_index(i, j).map(|idx| self.values[idx])
    }

    pub fn innovation(&self, i: i64, j: i64) -> Option<f64> {
        let eps = self.innovations.as_ref()?;
        self.window.triangle_index(i, j).map(|idx| eps[idx])
    }

    /// Largest recursion residual `|X - a X(i-1,j) - b X(i,j-1) - e|` over the triangle.
    pub fn max_residual(&self, params: ModelParams) -> Result<f64> {
        let eps = self.innovations.as_ref().ok_or(Error::MissingInnovations)?;
        let w = self.window;
        let mut worst = 0.0_f64;
        for d in 1..=w.depth() {
            let prev = w.layer_start(d - 1);
            let cur = w.layer_start(d);
            let tri = w.triangle_layer_start(d);
            for o in 0..w.layer_len(d) {
                let r = self.values[cur + o]
                    - params.alpha * self.values[prev + o]
                    - params.beta * self.values[prev + o + 1]
                    - eps[tri + o];
                worst = worst.max(r.abs());
            }
        }
        Ok(worst)
    }

    /// The field multiplied by `c` (innovations included).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            window: self.window,
            values: self.values.iter().map(|v| v * c).collect(),
            innovations: self
                .innovations
                .as_ref()
                .map(|e| e.iter().map(|v| v * c).collect()),
        }
    }
}

fn layer_of(w: TriangleWindow, flat: usize) -> (usize, usize) {
    let mut d = 0;
    while d < w.depth() && w.layer_start(d + 1) <= flat {
        d += 1;
    }
    (d, flat - w.layer_start(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn brute_triangle(k: i64, l: i64) -> BTreeSet<(i64, i64)> {
        let lo = -(k.abs() + l.abs()) - 2;
        let mut out = BTreeSet::new();
        for i in lo..=k {
            for j in lo..=l {
                if i + j >= 1 {
                    out.insert((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn triangle_examples() {
        assert_eq!(
            triangle_indices(TriangleWindow::new(1, 1)),
            vec![(0, 1), (1, 0), (1, 1)]
        );
        assert!(triangle_indices(TriangleWindow::new(0, 0)).is_empty());
        assert!(triangle_indices(TriangleWindow::new(-3, 1)).is_empty());
        let t = triangle_indices(TriangleWindow::new(2, 1));
        assert_eq!(t, vec![(0, 1), (1, 0), (2, -1), (1, 1), (2, 0), (2, 1)]);
        let set: BTreeSet<_> = t.into_iter().collect();
        assert_eq!(set, brute_triangle(2, 1));
    }

    #[test]
    fn hull_examples() {
        let h: BTreeSet<_> = hull_indices(TriangleWindow::new(1, 1)).into_iter().collect();
        let mut want: BTreeSet<_> = [(0, 1), (1, 0), (1, 1)].into_iter().collect();
        want.extend([(-1, 1), (0, 0), (1, -1)]);
        assert_eq!(h, want);
        assert!(hull_indices(TriangleWindow::new(0, 0)).is_empty());

        let w = TriangleWindow::new(2, 1);
        let h = hull_indices(w);
        assert_eq!(h.len(), 10);
        assert_eq!(&h[..4], &[(-1, 1), (0, 0), (1, -1), (2, -2)]);
        assert_eq!(w.hull_len(), 10);
    }

    #[test]
    fn params_at_examples() {
        let d = NearlyUnstableDesign::constant(0.5, 0.5, 1.0, 1.0).unwrap();
        let p = d.params_at(10).unwrap();
        assert!((p.alpha - 0.4).abs() < 1e-15 && (p.beta - 0.4).abs() < 1e-15);
        assert!(matches!(d.params_at(1), Err(Error::NonStationary { .. })));

        let d = NearlyUnstableDesign::constant(1.0, 0.0, 2.0, 1.0).unwrap();
        let p = d.params_at(8).unwrap();
        assert_eq!((p.alpha, p.beta), (0.75, -0.125));
        assert_eq!(p.q(), 0.875);
        assert_eq!(d.case_tag, CaseTag::Boundary);
    }

    #[test]
    fn boundary_point_is_exact() {
        let bp = BoundaryPoint::new(0.3, -0.7).unwrap();
        assert_eq!(bp.alpha().abs() + bp.beta().abs(), 1.0);
        assert!(bp.beta() < 0.0);
        assert!(BoundaryPoint::new(0.3, 0.6).is_err());
        assert_eq!(BoundaryPoint::new(0.0, -1.0).unwrap().case_tag(), CaseTag::Boundary);
    }

    #[test]
    fn design_json_checks_case() {
        let json = r#"{"alpha":0.5,"beta":0.5,"gamma":{"kind":"const","c":1},
                       "delta":{"kind":"power","c":1,"p":0.5},"case":"interior"}"#;
        let d: NearlyUnstableDesign = serde_json::from_str(json).unwrap();
        assert_eq!(d.delta_at(16), 4.0);
        let bad = json.replace("interior", "boundary");
        assert!(serde_json::from_str::<NearlyUnstableDesign>(&bad).is_err());
        let bad_power = json.replace("\"p\":0.5", "\"p\":1.5");
        assert!(serde_json::from_str::<NearlyUnstableDesign>(&bad_power).is_err());
    }

    #[test]
    fn recursion_fill_matches_hand_values() {
        let w = TriangleWindow::new(1, 1);
        let f = Field::from_recursion(ModelParams::new(0.3, 0.5), w, &[1.0, 2.0, 3.0], None)
            .unwrap();
        // boundary (-1,1)=1, (0,0)=2, (1,-1)=3
        assert!((f.value(0, 1).unwrap() - 1.3).abs() < 1e-15);
        assert!((f.value(1, 0).unwrap() - 2.1).abs() < 1e-15);
        assert!((f.value(1, 1).unwrap() - 1.44).abs() < 1e-15);
        assert_eq!(f.value(2, 0), None);
    }

    #[test]
    fn field_rejects_bad_input() {
        let w = TriangleWindow::new(1, 1);
        assert!(Field::new(w, vec![0.0; 5], None).is_err());
        let mut v = vec![0.0; 6];
        v[4] = f64::NAN;
        assert!(Field::new(w, v, None).is_err());
        assert!(Field::new(w, vec![0.0; 6], Some(vec![0.0; 2])).is_err());
    }

    proptest! {
        #[test]
        fn triangle_count_and_translation(s in 1i64..=50, k in -60i64..60) {
            let w = TriangleWindow::new(k, s - k);
            let t = triangle_indices(w);
            prop_assert_eq!(t.len() as i64, s * (s + 1) / 2);
            // translate onto the (0, s) split
            let base = triangle_indices(TriangleWindow::new(0, s));
            let shifted: Vec<_> = base.iter().map(|&(i, j)| (i + k, j - k)).collect();
            prop_assert_eq!(t, shifted);
        }

        #[test]
        fn hull_contains_regressors(k in -8i64..12, l in -8i64..12) {
            let w = TriangleWindow::new(k, l);
            let hull: BTreeSet<_> = hull_indices(w).into_iter().collect();
            let tri = triangle_indices(w);
            prop_assert_eq!(hull.len(), w.hull_len());
            for &(i, j) in &tri {
                prop_assert!(hull.contains(&(i, j)));
                prop_assert!(hull.contains(&(i - 1, j)));
                prop_assert!(hull.contains(&(i, j - 1)));
            }
            for (n, &(i, j)) in hull_indices(w).iter().enumerate() {
                prop_assert_eq!(w.hull_index(i, j), Some(n));
            }
        }

        #[test]
        fn params_at_distance(m in 3u64..10_000, g in -1.0f64..1.0, dlt in -1.0f64..1.0) {
            let d = NearlyUnstableDesign::constant(0.5, -0.5, g, dlt).unwrap();
            if let Ok(p) = d.params_at(m) {
                prop_assert!(((0.5 - p.alpha).abs() - g.abs() / m as f64).abs() < 1e-15);
                prop_assert!(p.q() < 1.0);
            }
        }
    }
}
