//! Device layouts.
//!
//! Gateways always occupy the first `num_gateways` indices of
//! [`Scenario::positions`]; every other device is a UE.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point2D {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2D { x, y }
    }
}

impl From<Point2D> for [f64; 2] {
    fn from(p: Point2D) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SquareUniform,
    Line,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub num_gateways: usize,
    pub positions: Vec<Point2D>,
    /// Square side for [`ScenarioKind::SquareUniform`], UE line extent for
    /// [`ScenarioKind::Line`].
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "extent_m")]
    pub extent: Option<f64>,
}

impl Scenario {
    pub fn explicit(positions: Vec<Point2D>, num_gateways: usize) -> Result<Self> {
        let s = Scenario {
            kind: ScenarioKind::Explicit,
            num_gateways,
            positions,
            extent: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if n == 0 {
            return Err(invalid("scenario has no devices"));
        }
        if self.num_gateways == 0 || self.num_gateways > n {
            return Err(invalid(format!(
                "num_gateways must be in 1..={n}, got {}",
                self.num_gateways
            )));
        }
        if let Some(p) = self.positions.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(invalid(format!("non-finite position ({}, {})", p.x, p.y)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn num_ues(&self) -> usize {
        self.positions.len() - self.num_gateways
    }

    pub fn is_gateway(&self, index: usize) -> bool {
        index < self.num_gateways
    }

    pub fn gateways(&self) -> &[Point2D] {
        &self.positions[..self.num_gateways]
    }

    pub fn ue_indices(&self) -> std::ops::Range<usize> {
        self.num_gateways..self.positions.len()
    }

    /// Replaces the position of device `index`, e.g. to pin a gateway at the
    /// center of the area.
    pub fn with_position(mut self, index: usize, p: Point2D) -> Result<Self> {
        if index >= self.positions.len() {
            return Err(crate::Error::IndexOutOfRange {
                index,
                len: self.positions.len(),
            });
        }
        self.positions[index] = p;
        Ok(self)
    }
}

/// Drops `n` devices independently and uniformly in the square
/// `[-side/2, side/2]²`.
pub fn place_uniform_square<R: Rng + ?Sized>(
    n: usize,
    num_gateways: usize,
    side: f64,
    rng: &mut R,
) -> Result<Scenario> {
    if n == 0 {
        return Err(invalid("need at least one device"));
    }
    if num_gateways == 0 || num_gateways > n {
        return Err(invalid(format!(
            "num_gateways must be in 1..={n}, got {num_gateways}"
        )));
    }
    if !(side > 0.0 && side.is_finite()) {
        return Err(invalid(format!("square side must be positive, got {side}")));
    }
    let half = side / 2.0;
    let positions = (0..n)
        .map(|_| Point2D::new(rng.gen_range(-half..=half), rng.gen_range(-half..=half)))
        .collect();
    Ok(Scenario {
        kind: ScenarioKind::SquareUniform,
        num_gateways,
        positions,
        extent: Some(side),
    })
}

/// Two gateways at `(0, ±gateway_offset)` and `num_ues` UEs on the same
/// vertical line at `(0, u)`, `u ~ U[-extent/2, extent/2]`.
pub fn place_line<R: Rng + ?Sized>(
    num_ues: usize,
    gateway_offset: f64,
    extent: f64,
    rng: &mut R,
) -> Result<Scenario> {
    if num_ues == 0 {
        return Err(invalid("need at least one UE"));
    }
    if !(gateway_offset > 0.0 && gateway_offset.is_finite()) {
        return Err(invalid(format!(
            "gateway offset must be positive, got {gateway_offset}"
        )));
    }
    if !(extent >= 0.0 && extent.is_finite()) {
        return Err(invalid(format!("line extent must be non-negative, got {extent}")));
    }
    let half = extent / 2.0;
    let mut positions = Vec::with_capacity(num_ues + 2);
    positions.push(Point2D::new(0.0, gateway_offset));
    positions.push(Point2D::new(0.0, -gateway_offset));
    for _ in 0..num_ues {
        let u = if half > 0.0 { rng.gen_range(-half..=half) } else { 0.0 };
        positions.push(Point2D::new(0.0, u));
    }
    Ok(Scenario {
        kind: ScenarioKind::Line,
        num_gateways: 2,
        positions,
        extent: Some(extent),
    })
}

/// Symmetric row-major `N×N` matrix of Euclidean distances.
pub fn distance_matrix(s: &Scenario) -> Vec<f64> {
    let n = s.positions.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = s.positions[i].distance(&s.positions[j]);
            d[i * n + j] = dij;
            d[j * n + i] = dij;
        }
    }
    d
}
