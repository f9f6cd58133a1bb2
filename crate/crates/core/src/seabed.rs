//! Sand-ripple gating of the detection rate.
//!
//! The survey rectangle is split along its rising diagonal into a clean
//! triangle and a rippled triangle. Inside the rippled part a target only
//! counts as ensonified while the vehicle heads across the ripple crests;
//! [`RippleField::dom_weight`] multiplies the detection rate accordingly.

use crate::error::{Error, Result};
use crate::scalar::{lit, wrap_angle, Real};
use crate::sensor::Target;
use serde::{Deserialize, Serialize};

/// Axis-aligned survey rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain<T> {
    pub lo: [T; 2],
    pub hi: [T; 2],
}

impl<T: Real> Domain<T> {
    pub fn new(lo: [T; 2], hi: [T; 2]) -> Result<Self> {
        let d = Self { lo, hi };
        d.validate()?;
        Ok(d)
    }

    /// The reference square `[5, 25]^2`.
    pub fn reference() -> Self {
        Self {
            lo: [lit(5.0); 2],
            hi: [lit(25.0); 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.lo.iter().chain(&self.hi).all(|v| v.is_finite());
        if !finite || !(self.lo[0] < self.hi[0] && self.lo[1] < self.hi[1]) {
            return Err(Error::invalid(
                "domain",
                format!(
                    "degenerate rectangle [{}, {}] x [{}, {}]",
                    self.lo[0], self.hi[0], self.lo[1], self.hi[1]
                ),
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> T {
        self.hi[0] - self.lo[0]
    }

    pub fn height(&self) -> T {
        self.hi[1] - self.lo[1]
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> [T; 2] {
        let two = lit::<T>(2.0);
        [(self.lo[0] + self.hi[0]) / two, (self.lo[1] + self.hi[1]) / two]
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        x >= self.lo[0] && x <= self.hi[0] && y >= self.lo[1] && y <= self.hi[1]
    }

    /// Distance from a point to the rectangle, zero inside.
    pub fn outside_distance(&self, x: T, y: T) -> T {
        let dx = (self.lo[0] - x).max(x - self.hi[0]).max(T::zero());
        let dy = (self.lo[1] - y).max(y - self.hi[1]).max(T::zero());
        dx.hypot(dy)
    }

    /// Every coordinate multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            lo: [self.lo[0] * s, self.lo[1] * s],
            hi: [self.hi[0] * s, self.hi[1] * s],
        }
    }
}

/// Which triangle of the rectangle carries ripples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RippleSide {
    /// Above the rising diagonal (`y > x` on a square).
    #[default]
    UpperLeft,
    LowerRight,
}

/// Domain-weight formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DomForm {
    /// `rect * (ripple * S + (1 - S))`: a partition of unity between the
    /// rippled and clean triangles.
    #[default]
    PartitionOfUnity,
    /// The printed two-bracket sum, whose second bracket cancels the first
    /// and goes negative. Comparison only.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RippleField<T> {
    pub domain: Domain<T>,
    /// Crest orientation, rad. Headings perpendicular to it are favoured.
    pub ripple_angle: T,
    /// Slope of the tanh edges, 1/m.
    pub edge_sharpness: T,
    /// Angular width of each heading lobe, rad.
    pub lobe_width: T,
    pub side: RippleSide,
    pub form: DomForm,
}

/// Target-only factors of the domain weight: `dom = base + ripple * gain(heading)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetWeights<T> {
    pub base: T,
    pub ripple: T,
}

impl<T: Real> RippleField<T> {
    /// Ripples at 135 degrees in the upper-left half of `domain`, edge
    /// slope 30 and lobe width 0.1 rad.
    pub fn reference(domain: Domain<T>) -> Self {
        Self {
            domain,
            ripple_angle: lit(0.75 * std::f64::consts::PI),
            edge_sharpness: lit(30.0),
            lobe_width: lit(0.1),
            side: RippleSide::UpperLeft,
            form: DomForm::PartitionOfUnity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if !(self.edge_sharpness > T::zero() && self.edge_sharpness.is_finite()) {
            return Err(Error::invalid("edge_sharpness", "must be positive"));
        }
        if !(self.lobe_width > T::zero() && self.lobe_width.is_finite()) {
            return Err(Error::invalid("lobe_width", "must be positive"));
        }
        if !self.ripple_angle.is_finite() {
            return Err(Error::invalid("ripple_angle", "must be finite"));
        }
        Ok(())
    }

    /// `(tanh(k(v - lo)) - tanh(k(v - hi))) / 2`
    #[inline]
    fn window(&self, v: T, lo: T, hi: T) -> T {
        let k = self.edge_sharpness;
        ((k * (v - lo)).tanh() - (k * (v - hi)).tanh()) / lit(2.0)
    }

    /// Signed offset above the rising diagonal, in y units.
    #[inline]
    fn diagonal_offset(&self, x: T, y: T) -> T {
        let d = &self.domain;
        (y - d.lo[1]) - (x - d.lo[0]) * d.height() / d.width()
    }

    /// Smooth indicator of the rectangle.
    pub fn soft_rect(&self, x: T, y: T) -> T {
        let d = &self.domain;
        self.window(x, d.lo[0], d.hi[0]) * self.window(y, d.lo[1], d.hi[1])
    }

    /// Smooth indicator of the rippled triangle, exactly 1/2 on the diagonal.
    pub fn triangle_blend(&self, x: T, y: T) -> T {
        let off = self.diagonal_offset(x, y);
        let signed = match self.side {
            RippleSide::UpperLeft => off,
            RippleSide::LowerRight => -off,
        };
        ((self.edge_sharpness * signed).tanh() + T::one()) / lit(2.0)
    }

    /// Sum of four Gaussian heading lobes centred on `pi/4 - k pi`,
    /// `k = -1..=2`. Headings are taken as given (not wrapped).
    pub fn ripple_gain(&self, heading: T) -> T {
        let pi = T::PI();
        let q = pi / lit(4.0);
        let two = lit::<T>(2.0);
        (-1..=2)
            .map(|k| {
                let z = (heading - q + pi * lit(k as f64)) / self.lobe_width;
                (-(z * z) / two).exp()
            })
            .fold(T::zero(), |a, b| a + b)
    }

    /// Ripple gain for a vehicle heading, with the heading rotated for the
    /// configured crest angle and wrapped into `(-pi, pi]`.
    pub fn heading_gain(&self, heading: T) -> T {
        let reference = lit::<T>(0.75) * T::PI();
        self.ripple_gain(wrap_angle(heading - (self.ripple_angle - reference)))
    }

    /// Parts of the weight that depend only on the target position.
    pub fn target_weights(&self, x: T, y: T) -> TargetWeights<T> {
        match self.form {
            DomForm::PartitionOfUnity => {
                let rect = self.soft_rect(x, y);
                let s = self.triangle_blend(x, y);
                TargetWeights {
                    base: rect * (T::one() - s),
                    ripple: rect * s,
                }
            }
            DomForm::Literal => {
                let d = &self.domain;
                let k = self.edge_sharpness;
                let two = lit::<T>(2.0);
                let wx = self.window(x, d.lo[0], d.hi[0]);
                let off = match self.side {
                    RippleSide::UpperLeft => self.diagonal_offset(x, y),
                    RippleSide::LowerRight => -self.diagonal_offset(x, y),
                };
                let top = (k * (y - d.hi[1])).tanh();
                let diag = (k * off).tanh();
                TargetWeights {
                    base: wx * (top - diag) / two,
                    ripple: wx * (diag - top) / two,
                }
            }
        }
    }

    /// Weight applied to the detection rate of a target at `(x, y)` seen by
    /// a vehicle with the given heading.
    pub fn dom_weight(&self, x: T, y: T, heading: T) -> T {
        let w = self.target_weights(x, y);
        w.base + w.ripple * self.heading_gain(heading)
    }

    pub fn dom_weight_at(&self, target: &Target<T>, heading: T) -> T {
        self.dom_weight(target.x, target.y, heading)
    }
}
