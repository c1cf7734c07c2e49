use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[a, b]` with `a < b`, both finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportInterval {
    a: f64,
    b: f64,
}

impl SupportInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    /// The reference interval `[-1, 1]`.
    pub const fn unit() -> Self {
        Self { a: -1.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn contains_open(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }

    /// Affine map onto `[-1, 1]`.
    pub fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    /// Inverse of [`to_unit`](Self::to_unit).
    pub fn from_unit(&self, s: f64) -> f64 {
        self.center() + self.half_width() * s
    }
}
