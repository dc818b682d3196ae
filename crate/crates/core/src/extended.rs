//! Extended real line `R ∪ {+∞}` used for functional values.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// A finite real or `+∞`. Never NaN and never `-∞`; every constructor
/// enforces this, so comparisons are total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    /// Wraps a finite value. Panics on NaN or infinities: those indicate a
    /// bug in the caller, not a representable functional value.
    pub fn finite(v: f64) -> Self {
        assert!(v.is_finite(), "ExtendedReal::finite called with {v}");
        ExtendedReal(v)
    }

    pub fn infinity() -> Self {
        ExtendedReal(f64::INFINITY)
    }

    /// Accepts a finite value or `+∞` (rejects NaN and `-∞`).
    pub fn from_f64(v: f64) -> Self {
        assert!(!v.is_nan() && v != f64::NEG_INFINITY, "invalid extended real {v}");
        ExtendedReal(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// Multiplies by a nonnegative finite weight (`0 * ∞ = ∞` is avoided by
    /// rejecting zero weights at construction sites).
    pub fn scale(self, w: f64) -> Self {
        assert!(w.is_finite() && w > 0.0, "scale weight must be positive, got {w}");
        ExtendedReal(self.0 * w)
    }

    pub fn min(self, other: Self) -> Self {
        if self.0 <= other.0 { self } else { other }
    }

    pub fn max(self, other: Self) -> Self {
        if self.0 >= other.0 { self } else { other }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        ExtendedReal(self.0 + rhs.0)
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Eq for ExtendedReal {}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        // Total by the no-NaN invariant.
        self.0.partial_cmp(&other.0).expect("ExtendedReal is never NaN")
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "+inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}
