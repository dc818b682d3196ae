//! Hyperbolic upper half-plane `{(x, y) : y > 0}` with metric
//! `ds^2 = (dx^2 + dy^2) / y^2` (curvature -1, hence CAT(0)).
//!
//! Distance uses the closed form
//! `d = acosh(1 + ((dx)^2 + (dy)^2) / (2 y1 y2))`; tests cross-validate it
//! against a quadrature of the geodesic length integral, which is treated
//! as the oracle of record.
//!
//! Geodesics are vertical rays or semicircles centered on the axis. Both
//! are parameterized by arc length through `u = ln(tan(theta/2))`, which is
//! an isometry of the geodesic onto the real line.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::descriptor::{fmt_f64, CoordNode, Descriptor};
use crate::error::{Error, Result};

use super::{Coords, ModelSpace, Space};

/// Pairs with relative horizontal separation below this are treated as
/// lying on a vertical geodesic; the induced position error is below every
/// tolerance in the library, while keeping the semicircle radius bounded.
const VERTICAL_EPS: f64 = 1e-12;

#[derive(Debug)]
pub struct HalfPlane;

impl HalfPlane {
    pub fn space() -> Space {
        Space::new(HalfPlane)
    }

    fn xy(&self, c: &Coords) -> (f64, f64) {
        match c {
            Coords::HalfPlane { x, y } => (*x, *y),
            other => panic!("halfplane space got {other:?}"),
        }
    }
}

pub(super) fn build(d: &Descriptor) -> Result<Space> {
    d.expect_keys(&["kind"])?;
    Ok(HalfPlane::space())
}

/// `acosh(1 + q)` computed without cancellation for small `q >= 0`.
fn acosh1p(q: f64) -> f64 {
    debug_assert!(q >= -1e-15, "acosh1p got q = {q}");
    let q = q.max(0.0);
    (q + (q * (q + 2.0)).sqrt()).ln_1p()
}

/// Geodesic circle through two points: center on the axis and radius.
fn circle(x1: f64, y1: f64, x2: f64, y2: f64) -> (f64, f64) {
    let c = (x2 * x2 + y2 * y2 - x1 * x1 - y1 * y1) / (2.0 * (x2 - x1));
    let r = (x1 - c).hypot(y1);
    (c, r)
}

/// `u = ln(tan(theta/2))` for the point at signed horizontal offset
/// `dx = x - c` on the circle of radius `r`. Uses whichever of the two
/// algebraic forms avoids cancellation; `(r - dx)(r + dx) = y^2` supplies
/// the other factor stably.
fn log_tan_half(dx: f64, y: f64, r: f64) -> f64 {
    if dx >= 0.0 {
        let rp = r + dx;
        (y / rp).ln()
    } else {
        let rm = r - dx;
        (rm / y).ln()
    }
}

impl ModelSpace for HalfPlane {
    fn kind(&self) -> &'static str {
        "halfplane"
    }

    fn descriptor(&self) -> String {
        "kind=halfplane".into()
    }

    fn validate(&self, c: &Coords) -> Result<()> {
        match c {
            Coords::HalfPlane { x, y } if x.is_finite() && y.is_finite() && *y > 0.0 => Ok(()),
            Coords::HalfPlane { x, y } => Err(Error::InvalidCoords(format!(
                "halfplane needs finite x and y > 0, got ({x}, {y})"
            ))),
            other => Err(Error::InvalidCoords(format!("expected halfplane coords, got {other:?}"))),
        }
    }

    fn distance(&self, a: &Coords, b: &Coords) -> f64 {
        let (x1, y1) = self.xy(a);
        let (x2, y2) = self.xy(b);
        let dx = x2 - x1;
        let dy = y2 - y1;
        acosh1p((dx * dx + dy * dy) / (2.0 * y1 * y2))
    }

    fn interpolate(&self, a: &Coords, b: &Coords, t: f64) -> Coords {
        let (x1, y1) = self.xy(a);
        let (x2, y2) = self.xy(b);
        let scale = x1.abs().max(x2.abs()).max(y1).max(y2).max(1.0);
        if (x2 - x1).abs() <= VERTICAL_EPS * scale {
            // Vertical geodesic: arc length is ln y, so interpolate the log.
            let y = y1 * (y2 / y1).powf(t);
            Coords::HalfPlane { x: x1, y }
        } else {
            let (c, r) = circle(x1, y1, x2, y2);
            let u1 = log_tan_half(x1 - c, y1, r);
            let u2 = log_tan_half(x2 - c, y2, r);
            let u = u1 + t * (u2 - u1);
            // tan(theta/2) = e^u gives cos(theta) = -tanh(u), sin = sech(u).
            let x = c - r * u.tanh();
            let y = r / u.cosh();
            Coords::HalfPlane { x, y }
        }
    }

    fn base_point(&self) -> Coords {
        Coords::HalfPlane { x: 0.0, y: 1.0 }
    }

    fn sample_near(&self, anchor: &Coords, radius: f64, rng: &mut ChaCha8Rng) -> Coords {
        let (x, y) = self.xy(anchor);
        // Horizontal offsets scale with height to approximate metric balls.
        let dx = rng.gen_range(-radius..=radius) * y;
        let ly = rng.gen_range(-radius..=radius);
        Coords::HalfPlane { x: x + dx, y: y * ly.exp() }
    }

    fn coords_text(&self, c: &Coords) -> String {
        let (x, y) = self.xy(c);
        format!("({} {})", fmt_f64(x), fmt_f64(y))
    }

    fn coords_from_node(&self, node: &CoordNode) -> Result<Coords> {
        match node {
            CoordNode::Leaf(nums) if nums.len() == 2 => {
                let c = Coords::HalfPlane { x: nums[0], y: nums[1] };
                self.validate(&c)?;
                Ok(c)
            }
            other => Err(Error::InvalidCoords(format!(
                "halfplane coordinates must be two numbers, got {other:?}"
            ))),
        }
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}
