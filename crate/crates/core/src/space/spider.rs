//! Metric spider: `k >= 2` half-lines (legs) glued at a common origin.
//!
//! This is an R-tree, hence CAT(0). Distance within one leg is the radial
//! difference; across legs the path passes through the origin. Points with
//! radius below `SPIDER_ORIGIN_EPS` are identified with the origin
//! regardless of their leg index.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::descriptor::{fmt_f64, CoordNode, Descriptor};
use crate::error::{Error, Result};
use crate::tolerances::SPIDER_ORIGIN_EPS;

use super::{Coords, ModelSpace, Space};

#[derive(Debug)]
pub struct MetricSpider {
    legs: usize,
}

impl MetricSpider {
    pub fn new(legs: usize) -> Result<Space> {
        if legs < 2 {
            return Err(Error::usage(format!("spider needs legs >= 2, got {legs}")));
        }
        Ok(Space::new(MetricSpider { legs }))
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    fn leg_r(&self, c: &Coords) -> (usize, f64) {
        match c {
            Coords::Spider { leg, r } => (*leg, *r),
            other => panic!("spider space got {other:?}"),
        }
    }
}

pub(super) fn build(d: &Descriptor) -> Result<Space> {
    d.expect_keys(&["kind", "legs"])?;
    MetricSpider::new(d.usize("legs")?)
}

fn at_origin(r: f64) -> bool {
    r < SPIDER_ORIGIN_EPS
}

impl ModelSpace for MetricSpider {
    fn kind(&self) -> &'static str {
        "spider"
    }

    fn descriptor(&self) -> String {
        format!("kind=spider,legs={}", self.legs)
    }

    fn validate(&self, c: &Coords) -> Result<()> {
        match c {
            Coords::Spider { leg, r } => {
                if *leg < 1 || *leg > self.legs {
                    return Err(Error::InvalidCoords(format!(
                        "spider leg {leg} outside 1..={}",
                        self.legs
                    )));
                }
                if !r.is_finite() || *r < 0.0 {
                    return Err(Error::InvalidCoords(format!("spider radius must be >= 0, got {r}")));
                }
                Ok(())
            }
            other => Err(Error::InvalidCoords(format!("expected spider coords, got {other:?}"))),
        }
    }

    fn distance(&self, a: &Coords, b: &Coords) -> f64 {
        let (l1, r1) = self.leg_r(a);
        let (l2, r2) = self.leg_r(b);
        if l1 == l2 || at_origin(r1) || at_origin(r2) {
            (r1 - r2).abs()
        } else {
            r1 + r2
        }
    }

    fn interpolate(&self, a: &Coords, b: &Coords, t: f64) -> Coords {
        let (l1, r1) = self.leg_r(a);
        let (l2, r2) = self.leg_r(b);
        if l1 == l2 || at_origin(r1) || at_origin(r2) {
            // Effective single-leg segment; pick the leg that carries mass.
            let leg = if at_origin(r1) { l2 } else { l1 };
            let r = r1 + t * (r2 - r1);
            Coords::Spider { leg, r: r.max(0.0) }
        } else {
            let total = r1 + r2;
            let s = t * total;
            if s <= r1 {
                Coords::Spider { leg: l1, r: r1 - s }
            } else {
                Coords::Spider { leg: l2, r: s - r1 }
            }
        }
    }

    fn base_point(&self) -> Coords {
        Coords::Spider { leg: 1, r: 0.0 }
    }

    fn sample_near(&self, anchor: &Coords, radius: f64, rng: &mut ChaCha8Rng) -> Coords {
        let (leg, r) = self.leg_r(anchor);
        let target: usize = rng.gen_range(1..=self.legs);
        let delta = rng.gen_range(-radius..=radius);
        let nr = if target == leg || at_origin(r) {
            (r + delta).abs()
        } else {
            // Crossing the origin: land on the other leg near it.
            delta.abs()
        };
        Coords::Spider { leg: target, r: nr }
    }

    fn coords_text(&self, c: &Coords) -> String {
        let (leg, r) = self.leg_r(c);
        format!("({leg} {})", fmt_f64(r))
    }

    fn coords_from_node(&self, node: &CoordNode) -> Result<Coords> {
        match node {
            CoordNode::Leaf(nums) if nums.len() == 2 => {
                let leg_f = nums[0];
                if leg_f.fract() != 0.0 || leg_f < 1.0 {
                    return Err(Error::InvalidCoords(format!(
                        "spider leg index must be a positive integer, got {leg_f}"
                    )));
                }
                let c = Coords::Spider { leg: leg_f as usize, r: nums[1] };
                self.validate(&c)?;
                Ok(c)
            }
            other => Err(Error::InvalidCoords(format!(
                "spider coordinates must be `(leg radius)`, got {other:?}"
            ))),
        }
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }

    fn segment_nearest(&self, a: &Coords, b: &Coords, x: &Coords) -> (f64, f64) {
        // In a metric tree the nearest point of [a, b] from x sits at
        // arc length (d(a,x) + d(a,b) - d(b,x)) / 2 from a.
        let len = self.distance(a, b);
        if len < 1e-15 {
            return (0.0, self.distance(a, x));
        }
        let m = (0.5 * (self.distance(a, x) + len - self.distance(b, x))).clamp(0.0, len);
        let t = m / len;
        let p = self.interpolate(a, b, t);
        (t, self.distance(x, &p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{distance, geodesic_point, GeodesicSegment};

    fn spider3() -> Space {
        MetricSpider::new(3).unwrap()
    }

    #[test]
    fn needs_two_legs() {
        assert!(MetricSpider::new(1).is_err());
        assert!(MetricSpider::new(2).is_ok());
    }

    #[test]
    fn tree_metric() {
        let s = spider3();
        let a = s.parse_point("(1 2)").unwrap();
        let b = s.parse_point("(1 0.5)").unwrap();
        let c = s.parse_point("(2 3)").unwrap();
        assert_eq!(distance(&a, &b).unwrap(), 1.5);
        assert_eq!(distance(&a, &c).unwrap(), 5.0);
    }

    #[test]
    fn origin_identified_across_legs() {
        let s = spider3();
        let o1 = s.parse_point("(1 0)").unwrap();
        let o2 = s.parse_point("(3 0)").unwrap();
        assert_eq!(distance(&o1, &o2).unwrap(), 0.0);
        let a = s.parse_point("(2 1.25)").unwrap();
        assert_eq!(distance(&o1, &a).unwrap(), 1.25);
        assert_eq!(distance(&o2, &a).unwrap(), 1.25);
    }

    #[test]
    fn cross_leg_geodesic_passes_origin() {
        // From (leg 1, r 2) to (leg 2, r 3): total length 5; at t = 0.6 the
        // path has covered 3, i.e. one unit past the origin onto leg 2.
        let s = spider3();
        let a = s.parse_point("(1 2)").unwrap();
        let b = s.parse_point("(2 3)").unwrap();
        let g = GeodesicSegment::new(a.clone(), b.clone()).unwrap();
        let p = geodesic_point(&g, 0.6).unwrap();
        assert_eq!(p.coords(), &Coords::Spider { leg: 2, r: 1.0 });
        let q = geodesic_point(&g, 0.4).unwrap();
        assert_eq!(q.coords(), &Coords::Spider { leg: 1, r: 0.0 });
        // Constant speed on both sides of the origin.
        for t in [0.1, 0.4, 0.6, 0.95] {
            let pt = geodesic_point(&g, t).unwrap();
            let da = distance(&a, &pt).unwrap();
            assert!((da - t * 5.0).abs() < 1e-12, "t={t}: {da}");
        }
    }

    #[test]
    fn leg_range_validated() {
        let s = spider3();
        assert!(s.parse_point("(4 1)").is_err());
        assert!(s.parse_point("(0 1)").is_err());
        assert!(s.parse_point("(1 -0.5)").is_err());
    }
}
