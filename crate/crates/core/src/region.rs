//! Closed convex regions: indicator-function domains and the sets whose
//! limits the set-convergence checks track.
//!
//! Four shapes cover the built-in geometries: geodesic intervals, metric
//! balls, sub-stars of a spider (a radius cap per selected leg), and
//! products of per-factor regions. Each is closed and geodesically convex
//! in its space, so the associated indicator function is proper closed
//! convex and metric projection onto the region is single-valued.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::descriptor::{fmt_f64, Descriptor};
use crate::error::{Error, Result};
use crate::space::{geodesic_point, require_same_space, Coords, GeodesicSegment, MetricSpider,
    Point, ProductSpace, Space};

/// Points within this metric distance of a region count as members.
/// Scaled by region size so large and small regions behave alike.
pub fn membership_tol(scale: f64) -> f64 {
    1e-9 * (1.0 + scale.abs())
}

#[derive(Clone, Debug)]
pub enum Region {
    /// The geodesic segment between two points.
    Interval(GeodesicSegment),
    /// A closed metric ball.
    Ball { center: Point, radius: f64 },
    /// On a spider: the union over selected legs of the segments from the
    /// origin out to a per-leg cap. Any two member points are joined by a
    /// geodesic running through the origin inside the set.
    SubStar { space: Space, legs: Vec<usize>, caps: Vec<f64> },
    /// A product of per-factor regions on a product space.
    Product { space: Space, parts: Vec<Region> },
}

impl Region {
    pub fn interval(from: Point, to: Point) -> Result<Region> {
        Ok(Region::Interval(GeodesicSegment::new(from, to)?))
    }

    pub fn ball(center: Point, radius: f64) -> Result<Region> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::usage(format!(
                "ball radius must be finite and nonnegative, got {radius}"
            )));
        }
        Ok(Region::Ball { center, radius })
    }

    pub fn substar(space: &Space, legs: Vec<usize>, caps: Vec<f64>) -> Result<Region> {
        let model = space
            .downcast::<MetricSpider>()
            .ok_or_else(|| Error::usage("substar regions live on spider spaces"))?;
        if legs.is_empty() || legs.len() != caps.len() {
            return Err(Error::usage("substar needs matching nonempty legs and caps"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &leg in &legs {
            if leg < 1 || leg > model.legs() {
                return Err(Error::usage(format!(
                    "substar leg {leg} outside 1..={}",
                    model.legs()
                )));
            }
            if !seen.insert(leg) {
                return Err(Error::usage(format!("substar leg {leg} listed twice")));
            }
        }
        for &cap in &caps {
            if !cap.is_finite() || cap < 0.0 {
                return Err(Error::usage(format!(
                    "substar caps must be finite and nonnegative, got {cap}"
                )));
            }
        }
        Ok(Region::SubStar { space: space.clone(), legs, caps })
    }

    pub fn product(space: &Space, parts: Vec<Region>) -> Result<Region> {
        let model = space
            .downcast::<ProductSpace>()
            .ok_or_else(|| Error::usage("product regions live on product spaces"))?;
        if parts.len() != model.factors().len() {
            return Err(Error::usage(format!(
                "product region needs {} parts, got {}",
                model.factors().len(),
                parts.len()
            )));
        }
        for (part, factor) in parts.iter().zip(model.factors()) {
            if !part.space().same_as(factor) {
                return Err(Error::SpaceMismatch {
                    expected: factor.descriptor(),
                    found: part.space().descriptor(),
                });
            }
        }
        Ok(Region::Product { space: space.clone(), parts })
    }

    pub fn space(&self) -> &Space {
        match self {
            Region::Interval(g) => g.space(),
            Region::Ball { center, .. } => center.space(),
            Region::SubStar { space, .. } | Region::Product { space, .. } => space,
        }
    }

    /// A size hint (roughly the diameter) used to scale tolerances and
    /// sampling radii.
    pub fn scale(&self) -> f64 {
        match self {
            Region::Interval(g) => g.length(),
            Region::Ball { radius, .. } => 2.0 * radius,
            Region::SubStar { caps, .. } => {
                let m = caps.iter().cloned().fold(0.0, f64::max);
                2.0 * m
            }
            Region::Product { parts, .. } => {
                parts.iter().map(|p| p.scale() * p.scale()).sum::<f64>().sqrt()
            }
        }
    }

    /// Metric distance from `x` to the region (0 inside).
    pub fn distance_to(&self, x: &Point) -> Result<f64> {
        require_same_space(self.space(), x.space())?;
        Ok(self.distance_to_coords(x.coords()))
    }

    /// Raw-coordinate distance for evaluation hot paths; the coordinates
    /// must belong to this region's space.
    pub(crate) fn distance_to_coords(&self, c: &Coords) -> f64 {
        match self {
            Region::Interval(g) => {
                let model = g.space().model();
                model.segment_nearest(g.start().coords(), g.end().coords(), c).1
            }
            Region::Ball { center, radius } => {
                let d = center.space().model().distance(center.coords(), c);
                (d - radius).max(0.0)
            }
            Region::SubStar { legs, caps, .. } => {
                let (leg, r) = spider_coords(c);
                match legs.iter().position(|&l| l == leg) {
                    // Off-leg points reach the set at the origin.
                    _ if r == 0.0 => 0.0,
                    Some(i) => (r - caps[i]).max(0.0),
                    None => r,
                }
            }
            Region::Product { parts, .. } => {
                let sub = match c {
                    Coords::Product(sub) => sub,
                    other => panic!("product region got {other:?}"),
                };
                let mut acc = 0.0;
                for (part, ci) in parts.iter().zip(sub) {
                    let d = part.distance_to_coords(ci);
                    acc += d * d;
                }
                acc.sqrt()
            }
        }
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        require_same_space(self.space(), x.space())?;
        Ok(self.contains_coords(x.coords()))
    }

    pub(crate) fn contains_coords(&self, c: &Coords) -> bool {
        self.distance_to_coords(c) <= membership_tol(self.scale())
    }

    /// Metric projection onto the region; the identity on members.
    pub fn project(&self, x: &Point) -> Result<Point> {
        require_same_space(self.space(), x.space())?;
        match self {
            Region::Interval(g) => {
                let model = g.space().model();
                let (t, _) = model.segment_nearest(g.start().coords(), g.end().coords(), x.coords());
                geodesic_point(g, t)
            }
            Region::Ball { center, radius } => {
                let d = crate::space::distance(center, x)?;
                if d <= *radius {
                    return Ok(x.clone());
                }
                let g = GeodesicSegment::new(x.clone(), center.clone())?;
                geodesic_point(&g, (d - radius) / d)
            }
            Region::SubStar { space, legs, caps } => {
                let (leg, r) = spider_coords(x.coords());
                match legs.iter().position(|&l| l == leg) {
                    _ if r == 0.0 => Ok(x.clone()),
                    Some(i) => space.point(Coords::Spider { leg, r: r.min(caps[i]) }),
                    None => space.point(Coords::Spider { leg: legs[0], r: 0.0 }),
                }
            }
            Region::Product { space, parts } => {
                let xs = split_product(x)?;
                let mut out = Vec::with_capacity(parts.len());
                for (part, xi) in parts.iter().zip(&xs) {
                    out.push(part.project(xi)?.coords().clone());
                }
                space.point(Coords::Product(out))
            }
        }
    }

    /// Draws a member point; coverage of the region, not uniformity, is
    /// the contract.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Point> {
        match self {
            Region::Interval(g) => geodesic_point(g, rng.gen_range(0.0..=1.0)),
            Region::Ball { center, radius } => {
                for _ in 0..16 {
                    let y = center.space().sample_near(center, *radius, rng);
                    if crate::space::distance(center, &y)? <= *radius {
                        return Ok(y);
                    }
                }
                let y = center.space().sample_near(center, *radius, rng);
                self.project(&y)
            }
            Region::SubStar { space, legs, caps } => {
                let i = rng.gen_range(0..legs.len());
                let r = rng.gen_range(0.0..=caps[i].max(0.0));
                space.point(Coords::Spider { leg: legs[i], r })
            }
            Region::Product { space, parts } => {
                let mut out = Vec::with_capacity(parts.len());
                for part in parts {
                    out.push(part.sample(rng)?.coords().clone());
                }
                space.point(Coords::Product(out))
            }
        }
    }

    /// Deterministic landmark points inside the region (segment endpoints,
    /// ball center, leg tips, ...); minimizer searches seed from these.
    pub fn anchor_points(&self) -> Vec<Point> {
        match self {
            Region::Interval(g) => {
                let mut pts = vec![g.start().clone(), g.end().clone()];
                if let Ok(mid) = geodesic_point(g, 0.5) {
                    pts.push(mid);
                }
                pts
            }
            Region::Ball { center, .. } => vec![center.clone()],
            Region::SubStar { space, legs, caps } => {
                let mut pts = Vec::with_capacity(2 * legs.len() + 1);
                if let Ok(o) = space.point(Coords::Spider { leg: legs[0], r: 0.0 }) {
                    pts.push(o);
                }
                for (&leg, &cap) in legs.iter().zip(caps) {
                    if let Ok(tip) = space.point(Coords::Spider { leg, r: cap }) {
                        pts.push(tip);
                    }
                    if let Ok(mid) = space.point(Coords::Spider { leg, r: 0.5 * cap }) {
                        pts.push(mid);
                    }
                }
                pts
            }
            Region::Product { space, parts } => {
                let lists: Vec<Vec<Point>> = parts.iter().map(|p| p.anchor_points()).collect();
                if lists.iter().any(|l| l.is_empty()) {
                    return Vec::new();
                }
                let combine = |coords: Vec<Coords>| space.point(Coords::Product(coords)).ok();
                let base: Vec<Coords> = lists.iter().map(|l| l[0].coords().clone()).collect();
                let mut pts = Vec::new();
                if let Some(p) = combine(base.clone()) {
                    pts.push(p);
                }
                // Vary one factor at a time to keep the set small.
                for (i, list) in lists.iter().enumerate() {
                    for a in &list[1..] {
                        let mut c = base.clone();
                        c[i] = a.coords().clone();
                        if let Some(p) = combine(c) {
                            pts.push(p);
                        }
                    }
                }
                pts
            }
        }
    }

    /// Canonical one-line descriptor; round-trips through
    /// [`Region::from_descriptor`] on the same space.
    pub fn descriptor(&self) -> String {
        match self {
            Region::Interval(g) => format!(
                "kind=interval,from={},to={}",
                g.start().coords_text(),
                g.end().coords_text()
            ),
            Region::Ball { center, radius } => format!(
                "kind=ball,center={},radius={}",
                center.coords_text(),
                fmt_f64(*radius)
            ),
            Region::SubStar { legs, caps, .. } => {
                let legs: Vec<String> = legs.iter().map(|l| l.to_string()).collect();
                let caps: Vec<String> = caps.iter().map(|c| fmt_f64(*c)).collect();
                format!("kind=substar,legs={},caps={}", legs.join("|"), caps.join("|"))
            }
            Region::Product { parts, .. } => {
                let body: Vec<String> = parts.iter().map(|p| p.descriptor()).collect();
                format!("kind=product,parts=[{}]", body.join(";"))
            }
        }
    }

    pub fn from_descriptor(space: &Space, text: &str) -> Result<Region> {
        let d = Descriptor::parse(text)?;
        match d.atom("kind")? {
            "interval" => {
                d.expect_keys(&["kind", "from", "to"])?;
                let from = space.parse_point(d.group("from")?)?;
                let to = space.parse_point(d.group("to")?)?;
                Region::interval(from, to)
            }
            "ball" => {
                d.expect_keys(&["kind", "center", "radius"])?;
                let center = space.parse_point(d.group("center")?)?;
                Region::ball(center, d.f64("radius")?)
            }
            "substar" => {
                d.expect_keys(&["kind", "legs", "caps"])?;
                Region::substar(space, d.usize_bar_list("legs")?, d.f64_bar_list("caps")?)
            }
            "product" => {
                d.expect_keys(&["kind", "parts"])?;
                let model = space
                    .downcast::<ProductSpace>()
                    .ok_or_else(|| Error::usage("product regions live on product spaces"))?;
                let texts = d.list("parts")?;
                if texts.len() != model.factors().len() {
                    return Err(Error::descriptor(format!(
                        "product region needs {} parts, got {}",
                        model.factors().len(),
                        texts.len()
                    )));
                }
                let mut parts = Vec::with_capacity(texts.len());
                for (t, factor) in texts.iter().zip(model.factors()) {
                    parts.push(Region::from_descriptor(factor, t)?);
                }
                Region::product(space, parts)
            }
            other => Err(Error::descriptor(format!(
                "unknown region kind `{other}` (known: ball, interval, product, substar)"
            ))),
        }
    }

    /// Sampled subset test: every drawn member of `self` must lie in
    /// `other` (up to the membership slack).
    pub fn sampled_subset_of(&self, other: &Region, samples: usize, seed: u64) -> Result<bool> {
        require_same_space(self.space(), other.space())?;
        let mut rng = crate::minimize::seeded_rng(seed, &[0x5e7]);
        for p in self.anchor_points() {
            if !other.contains(&p)? {
                return Ok(false);
            }
        }
        for _ in 0..samples {
            let p = self.sample(&mut rng)?;
            if !other.contains(&p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Sampled one-sided Hausdorff gap: `sup_{x in self} d(x, other)`
    /// approximated over anchors plus `samples` draws.
    pub fn hausdorff_gap(&self, other: &Region, samples: usize, seed: u64) -> Result<f64> {
        require_same_space(self.space(), other.space())?;
        let mut rng = crate::minimize::seeded_rng(seed, &[0x9a9]);
        let mut worst: f64 = 0.0;
        for p in self.anchor_points() {
            worst = worst.max(other.distance_to(&p)?);
        }
        for _ in 0..samples {
            let p = self.sample(&mut rng)?;
            worst = worst.max(other.distance_to(&p)?);
        }
        Ok(worst)
    }
}

fn spider_coords(c: &Coords) -> (usize, f64) {
    match c {
        Coords::Spider { leg, r } => (*leg, *r),
        other => panic!("substar region got {other:?}"),
    }
}

fn split_product(x: &Point) -> Result<Vec<Point>> {
    let model = x
        .space()
        .downcast::<ProductSpace>()
        .ok_or_else(|| Error::usage("expected a product-space point"))?;
    let parts = match x.coords() {
        Coords::Product(parts) => parts,
        other => return Err(Error::InvalidCoords(format!("expected product coords, got {other:?}"))),
    };
    model
        .factors()
        .iter()
        .zip(parts)
        .map(|(f, c)| f.point(c.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn line() -> Space {
        Space::from_descriptor("kind=euclidean,dim=1").unwrap()
    }

    fn spider3() -> Space {
        Space::from_descriptor("kind=spider,legs=3").unwrap()
    }

    #[test]
    fn interval_membership_and_projection() {
        let e = line();
        let r = Region::interval(e.parse_point("(-1)").unwrap(), e.parse_point("(2)").unwrap()).unwrap();
        assert!(r.contains(&e.parse_point("(0.5)").unwrap()).unwrap());
        assert!(!r.contains(&e.parse_point("(2.1)").unwrap()).unwrap());
        let p = r.project(&e.parse_point("(5)").unwrap()).unwrap();
        assert_eq!(p.coords(), &Coords::Euclidean(vec![2.0]));
        assert!((r.distance_to(&e.parse_point("(5)").unwrap()).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn planar_segment_projection_is_orthogonal() {
        let e2 = Space::from_descriptor("kind=euclidean,dim=2").unwrap();
        let r = Region::interval(e2.parse_point("(0 0)").unwrap(), e2.parse_point("(4 0)").unwrap())
            .unwrap();
        let x = e2.parse_point("(1 3)").unwrap();
        let p = r.project(&x).unwrap();
        assert_eq!(p.coords(), &Coords::Euclidean(vec![1.0, 0.0]));
        assert!((r.distance_to(&x).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ball_projection_lands_on_sphere() {
        let e2 = Space::from_descriptor("kind=euclidean,dim=2").unwrap();
        let c = e2.parse_point("(0 0)").unwrap();
        let r = Region::ball(c.clone(), 1.0).unwrap();
        let x = e2.parse_point("(3 4)").unwrap();
        let p = r.project(&x).unwrap();
        let d = crate::space::distance(&c, &p).unwrap();
        assert!((d - 1.0).abs() < 1e-12, "projected radius {d}");
        assert!(r.contains(&e2.parse_point("(0.3 -0.4)").unwrap()).unwrap());
    }

    #[test]
    fn substar_distances_cross_the_origin() {
        let s = spider3();
        let r = Region::substar(&s, vec![1, 2], vec![2.0, 1.0]).unwrap();
        // On an allowed leg beyond its cap.
        let far = s.parse_point("(2 3)").unwrap();
        assert!((r.distance_to(&far).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.project(&far).unwrap().coords(), &Coords::Spider { leg: 2, r: 1.0 });
        // On a leg outside the set: nearest member is the origin.
        let off = s.parse_point("(3 0.5)").unwrap();
        assert!((r.distance_to(&off).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(r.project(&off).unwrap().coords(), &Coords::Spider { leg: 1, r: 0.0 });
    }

    #[test]
    fn product_region_round_trips_and_projects() {
        let s = Space::from_descriptor(
            "kind=product,factors=[kind=euclidean,dim=1;kind=spider,legs=3]",
        )
        .unwrap();
        let text = "kind=product,parts=[kind=interval,from=(0),to=(1);kind=substar,legs=1|2,caps=1|1]";
        let r = Region::from_descriptor(&s, text).unwrap();
        let back = Region::from_descriptor(&s, &r.descriptor()).unwrap();
        assert_eq!(back.descriptor(), r.descriptor());
        let x = s.parse_point("((2)(3 0.25))").unwrap();
        let p = r.project(&x).unwrap();
        assert_eq!(p.coords_text(), "((1)(1 0))");
        assert!(r.contains(&p).unwrap());
    }

    #[test]
    fn samples_and_anchors_stay_inside() {
        let s = spider3();
        let r = Region::substar(&s, vec![1, 3], vec![2.0, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = r.sample(&mut rng).unwrap();
            assert!(r.contains(&p).unwrap(), "sample {p} escaped");
        }
        for a in r.anchor_points() {
            assert!(r.contains(&a).unwrap(), "anchor {a} escaped");
        }
    }

    #[test]
    fn sampled_set_relations() {
        let e = line();
        let inner =
            Region::interval(e.parse_point("(0)").unwrap(), e.parse_point("(1)").unwrap()).unwrap();
        let outer =
            Region::interval(e.parse_point("(-1)").unwrap(), e.parse_point("(2)").unwrap()).unwrap();
        assert!(inner.sampled_subset_of(&outer, 40, 11).unwrap());
        assert!(!outer.sampled_subset_of(&inner, 40, 11).unwrap());
        let gap = outer.hausdorff_gap(&inner, 200, 11).unwrap();
        assert!(gap > 0.9 && gap <= 1.0 + 1e-9, "gap {gap}");
    }
}
