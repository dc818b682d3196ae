//! Model geometries and metric-space operations.
//!
//! Every geometry implements [`ModelSpace`] behind a trait object and is
//! registered by kind name, so spaces are selected at runtime from
//! structured-text descriptors (`kind=euclidean,dim=2`, `kind=spider,legs=3`,
//! ...). All four built-in models are complete CAT(0) spaces with unique
//! geodesics, which the comparison-triangle check probes numerically.

mod euclidean;
mod halfplane;
mod product;
mod spider;

pub use euclidean::Euclidean;
pub use halfplane::HalfPlane;
pub use product::ProductSpace;
pub use spider::MetricSpider;

use std::any::Any;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::descriptor::{CoordNode, Descriptor};
use crate::error::{Error, Result};
use crate::minimize::{line_minimize, mix_seed};
use crate::tolerances::{N_MAX, N_MIN, TOL_1D, TOL_CMP, TOL_SEQ};
use crate::verdict::{Verdict, Witness};

/// Coordinates of a point; the variant must match the owning space's kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Coords {
    Euclidean(Vec<f64>),
    HalfPlane { x: f64, y: f64 },
    /// Leg index is 1-based; radius is nonnegative.
    Spider { leg: usize, r: f64 },
    Product(Vec<Coords>),
}

/// A model geometry. Implementations work on raw [`Coords`] that have been
/// validated for this space; `Point` and the free functions below perform
/// the validation at the boundary.
pub trait ModelSpace: fmt::Debug + Send + Sync {
    /// Registry name (`euclidean`, `halfplane`, `spider`, `product`).
    fn kind(&self) -> &'static str;

    /// Canonical one-line descriptor; two spaces are equal iff these match.
    fn descriptor(&self) -> String;

    fn validate(&self, c: &Coords) -> Result<()>;

    fn distance(&self, a: &Coords, b: &Coords) -> f64;

    /// Constant-speed geodesic: `t` in `[0,1]`, endpoint-exact at 0 and 1.
    fn interpolate(&self, a: &Coords, b: &Coords, t: f64) -> Coords;

    /// A fixed reference point (used for sampling and the `abs` functional).
    fn base_point(&self) -> Coords;

    /// Draws a point roughly within the given metric radius of `anchor`.
    /// Coverage, not exact uniformity, is the contract.
    fn sample_near(&self, anchor: &Coords, radius: f64, rng: &mut ChaCha8Rng) -> Coords;

    fn coords_text(&self, c: &Coords) -> String;

    fn coords_from_node(&self, node: &CoordNode) -> Result<Coords>;

    /// Concrete model access for callers that need model parameters
    /// (dimension, leg count, factor list).
    fn as_any(&self) -> &dyn Any;

    /// Parameter and distance of the nearest point of the segment
    /// `[a, b]` from `x`. The distance along a segment is convex in the
    /// parameter on a CAT(0) space, so the default golden-section search
    /// is always valid; models with closed forms override it.
    fn segment_nearest(&self, a: &Coords, b: &Coords, x: &Coords) -> (f64, f64) {
        let len = self.distance(a, b);
        if len < 1e-15 {
            return (0.0, self.distance(a, x));
        }
        let mut obj = |t: f64| {
            let p = self.interpolate(a, b, t.clamp(0.0, 1.0));
            self.distance(x, &p)
        };
        let m = line_minimize(&mut obj, 0.0, 1.0, TOL_1D);
        let t = m.t.clamp(0.0, 1.0);
        let p = self.interpolate(a, b, t);
        (t, self.distance(x, &p))
    }
}

/// A runtime-selected geometry.
#[derive(Clone)]
pub struct Space(Arc<dyn ModelSpace>);

impl Space {
    pub fn new(model: impl ModelSpace + 'static) -> Self {
        Space(Arc::new(model))
    }

    pub fn kind(&self) -> &'static str {
        self.0.kind()
    }

    pub fn descriptor(&self) -> String {
        self.0.descriptor()
    }

    pub fn model(&self) -> &dyn ModelSpace {
        self.0.as_ref()
    }

    /// Typed view of the underlying model, e.g.
    /// `space.downcast::<ProductSpace>()`.
    pub fn downcast<T: 'static>(&self) -> Option<&T> {
        self.0.as_any().downcast_ref::<T>()
    }

    pub fn same_as(&self, other: &Space) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.descriptor() == other.descriptor()
    }

    /// Builds a space from a one-line descriptor using the built-in registry.
    pub fn from_descriptor(text: &str) -> Result<Space> {
        SpaceRegistry::builtin().build(text)
    }

    pub fn point(&self, coords: Coords) -> Result<Point> {
        self.0.validate(&coords)?;
        Ok(Point { space: self.clone(), coords })
    }

    /// Parses coordinate text such as `(0 1)` or `((1)(2 0.5))`.
    pub fn parse_point(&self, text: &str) -> Result<Point> {
        let node = crate::descriptor::parse_coord_text(text)?;
        let coords = self.0.coords_from_node(&node)?;
        self.point(coords)
    }

    pub fn base_point(&self) -> Point {
        Point { space: self.clone(), coords: self.0.base_point() }
    }

    pub(crate) fn distance_coords(&self, a: &Coords, b: &Coords) -> f64 {
        self.0.distance(a, b)
    }

    pub(crate) fn interpolate_coords(&self, a: &Coords, b: &Coords, t: f64) -> Coords {
        self.0.interpolate(a, b, t)
    }

    pub fn sample_near(&self, anchor: &Point, radius: f64, rng: &mut ChaCha8Rng) -> Point {
        let coords = self.0.sample_near(&anchor.coords, radius, rng);
        Point { space: self.clone(), coords }
    }
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Space({})", self.descriptor())
    }
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// A validated point of a specific space.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    space: Space,
    coords: Coords,
}

impl Point {
    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    /// Bare coordinate text, e.g. `(0 1)`.
    pub fn coords_text(&self) -> String {
        self.space.model().coords_text(&self.coords)
    }

    /// Space-tagged serialization, round-trip stable.
    pub fn tagged_text(&self) -> String {
        format!("{} {}", self.space.descriptor(), self.coords_text())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.coords_text())
    }
}

pub(crate) fn require_same_space(a: &Space, b: &Space) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch { expected: a.descriptor(), found: b.descriptor() })
    }
}

/// A directed geodesic segment between two points of one space.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSegment {
    start: Point,
    end: Point,
}

impl GeodesicSegment {
    pub fn new(start: Point, end: Point) -> Result<Self> {
        require_same_space(start.space(), end.space())?;
        Ok(GeodesicSegment { start, end })
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn end(&self) -> &Point {
        &self.end
    }

    pub fn space(&self) -> &Space {
        self.start.space()
    }

    pub fn length(&self) -> f64 {
        self.space().distance_coords(self.start.coords(), self.end.coords())
    }
}

/// Metric distance between two points of the same space.
pub fn distance(a: &Point, b: &Point) -> Result<f64> {
    require_same_space(a.space(), b.space())?;
    Ok(a.space().distance_coords(a.coords(), b.coords()))
}

/// Point at parameter `t` of the constant-speed geodesic, `t` in `[0,1]`.
pub fn geodesic_point(g: &GeodesicSegment, t: f64) -> Result<Point> {
    if !(0.0..=1.0).contains(&t) || t.is_nan() {
        return Err(Error::usage(format!("geodesic parameter t={t} outside [0,1]")));
    }
    if t == 0.0 {
        return Ok(g.start().clone());
    }
    if t == 1.0 {
        return Ok(g.end().clone());
    }
    let coords = g.space().interpolate_coords(g.start().coords(), g.end().coords(), t);
    Ok(Point { space: g.space().clone(), coords })
}

/// Metric projection of a point onto a geodesic segment.
#[derive(Clone, Debug)]
pub struct Projection {
    pub t: f64,
    pub point: Point,
    pub distance: f64,
}

/// Nearest point of the segment. The distance along the segment is convex
/// in `t` on a CAT(0) space, so a one-dimensional search suffices.
pub fn project_to_geodesic(x: &Point, g: &GeodesicSegment) -> Result<Projection> {
    require_same_space(x.space(), g.space())?;
    let len = g.length();
    if len < 1e-15 {
        let p = g.start().clone();
        let d = distance(x, &p)?;
        return Ok(Projection { t: 0.0, point: p, distance: d });
    }
    let space = g.space().clone();
    let (a, b) = (g.start().coords().clone(), g.end().coords().clone());
    let xc = x.coords().clone();
    let mut obj = |t: f64| {
        let p = space.interpolate_coords(&a, &b, t.clamp(0.0, 1.0));
        space.distance_coords(&xc, &p)
    };
    let m = line_minimize(&mut obj, 0.0, 1.0, TOL_1D);
    let point = geodesic_point(g, m.t.clamp(0.0, 1.0))?;
    let d = distance(x, &point)?;
    Ok(Projection { t: m.t, point, distance: d })
}

/// Raw comparison-triangle slacks `|x̄_s - ȳ_u| - d(x_s, y_u)` at `samples`
/// random parameter pairs. Errors on a degenerate triangle.
pub fn comparison_slacks(p: &Point, q: &Point, r: &Point, samples: usize, seed: u64) -> Result<Vec<f64>> {
    require_same_space(p.space(), q.space())?;
    require_same_space(p.space(), r.space())?;
    if samples == 0 {
        return Err(Error::usage("comparison check needs at least one sample"));
    }
    let a = distance(p, q)?;
    let b = distance(p, r)?;
    let c = distance(q, r)?;
    let scale = a.max(b).max(c);
    if scale < 1e-12 {
        return Err(Error::usage("degenerate comparison triangle: vertices coincide"));
    }
    // Comparison triangle in the plane: p̄ at the origin, q̄ on the axis.
    let qx = a;
    if qx < 1e-12 * scale {
        return Err(Error::usage("degenerate comparison triangle: p and q coincide"));
    }
    let rx = (a * a + b * b - c * c) / (2.0 * a);
    let h2 = b * b - rx * rx;
    if h2 <= (1e-9 * scale) * (1e-9 * scale) {
        return Err(Error::usage("degenerate comparison triangle: vertices nearly collinear"));
    }
    let ry = h2.sqrt();

    let seg_pr = GeodesicSegment::new(p.clone(), r.clone())?;
    let seg_pq = GeodesicSegment::new(p.clone(), q.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[0xca70]));
    let mut slacks = Vec::with_capacity(samples);
    for _ in 0..samples {
        let s: f64 = rng.gen();
        let u: f64 = rng.gen();
        let xs = geodesic_point(&seg_pr, s)?;
        let yu = geodesic_point(&seg_pq, u)?;
        let d_space = distance(&xs, &yu)?;
        // Comparison points preserve distance from the shared vertex.
        let cx = (s * rx - u * qx, s * ry);
        let d_plane = (cx.0 * cx.0 + cx.1 * cx.1).sqrt();
        slacks.push(d_plane - d_space);
    }
    Ok(slacks)
}

/// Checks the CAT(0) comparison inequality `d(x_s, y_u) <= |x̄_s - ȳ_u|`
/// on sampled pairs along two sides of the triangle `(p, q, r)`.
pub fn cat0_comparison_check(p: &Point, q: &Point, r: &Point, samples: usize, seed: u64) -> Result<Verdict> {
    let slacks = match comparison_slacks(p, q, r, samples, seed) {
        Ok(s) => s,
        Err(Error::Usage(msg)) => return Ok(Verdict::inconclusive(msg)),
        Err(e) => return Err(e),
    };
    let mut min_slack = f64::INFINITY;
    for &s in &slacks {
        min_slack = min_slack.min(s);
    }
    let witness = Witness {
        point: Some(p.coords_text()),
        lambda: None,
        n: None,
        value: min_slack,
        label: "min comparison slack".into(),
    };
    if min_slack < -TOL_CMP {
        Ok(Verdict::violated(witness))
    } else {
        Ok(Verdict::consistent().with_residual(min_slack).with_witness(witness).one_sided())
    }
}

/// Tail window for sequence diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSpec {
    pub n_min: usize,
    pub n_max: usize,
    pub tol_seq: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { n_min: N_MIN, n_max: N_MAX, tol_seq: TOL_SEQ }
    }
}

impl WindowSpec {
    pub fn new(n_min: usize, n_max: usize, tol_seq: f64) -> Result<Self> {
        if n_min == 0 || n_max < n_min {
            return Err(Error::usage(format!("invalid window [{n_min}, {n_max}]")));
        }
        if !(tol_seq > 0.0) {
            return Err(Error::usage(format!("tail tolerance must be positive, got {tol_seq}")));
        }
        Ok(WindowSpec { n_min, n_max, tol_seq })
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.n_min..=self.n_max
    }
}

/// A rule `n -> point`, `n >= 1`.
#[derive(Clone)]
pub struct PointSequence {
    space: Space,
    label: String,
    rule: Arc<dyn Fn(usize) -> Point + Send + Sync>,
}

impl PointSequence {
    pub fn new(
        space: Space,
        label: impl Into<String>,
        rule: impl Fn(usize) -> Point + Send + Sync + 'static,
    ) -> Self {
        PointSequence { space, label: label.into(), rule: Arc::new(rule) }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at(&self, n: usize) -> Point {
        debug_assert!(n >= 1, "sequences are 1-indexed");
        (self.rule)(n)
    }
}

impl fmt::Debug for PointSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSequence({})", self.label)
    }
}

/// Probes weak convergence `x_n ⇀ x`: along every supplied geodesic from
/// `x`, the projections of the tail must collapse back to `x`. A pass is
/// necessarily one-sided (finitely many probe geodesics).
pub fn weak_limit_test(
    xs: &PointSequence,
    x: &Point,
    geodesics: &[GeodesicSegment],
    window: &WindowSpec,
    radius_bound: f64,
) -> Result<Verdict> {
    require_same_space(xs.space(), x.space())?;
    if geodesics.is_empty() {
        return Ok(Verdict::inconclusive("no probe geodesics supplied"));
    }
    for (i, g) in geodesics.iter().enumerate() {
        require_same_space(x.space(), g.space())?;
        if distance(x, g.start())? > 1e-9 * (1.0 + g.length()) {
            return Err(Error::usage(format!("probe geodesic {i} does not start at the candidate limit")));
        }
    }
    // Boundedness precondition over the whole tested range.
    for n in 1..=window.n_max {
        let d = distance(x, &xs.at(n))?;
        if d > radius_bound {
            return Err(Error::usage(format!(
                "sequence unbounded at n={n}: d(x, x_n) = {d} exceeds radius bound {radius_bound}"
            )));
        }
    }
    let mut worst: Option<Witness> = None;
    for (gi, g) in geodesics.iter().enumerate() {
        for n in window.iter() {
            let xn = xs.at(n);
            let proj = project_to_geodesic(&xn, g)?;
            let v = distance(x, &proj.point)?;
            let better = worst.as_ref().map_or(true, |w| v > w.value);
            if better {
                worst = Some(Witness {
                    point: Some(proj.point.coords_text()),
                    lambda: None,
                    n: Some(n),
                    value: v,
                    label: format!("d(x, P_g x_n) along probe geodesic {gi}"),
                });
            }
        }
    }
    let worst = worst.expect("at least one probe evaluated");
    let residual = worst.value;
    if residual > window.tol_seq {
        Ok(Verdict::violated(worst))
    } else {
        Ok(Verdict::consistent().with_residual(residual).with_witness(worst).one_sided())
    }
}

/// Builder registry mapping kind names to descriptor-driven constructors.
pub struct SpaceRegistry {
    builders: BTreeMap<&'static str, fn(&Descriptor) -> Result<Space>>,
}

impl SpaceRegistry {
    pub fn builtin() -> Self {
        let mut builders: BTreeMap<&'static str, fn(&Descriptor) -> Result<Space>> = BTreeMap::new();
        builders.insert("euclidean", euclidean::build);
        builders.insert("halfplane", halfplane::build);
        builders.insert("spider", spider::build);
        builders.insert("product", product::build);
        SpaceRegistry { builders }
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, text: &str) -> Result<Space> {
        let d = Descriptor::parse(text)?;
        let kind = d.atom("kind")?;
        match self.builders.get(kind) {
            Some(builder) => builder(&d),
            None => Err(Error::descriptor(format!(
                "unknown space kind `{kind}` (known: {})",
                self.kinds().join(", ")
            ))),
        }
    }
}

/// Draws a point from a cloud around several centers at several scales;
/// used by sampling-based checks that need broad coverage.
pub fn sample_cloud(
    space: &Space,
    centers: &[Point],
    scales: &[f64],
    rng: &mut ChaCha8Rng,
) -> Point {
    debug_assert!(!centers.is_empty() && !scales.is_empty());
    let ci = rng.gen_range(0..centers.len());
    let si = rng.gen_range(0..scales.len());
    space.sample_near(&centers[ci], scales[si], rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(n: usize) -> Space {
        Space::from_descriptor(&format!("kind=euclidean,dim={n}")).unwrap()
    }

    #[test]
    fn registry_rejects_unknown_kind() {
        let err = Space::from_descriptor("kind=sphere").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown space kind"), "{msg}");
        assert!(msg.contains("euclidean"), "{msg}");
    }

    #[test]
    fn mismatched_spaces_error() {
        let e1 = euclid(1);
        let e2 = euclid(2);
        let a = e1.parse_point("(0)").unwrap();
        let b = e2.parse_point("(0 0)").unwrap();
        assert!(matches!(distance(&a, &b), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn geodesic_parameter_range_enforced() {
        let e = euclid(1);
        let g = GeodesicSegment::new(e.parse_point("(0)").unwrap(), e.parse_point("(1)").unwrap()).unwrap();
        assert!(geodesic_point(&g, -0.1).is_err());
        assert!(geodesic_point(&g, 1.1).is_err());
        assert!(geodesic_point(&g, 0.5).is_ok());
    }

    #[test]
    fn projection_degenerate_segment() {
        let e = euclid(2);
        let p = e.parse_point("(1 1)").unwrap();
        let g = GeodesicSegment::new(e.parse_point("(0 0)").unwrap(), e.parse_point("(0 0)").unwrap()).unwrap();
        let proj = project_to_geodesic(&p, &g).unwrap();
        assert_eq!(proj.t, 0.0);
        assert!((proj.distance - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn comparison_check_flat_triangle_degenerate() {
        let e = euclid(2);
        let p = e.parse_point("(0 0)").unwrap();
        let q = e.parse_point("(1 0)").unwrap();
        let r = e.parse_point("(2 0)").unwrap();
        let v = cat0_comparison_check(&p, &q, &r, 16, 7).unwrap();
        assert_eq!(v.status, crate::verdict::Status::Inconclusive);
    }

    #[test]
    fn weak_limit_alternating_sequence_violates() {
        let e = euclid(2);
        let x = e.parse_point("(0 0)").unwrap();
        let seq_space = e.clone();
        let xs = PointSequence::new(e.clone(), "alternating", move |n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            seq_space.point(Coords::Euclidean(vec![sign, 0.0])).unwrap()
        });
        let g = GeodesicSegment::new(x.clone(), e.parse_point("(1 0)").unwrap()).unwrap();
        let w = WindowSpec::default();
        let v = weak_limit_test(&xs, &x, &[g], &w, 1e6).unwrap();
        assert_eq!(v.status, crate::verdict::Status::Violated);
        assert!(v.witnesses[0].value > 0.9);
    }

    #[test]
    fn weak_limit_shrinking_sequence_passes() {
        let e = euclid(2);
        let x = e.parse_point("(0 0)").unwrap();
        let seq_space = e.clone();
        let xs = PointSequence::new(e.clone(), "shrinking", move |n| {
            let nn = (n * n) as f64;
            seq_space.point(Coords::Euclidean(vec![1.0 / nn, 0.0])).unwrap()
        });
        let g1 = GeodesicSegment::new(x.clone(), e.parse_point("(1 0)").unwrap()).unwrap();
        let g2 = GeodesicSegment::new(x.clone(), e.parse_point("(0 1)").unwrap()).unwrap();
        let w = WindowSpec::default();
        let v = weak_limit_test(&xs, &x, &[g1, g2], &w, 1e6).unwrap();
        assert_eq!(v.status, crate::verdict::Status::ConsistentWith);
        assert!(v.one_sided);
    }
}
