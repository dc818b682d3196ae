//! Built-in functional kinds: constants, per-model linear functionals,
//! distance terms, indicators, positive combinations, and pointwise maxima.
//!
//! Each kind is geodesically convex on its space by construction; the
//! constructors reject parameter choices that would break convexity (a
//! negative halfplane weight, spider rates whose cross-leg sum is negative,
//! nonpositive combination weights).

use crate::descriptor::{fmt_f64, Descriptor};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::region::Region;
use crate::space::{Coords, Euclidean, MetricSpider, Point, Space};

use super::{ConvexFunctional, DomainHint, Functional};

#[derive(Debug)]
struct Zero {
    space: Space,
}

impl Functional for Zero {
    fn space(&self) -> &Space {
        &self.space
    }

    fn eval_coords(&self, _c: &Coords) -> ExtendedReal {
        ExtendedReal::finite(0.0)
    }

    fn descriptor(&self) -> String {
        "f=zero".into()
    }
}

/// The functional that is zero everywhere.
pub fn zero(space: &Space) -> ConvexFunctional {
    ConvexFunctional::new(Zero { space: space.clone() })
}

#[derive(Debug)]
struct Constant {
    space: Space,
    value: f64,
}

impl Functional for Constant {
    fn space(&self) -> &Space {
        &self.space
    }

    fn eval_coords(&self, _c: &Coords) -> ExtendedReal {
        ExtendedReal::finite(self.value)
    }

    fn descriptor(&self) -> String {
        format!("f=const,value={}", fmt_f64(self.value))
    }
}

/// A finite constant.
pub fn constant(space: &Space, value: f64) -> Result<ConvexFunctional> {
    if !value.is_finite() {
        return Err(Error::usage(format!("constant functional needs a finite value, got {value}")));
    }
    Ok(ConvexFunctional::new(Constant { space: space.clone(), value }))
}

#[derive(Debug)]
struct LinearEuclidean {
    space: Space,
    weights: Vec<f64>,
    offset: f64,
}

impl Functional for LinearEuclidean {
    fn space(&self) -> &Space {
        &self.space
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        let v = match c {
            Coords::Euclidean(v) => v,
            other => panic!("euclidean linear functional got {other:?}"),
        };
        let dot: f64 = self.weights.iter().zip(v).map(|(w, x)| w * x).sum();
        ExtendedReal::finite(dot + self.offset)
    }

    fn descriptor(&self) -> String {
        let w: Vec<String> = self.weights.iter().map(|v| fmt_f64(*v)).collect();
        format!("f=linear,weights={},offset={}", w.join("|"), fmt_f64(self.offset))
    }
}

/// Affine functional `w·x + b` on a Euclidean space.
pub fn linear_euclidean(space: &Space, weights: Vec<f64>, offset: f64) -> Result<ConvexFunctional> {
    let model = space
        .downcast::<Euclidean>()
        .ok_or_else(|| Error::usage("weights-form linear functionals live on euclidean spaces"))?;
    if weights.len() != model.dim() {
        return Err(Error::usage(format!(
            "linear functional needs {} weights, got {}",
            model.dim(),
            weights.len()
        )));
    }
    check_finite(&weights, "weights")?;
    check_finite(&[offset], "offset")?;
    Ok(ConvexFunctional::new(LinearEuclidean { space: space.clone(), weights, offset }))
}

#[derive(Debug)]
struct LinearSpider {
    space: Space,
    rates: Vec<f64>,
    offset: f64,
}

impl Functional for LinearSpider {
    fn space(&self) -> &Space {
        &self.space
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        let (leg, r) = match c {
            Coords::Spider { leg, r } => (*leg, *r),
            other => panic!("spider linear functional got {other:?}"),
        };
        ExtendedReal::finite(self.rates[leg - 1] * r + self.offset)
    }

    fn descriptor(&self) -> String {
        let r: Vec<String> = self.rates.iter().map(|v| fmt_f64(*v)).collect();
        format!("f=linear,rates={},offset={}", r.join("|"), fmt_f64(self.offset))
    }
}

/// Per-leg linear functional `rate_leg · r + b` on a spider. Along a
/// cross-leg geodesic the slopes are `-rate_i` then `+rate_j`, so geodesic
/// convexity needs `rate_i + rate_j >= 0` for every pair of legs.
pub fn linear_spider(space: &Space, rates: Vec<f64>, offset: f64) -> Result<ConvexFunctional> {
    let model = space
        .downcast::<MetricSpider>()
        .ok_or_else(|| Error::usage("rates-form linear functionals live on spider spaces"))?;
    if rates.len() != model.legs() {
        return Err(Error::usage(format!(
            "linear functional needs {} rates, got {}",
            model.legs(),
            rates.len()
        )));
    }
    check_finite(&rates, "rates")?;
    check_finite(&[offset], "offset")?;
    let mut sorted = rates.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted[0] + sorted[1] < 0.0 {
        return Err(Error::usage(format!(
            "rates {} and {} sum below zero: not convex across the origin",
            fmt_f64(sorted[0]),
            fmt_f64(sorted[1])
        )));
    }
    Ok(ConvexFunctional::new(LinearSpider { space: space.clone(), rates, offset }))
}

#[derive(Debug)]
struct LinearHalfPlane {
    space: Space,
    weight: f64,
    offset: f64,
}

impl Functional for LinearHalfPlane {
    fn space(&self) -> &Space {
        &self.space
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        let y = match c {
            Coords::HalfPlane { y, .. } => *y,
            other => panic!("halfplane linear functional got {other:?}"),
        };
        ExtendedReal::finite(self.weight * (-y.ln()) + self.offset)
    }

    fn descriptor(&self) -> String {
        format!("f=linear,weight={},offset={}", fmt_f64(self.weight), fmt_f64(self.offset))
    }
}

/// `w · (-ln y) + b` on the hyperbolic half-plane: `-ln y` is the Busemann
/// function of the upward vertical ray, affine along vertical geodesics and
/// convex along all geodesics, so `w >= 0` keeps the functional convex.
pub fn linear_halfplane(space: &Space, weight: f64, offset: f64) -> Result<ConvexFunctional> {
    if space.kind() != "halfplane" {
        return Err(Error::usage("weight-form linear functionals live on the halfplane"));
    }
    check_finite(&[weight, offset], "parameters")?;
    if weight < 0.0 {
        return Err(Error::usage(format!(
            "halfplane linear weight must be nonnegative for convexity, got {weight}"
        )));
    }
    Ok(ConvexFunctional::new(LinearHalfPlane { space: space.clone(), weight, offset }))
}

#[derive(Debug)]
struct HalfSqDist {
    anchor: Point,
    weight: f64,
}

impl Functional for HalfSqDist {
    fn space(&self) -> &Space {
        self.anchor.space()
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        let d = self.anchor.space().model().distance(self.anchor.coords(), c);
        ExtendedReal::finite(0.5 * self.weight * d * d)
    }

    fn descriptor(&self) -> String {
        format!("f=dist_sq,anchor={},weight={}", self.anchor.coords_text(), fmt_f64(self.weight))
    }

    fn anchors(&self) -> Vec<Point> {
        vec![self.anchor.clone()]
    }
}

/// `w · d(·,a)² / 2`; strongly convex with parameter `w` on any Hadamard
/// space.
pub fn half_sqdist(anchor: Point, weight: f64) -> Result<ConvexFunctional> {
    check_positive(weight)?;
    Ok(ConvexFunctional::new(HalfSqDist { anchor, weight }))
}

#[derive(Debug)]
struct DistTo {
    anchor: Point,
    weight: f64,
}

impl Functional for DistTo {
    fn space(&self) -> &Space {
        self.anchor.space()
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        let d = self.anchor.space().model().distance(self.anchor.coords(), c);
        ExtendedReal::finite(self.weight * d)
    }

    fn descriptor(&self) -> String {
        format!("f=dist,anchor={},weight={}", self.anchor.coords_text(), fmt_f64(self.weight))
    }

    fn anchors(&self) -> Vec<Point> {
        vec![self.anchor.clone()]
    }
}

/// `w · d(·,a)`.
pub fn dist_to(anchor: Point, weight: f64) -> Result<ConvexFunctional> {
    check_positive(weight)?;
    Ok(ConvexFunctional::new(DistTo { anchor, weight }))
}

#[derive(Debug)]
struct AbsValue {
    base: Point,
    weight: f64,
}

impl Functional for AbsValue {
    fn space(&self) -> &Space {
        self.base.space()
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        let d = self.base.space().model().distance(self.base.coords(), c);
        ExtendedReal::finite(self.weight * d)
    }

    fn descriptor(&self) -> String {
        format!("f=abs,weight={}", fmt_f64(self.weight))
    }

    fn anchors(&self) -> Vec<Point> {
        vec![self.base.clone()]
    }
}

/// `w · d(·, base point)`: the absolute value on the Euclidean line,
/// generalized by distance to the space's base point.
pub fn abs(space: &Space, weight: f64) -> Result<ConvexFunctional> {
    check_positive(weight)?;
    Ok(ConvexFunctional::new(AbsValue { base: space.base_point(), weight }))
}

#[derive(Debug)]
struct Indicator {
    region: Region,
}

impl Functional for Indicator {
    fn space(&self) -> &Space {
        self.region.space()
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        if self.region.contains_coords(c) {
            ExtendedReal::finite(0.0)
        } else {
            ExtendedReal::infinity()
        }
    }

    fn descriptor(&self) -> String {
        format!("f=indicator,region=[{}]", self.region.descriptor())
    }

    fn domain(&self) -> DomainHint {
        DomainHint::Within(self.region.clone())
    }

    fn anchors(&self) -> Vec<Point> {
        self.region.anchor_points()
    }
}

/// The indicator `ι_R`: zero on the region, `+∞` outside. Convex because
/// every built-in region kind is geodesically convex.
pub fn indicator(region: Region) -> ConvexFunctional {
    ConvexFunctional::new(Indicator { region })
}

#[derive(Debug)]
struct WeightedSum {
    space: Space,
    terms: Vec<ConvexFunctional>,
    weights: Vec<f64>,
}

impl Functional for WeightedSum {
    fn space(&self) -> &Space {
        &self.space
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        let mut acc = ExtendedReal::finite(0.0);
        for (t, w) in self.terms.iter().zip(&self.weights) {
            acc = acc + t.eval_coords(c).scale(*w);
        }
        acc
    }

    fn descriptor(&self) -> String {
        let terms: Vec<String> = self.terms.iter().map(|t| t.descriptor()).collect();
        let weights: Vec<String> = self.weights.iter().map(|w| fmt_f64(*w)).collect();
        format!("f=sum,terms=[{}],weights={}", terms.join(";"), weights.join("|"))
    }

    fn domain(&self) -> DomainHint {
        first_region_hint(&self.terms)
    }

    fn anchors(&self) -> Vec<Point> {
        self.terms.iter().flat_map(|t| t.anchors()).collect()
    }
}

/// Positive combination `Σ w_i f_i`; convexity is preserved because all
/// weights are positive.
pub fn weighted_sum(terms: Vec<ConvexFunctional>, weights: Vec<f64>) -> Result<ConvexFunctional> {
    if terms.is_empty() {
        return Err(Error::usage("sum needs at least one term"));
    }
    if terms.len() != weights.len() {
        return Err(Error::usage(format!(
            "sum got {} terms but {} weights",
            terms.len(),
            weights.len()
        )));
    }
    for w in &weights {
        check_positive(*w)?;
    }
    let space = terms[0].space().clone();
    for t in &terms[1..] {
        if !t.space().same_as(&space) {
            return Err(Error::SpaceMismatch {
                expected: space.descriptor(),
                found: t.space().descriptor(),
            });
        }
    }
    Ok(ConvexFunctional::new(WeightedSum { space, terms, weights }))
}

#[derive(Debug)]
struct MaxOf {
    space: Space,
    terms: Vec<ConvexFunctional>,
}

impl Functional for MaxOf {
    fn space(&self) -> &Space {
        &self.space
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        self.terms
            .iter()
            .map(|t| t.eval_coords(c))
            .fold(ExtendedReal::finite(f64::MIN), ExtendedReal::max)
    }

    fn descriptor(&self) -> String {
        let terms: Vec<String> = self.terms.iter().map(|t| t.descriptor()).collect();
        format!("f=max,terms=[{}]", terms.join(";"))
    }

    fn domain(&self) -> DomainHint {
        first_region_hint(&self.terms)
    }

    fn anchors(&self) -> Vec<Point> {
        self.terms.iter().flat_map(|t| t.anchors()).collect()
    }
}

/// Pointwise maximum of finitely many convex functionals.
pub fn max_of(terms: Vec<ConvexFunctional>) -> Result<ConvexFunctional> {
    if terms.is_empty() {
        return Err(Error::usage("max needs at least one term"));
    }
    let space = terms[0].space().clone();
    for t in &terms[1..] {
        if !t.space().same_as(&space) {
            return Err(Error::SpaceMismatch {
                expected: space.descriptor(),
                found: t.space().descriptor(),
            });
        }
    }
    Ok(ConvexFunctional::new(MaxOf { space, terms }))
}

fn first_region_hint(terms: &[ConvexFunctional]) -> DomainHint {
    // A sum or max is finite only where all terms are; the first hinted
    // region is a sampling guide, not an exact domain.
    for t in terms {
        if let DomainHint::Within(r) = t.domain() {
            return DomainHint::Within(r);
        }
    }
    DomainHint::Everywhere
}

fn check_finite(vals: &[f64], what: &str) -> Result<()> {
    for v in vals {
        if !v.is_finite() {
            return Err(Error::usage(format!("{what} must be finite, got {v}")));
        }
    }
    Ok(())
}

fn check_positive(w: f64) -> Result<()> {
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::usage(format!("weight must be a positive finite number, got {w}")));
    }
    Ok(())
}

pub(super) fn build_zero(space: &Space, d: &Descriptor) -> Result<ConvexFunctional> {
    d.expect_keys(&["f", "kind"])?;
    Ok(zero(space))
}

pub(super) fn build_const(space: &Space, d: &Descriptor) -> Result<ConvexFunctional> {
    d.expect_keys(&["f", "kind", "value"])?;
    constant(space, d.f64("value")?)
}

pub(super) fn build_linear(space: &Space, d: &Descriptor) -> Result<ConvexFunctional> {
    match space.kind() {
        "euclidean" => {
            d.expect_keys(&["f", "kind", "weights", "offset"])?;
            linear_euclidean(space, d.f64_bar_list("weights")?, d.opt_f64("offset")?.unwrap_or(0.0))
        }
        "spider" => {
            d.expect_keys(&["f", "kind", "rates", "offset"])?;
            linear_spider(space, d.f64_bar_list("rates")?, d.opt_f64("offset")?.unwrap_or(0.0))
        }
        "halfplane" => {
            d.expect_keys(&["f", "kind", "weight", "offset"])?;
            linear_halfplane(space, d.f64("weight")?, d.opt_f64("offset")?.unwrap_or(0.0))
        }
        other => Err(Error::usage(format!(
            "linear functionals are defined on euclidean, spider, and halfplane spaces, not {other}"
        ))),
    }
}

pub(super) fn build_dist_sq(space: &Space, d: &Descriptor) -> Result<ConvexFunctional> {
    d.expect_keys(&["f", "kind", "anchor", "weight"])?;
    let anchor = space.parse_point(d.group("anchor")?)?;
    half_sqdist(anchor, d.opt_f64("weight")?.unwrap_or(1.0))
}

pub(super) fn build_dist(space: &Space, d: &Descriptor) -> Result<ConvexFunctional> {
    d.expect_keys(&["f", "kind", "anchor", "weight"])?;
    let anchor = space.parse_point(d.group("anchor")?)?;
    dist_to(anchor, d.opt_f64("weight")?.unwrap_or(1.0))
}

pub(super) fn build_abs(space: &Space, d: &Descriptor) -> Result<ConvexFunctional> {
    d.expect_keys(&["f", "kind", "weight"])?;
    abs(space, d.opt_f64("weight")?.unwrap_or(1.0))
}

pub(super) fn build_indicator(space: &Space, d: &Descriptor) -> Result<ConvexFunctional> {
    d.expect_keys(&["f", "kind", "region"])?;
    let region = Region::from_descriptor(space, &one_item(d, "region")?)?;
    Ok(indicator(region))
}

pub(super) fn build_sum(space: &Space, d: &Descriptor) -> Result<ConvexFunctional> {
    d.expect_keys(&["f", "kind", "terms", "weights"])?;
    let terms = parse_terms(space, d)?;
    let weights = match d.get("weights") {
        Some(_) => d.f64_bar_list("weights")?,
        None => vec![1.0; terms.len()],
    };
    weighted_sum(terms, weights)
}

pub(super) fn build_max(space: &Space, d: &Descriptor) -> Result<ConvexFunctional> {
    d.expect_keys(&["f", "kind", "terms"])?;
    max_of(parse_terms(space, d)?)
}

fn parse_terms(space: &Space, d: &Descriptor) -> Result<Vec<ConvexFunctional>> {
    d.list("terms")?
        .iter()
        .map(|t| ConvexFunctional::from_descriptor(space, t))
        .collect()
}

pub(super) fn one_item(d: &Descriptor, key: &str) -> Result<String> {
    let items = d.list(key)?;
    if items.len() != 1 {
        return Err(Error::descriptor(format!(
            "key `{key}` expects exactly one bracketed descriptor, got {}",
            items.len()
        )));
    }
    Ok(items[0].clone())
}
