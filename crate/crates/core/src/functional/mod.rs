//! Proper convex lower semicontinuous functionals on Hadamard spaces.
//!
//! A [`ConvexFunctional`] wraps a trait object that evaluates to an
//! [`ExtendedReal`], exposes a parsable descriptor, and optionally hints at
//! its effective domain and at anchor points worth sampling near. Functional
//! kinds and sequence families are looked up by name through registries so
//! suite configs can select them at runtime.
//!
//! Alongside the library this module carries the sampling-based checks that
//! everything downstream leans on: properness witnesses, the strong
//! convexity test with modulus `mu` along geodesics, and one-sided
//! directional derivatives via monotone difference quotients.

mod library;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::minimize::seeded_rng;
use crate::region::Region;
use crate::space::{distance, geodesic_point, Coords, GeodesicSegment, Point, Space};
use crate::tolerances::TOL_CVX;
use crate::verdict::{Verdict, Witness};

pub use library::{
    abs, constant, dist_to, half_sqdist, indicator, linear_euclidean, linear_halfplane,
    linear_spider, max_of, weighted_sum, zero,
};

/// Where a functional is known to be finite.
#[derive(Clone, Debug)]
pub enum DomainHint {
    /// Finite on the whole space.
    Everywhere,
    /// Finite (at most) on the region; used to steer sampling, projections,
    /// and proximal multistarts.
    Within(Region),
}

/// A geodesically convex functional with values in `(-inf, +inf]`.
///
/// `eval_coords` must be total on validated coordinates of the space: the
/// hot paths (prox inner loops, slope sampling) call it without error
/// handling.
pub trait Functional: fmt::Debug + Send + Sync {
    fn space(&self) -> &Space;

    fn eval_coords(&self, c: &Coords) -> ExtendedReal;

    /// Canonical `f=<kind>,...` descriptor; parsing it back yields an
    /// equivalent functional.
    fn descriptor(&self) -> String;

    fn domain(&self) -> DomainHint {
        DomainHint::Everywhere
    }

    /// Distinguished points (anchors of distance terms, region corners)
    /// used to seed minimization and sampling.
    fn anchors(&self) -> Vec<Point> {
        Vec::new()
    }
}

/// Shared handle to a functional.
#[derive(Clone)]
pub struct ConvexFunctional(Arc<dyn Functional>);

impl ConvexFunctional {
    pub fn new(f: impl Functional + 'static) -> Self {
        ConvexFunctional(Arc::new(f))
    }

    pub fn space(&self) -> &Space {
        self.0.space()
    }

    /// Evaluate at a point after checking it belongs to this space.
    pub fn evaluate(&self, x: &Point) -> Result<ExtendedReal> {
        if !x.space().same_as(self.space()) {
            return Err(Error::SpaceMismatch {
                expected: self.space().descriptor(),
                found: x.space().descriptor(),
            });
        }
        Ok(self.0.eval_coords(x.coords()))
    }

    /// Evaluate raw coordinates already validated for this space.
    pub fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        self.0.eval_coords(c)
    }

    pub fn descriptor(&self) -> String {
        self.0.descriptor()
    }

    pub fn domain(&self) -> DomainHint {
        self.0.domain()
    }

    pub fn anchors(&self) -> Vec<Point> {
        self.0.anchors()
    }

    pub fn from_descriptor(space: &Space, text: &str) -> Result<ConvexFunctional> {
        FunctionalRegistry::builtin().build(space, text)
    }
}

impl fmt::Debug for ConvexFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexFunctional({} on {})", self.descriptor(), self.space().descriptor())
    }
}

type BuildFn = fn(&Space, &Descriptor) -> Result<ConvexFunctional>;

/// Name-keyed builders for the functional library.
pub struct FunctionalRegistry {
    builders: BTreeMap<&'static str, BuildFn>,
}

impl FunctionalRegistry {
    pub fn builtin() -> Self {
        let mut builders: BTreeMap<&'static str, BuildFn> = BTreeMap::new();
        builders.insert("zero", library::build_zero);
        builders.insert("const", library::build_const);
        builders.insert("linear", library::build_linear);
        builders.insert("dist_sq", library::build_dist_sq);
        builders.insert("dist", library::build_dist);
        builders.insert("abs", library::build_abs);
        builders.insert("indicator", library::build_indicator);
        builders.insert("sum", library::build_sum);
        builders.insert("max", library::build_max);
        FunctionalRegistry { builders }
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    /// Build from a `f=<kind>,...` descriptor (`kind=` is accepted as an
    /// alias for the leading key).
    pub fn build(&self, space: &Space, text: &str) -> Result<ConvexFunctional> {
        let d = Descriptor::parse(text)?;
        let kind = match d.opt_atom("f")? {
            Some(k) => k.to_string(),
            None => d.atom("kind")?.to_string(),
        };
        match self.builders.get(kind.as_str()) {
            Some(build) => build(space, &d),
            None => Err(Error::descriptor(format!(
                "unknown functional kind `{kind}`; expected one of {}",
                self.kinds().join(", ")
            ))),
        }
    }
}

/// A sequence `n >= 1 -> f_n` of functionals on one space.
#[derive(Clone)]
pub struct FunctionSequence {
    space: Space,
    label: String,
    rule: Arc<dyn Fn(usize) -> ConvexFunctional + Send + Sync>,
}

impl FunctionSequence {
    pub fn new(
        space: Space,
        label: impl Into<String>,
        rule: impl Fn(usize) -> ConvexFunctional + Send + Sync + 'static,
    ) -> Self {
        FunctionSequence { space, label: label.into(), rule: Arc::new(rule) }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at(&self, n: usize) -> ConvexFunctional {
        assert!(n >= 1, "sequence index starts at 1");
        (self.rule)(n)
    }
}

impl fmt::Debug for FunctionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionSequence({} on {})", self.label, self.space.descriptor())
    }
}

/// A sequence `n >= 1 -> C_n` of closed convex regions on one space.
#[derive(Clone)]
pub struct RegionSequence {
    space: Space,
    label: String,
    rule: Arc<dyn Fn(usize) -> Region + Send + Sync>,
}

impl RegionSequence {
    pub fn new(
        space: Space,
        label: impl Into<String>,
        rule: impl Fn(usize) -> Region + Send + Sync + 'static,
    ) -> Self {
        RegionSequence { space, label: label.into(), rule: Arc::new(rule) }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at(&self, n: usize) -> Region {
        assert!(n >= 1, "sequence index starts at 1");
        (self.rule)(n)
    }
}

impl fmt::Debug for RegionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RegionSequence({} on {})", self.label, self.space.descriptor())
    }
}

/// The indicator functionals of a region sequence.
pub fn indicator_sequence(regions: &RegionSequence) -> FunctionSequence {
    let rs = regions.clone();
    FunctionSequence::new(regions.space().clone(), format!("indicator({})", regions.label()), move |n| {
        indicator(rs.at(n))
    })
}

type FamilyFn = fn(&Space, &Descriptor) -> Result<FunctionSequence>;

/// Name-keyed builders for functional sequence families.
pub struct FamilyRegistry {
    builders: BTreeMap<&'static str, FamilyFn>,
}

impl FamilyRegistry {
    pub fn builtin() -> Self {
        let mut builders: BTreeMap<&'static str, FamilyFn> = BTreeMap::new();
        builders.insert("constant", family_constant);
        builders.insert("shifted_abs", family_shifted_abs);
        builders.insert("scaled_abs", family_scaled_abs);
        builders.insert("oscillating", family_oscillating);
        builders.insert("steepening_quadratic", family_steepening_quadratic);
        FamilyRegistry { builders }
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    /// Build from a `family=<name>,...` descriptor.
    pub fn build(&self, space: &Space, text: &str) -> Result<FunctionSequence> {
        let d = Descriptor::parse(text)?;
        let name = d.atom("family")?;
        match self.builders.get(name) {
            Some(build) => build(space, &d),
            None => Err(Error::descriptor(format!(
                "unknown sequence family `{name}`; expected one of {}",
                self.kinds().join(", ")
            ))),
        }
    }
}

type SetFamilyFn = fn(&Space, &Descriptor) -> Result<RegionSequence>;

/// Name-keyed builders for region sequence families.
pub struct SetFamilyRegistry {
    builders: BTreeMap<&'static str, SetFamilyFn>,
}

impl SetFamilyRegistry {
    pub fn builtin() -> Self {
        let mut builders: BTreeMap<&'static str, SetFamilyFn> = BTreeMap::new();
        builders.insert("interval_shrink", set_family_interval_shrink);
        builders.insert("interval_grow", set_family_interval_grow);
        builders.insert("constant_region", set_family_constant);
        SetFamilyRegistry { builders }
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, space: &Space, text: &str) -> Result<RegionSequence> {
        let d = Descriptor::parse(text)?;
        let name = d.atom("family")?;
        match self.builders.get(name) {
            Some(build) => build(space, &d),
            None => Err(Error::descriptor(format!(
                "unknown region family `{name}`; expected one of {}",
                self.kinds().join(", ")
            ))),
        }
    }
}

fn family_constant(space: &Space, d: &Descriptor) -> Result<FunctionSequence> {
    d.expect_keys(&["family", "f"])?;
    let f = ConvexFunctional::from_descriptor(space, &library::one_item(d, "f")?)?;
    let label = format!("constant({})", f.descriptor());
    Ok(FunctionSequence::new(space.clone(), label, move |_| f.clone()))
}

fn family_shifted_abs(space: &Space, d: &Descriptor) -> Result<FunctionSequence> {
    d.expect_keys(&["family"])?;
    require_line(space, "shifted_abs")?;
    let sp = space.clone();
    Ok(FunctionSequence::new(space.clone(), "shifted_abs", move |n| {
        let anchor = sp.point(Coords::Euclidean(vec![1.0 / n as f64])).expect("valid anchor");
        dist_to(anchor, 1.0).expect("positive weight")
    }))
}

fn family_scaled_abs(space: &Space, d: &Descriptor) -> Result<FunctionSequence> {
    d.expect_keys(&["family"])?;
    let sp = space.clone();
    Ok(FunctionSequence::new(space.clone(), "scaled_abs", move |n| {
        abs(&sp, 1.0 + 1.0 / n as f64).expect("positive weight")
    }))
}

fn family_oscillating(space: &Space, d: &Descriptor) -> Result<FunctionSequence> {
    d.expect_keys(&["family", "low", "high"])?;
    let low = constant(space, d.opt_f64("low")?.unwrap_or(0.0))?;
    let high = constant(space, d.opt_f64("high")?.unwrap_or(1.0))?;
    Ok(FunctionSequence::new(space.clone(), "oscillating", move |n| {
        if n % 2 == 1 {
            low.clone()
        } else {
            high.clone()
        }
    }))
}

fn family_steepening_quadratic(space: &Space, d: &Descriptor) -> Result<FunctionSequence> {
    d.expect_keys(&["family"])?;
    let base = space.base_point();
    Ok(FunctionSequence::new(space.clone(), "steepening_quadratic", move |n| {
        half_sqdist(base.clone(), 2.0 * n as f64).expect("positive weight")
    }))
}

fn set_family_interval_shrink(space: &Space, d: &Descriptor) -> Result<RegionSequence> {
    interval_family(space, d, "interval_shrink", 1.0)
}

fn set_family_interval_grow(space: &Space, d: &Descriptor) -> Result<RegionSequence> {
    interval_family(space, d, "interval_grow", -1.0)
}

/// Intervals `[from, to + sign/n]` on the Euclidean line, clamped so the
/// right endpoint never passes `from`.
fn interval_family(space: &Space, d: &Descriptor, label: &str, sign: f64) -> Result<RegionSequence> {
    d.expect_keys(&["family", "from", "to"])?;
    require_line(space, label)?;
    let from = d.opt_f64("from")?.unwrap_or(0.0);
    let to = d.opt_f64("to")?.unwrap_or(1.0);
    if !from.is_finite() || !to.is_finite() || to < from {
        return Err(Error::usage(format!("invalid interval endpoints from={from}, to={to}")));
    }
    let sp = space.clone();
    Ok(RegionSequence::new(space.clone(), label, move |n| {
        let right = (to + sign / n as f64).max(from);
        let a = sp.point(Coords::Euclidean(vec![from])).expect("valid endpoint");
        let b = sp.point(Coords::Euclidean(vec![right])).expect("valid endpoint");
        Region::interval(a, b).expect("same space")
    }))
}

fn set_family_constant(space: &Space, d: &Descriptor) -> Result<RegionSequence> {
    d.expect_keys(&["family", "region"])?;
    let region = Region::from_descriptor(space, &library::one_item(d, "region")?)?;
    let label = format!("constant_region({})", region.descriptor());
    Ok(RegionSequence::new(space.clone(), label, move |_| region.clone()))
}

fn require_line(space: &Space, what: &str) -> Result<()> {
    let ok = space.downcast::<crate::space::Euclidean>().map_or(false, |e| e.dim() == 1);
    if ok {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "family `{what}` is defined on the one-dimensional euclidean line, not {}",
            space.descriptor()
        )))
    }
}

/// Draw `count` points biased toward where `f` is finite: region samples
/// when a domain hint exists, otherwise clouds of growing radius around the
/// anchors and base point.
pub fn domain_samples(f: &ConvexFunctional, count: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let space = f.space().clone();
    let region = match f.domain() {
        DomainHint::Within(r) => Some(r),
        DomainHint::Everywhere => None,
    };
    let mut centers = f.anchors();
    centers.push(space.base_point());
    let scale = region.as_ref().map_or(1.0, |r| r.scale().max(1.0));
    let mut pts = Vec::with_capacity(count);
    let mut i = 0usize;
    while pts.len() < count {
        if let Some(r) = &region {
            if i % 2 == 0 {
                if let Ok(p) = r.sample(rng) {
                    pts.push(p);
                }
                i += 1;
                continue;
            }
        }
        let c = &centers[i % centers.len()];
        let radius = scale * (1.0 + 0.5 * (i / centers.len()) as f64);
        pts.push(space.sample_near(c, radius, rng));
        i += 1;
    }
    pts
}

/// Find a point with a finite value, or report the functional as improper.
pub fn properness_witness(f: &ConvexFunctional, budget: usize, seed: u64) -> Result<Point> {
    let mut candidates = f.anchors();
    if let DomainHint::Within(r) = f.domain() {
        candidates.extend(r.anchor_points());
    }
    candidates.push(f.space().base_point());
    let mut rng = seeded_rng(seed, &[0x13a]);
    candidates.extend(domain_samples(f, budget, &mut rng));
    for p in candidates {
        if f.evaluate(&p)?.is_finite() {
            return Ok(p);
        }
    }
    Err(Error::NotProper(format!(
        "no finite value found after {budget} samples of `{}`",
        f.descriptor()
    )))
}

/// Sampled test of convexity with modulus `mu` along geodesics:
///
/// ```text
/// f(x_t) <= (1-t) f(x0) + t f(x1) - (mu/2) t (1-t) d(x0,x1)^2
/// ```
///
/// up to a value-scaled tolerance. With no finite-valued pair to test the
/// verdict is inconclusive, matching the convention that checks only report
/// on what they observed.
pub fn convexity_check(f: &ConvexFunctional, mu: f64, samples: usize, seed: u64) -> Result<Verdict> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::usage(format!("convexity modulus must be nonnegative, got {mu}")));
    }
    let mut rng = seeded_rng(seed, &[0xc4e]);
    let budget = samples.max(8);
    let mut pool = f.anchors();
    pool.extend(domain_samples(f, budget, &mut rng));
    let mut tested = 0usize;
    let mut residual: f64 = 0.0;
    let mut violation: Option<Witness> = None;
    for _ in 0..budget * 8 {
        if tested >= budget {
            break;
        }
        let x0 = &pool[rng.gen_range(0..pool.len())];
        let x1 = &pool[rng.gen_range(0..pool.len())];
        let (f0, f1) = (f.evaluate(x0)?, f.evaluate(x1)?);
        if f0.is_infinite() || f1.is_infinite() {
            continue;
        }
        let d = distance(x0, x1)?;
        if d < 1e-12 {
            continue;
        }
        let t = rng.gen_range(0.05..0.95);
        let g = GeodesicSegment::new(x0.clone(), x1.clone())?;
        let xt = geodesic_point(&g, t)?;
        let ft = f.evaluate(&xt)?;
        tested += 1;
        let bound = (1.0 - t) * f0.value() + t * f1.value() - 0.5 * mu * t * (1.0 - t) * d * d;
        let tol = TOL_CVX * (1.0 + f0.value().abs() + f1.value().abs());
        let excess = if ft.is_infinite() { f64::INFINITY } else { ft.value() - bound };
        if excess > residual {
            residual = excess;
        }
        if excess > tol && violation.as_ref().map_or(true, |w| excess > w.value) {
            violation = Some(Witness {
                point: Some(xt.coords_text()),
                value: excess,
                label: format!(
                    "convexity gap at t={t:.3} between {} and {}",
                    x0.coords_text(),
                    x1.coords_text()
                ),
                ..Witness::default()
            });
        }
    }
    if tested == 0 {
        return Ok(Verdict::inconclusive("no pair of finite-valued sample points found"));
    }
    Ok(match violation {
        Some(w) => Verdict::violated(w),
        None => Verdict::consistent().with_residual(residual),
    })
}

/// Which end of the difference-quotient tail to read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivSide {
    Lower,
    Upper,
}

/// Step sizes `t_k = 2^-k` for `k` in `k_min..=k_max`.
///
/// The default reaches `2^-20`; callers differencing noisy values (sampled
/// envelopes, certified minima) should stop earlier so the quotient noise
/// `eps / t` stays below their tolerance.
#[derive(Clone, Copy, Debug)]
pub struct StepSchedule {
    pub k_min: u32,
    pub k_max: u32,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule { k_min: 3, k_max: 20 }
    }
}

impl StepSchedule {
    pub fn new(k_min: u32, k_max: u32) -> Result<Self> {
        if k_min == 0 || k_max < k_min || k_max > 50 {
            return Err(Error::usage(format!("invalid step schedule k={k_min}..{k_max}")));
        }
        Ok(StepSchedule { k_min, k_max })
    }
}

/// One-sided directional derivative of `f` at `g.start()` along `g`:
/// difference quotients `(f(gamma(t_k)) - f(x)) / (t_k len)` are
/// nonincreasing in `t` for convex `f`, so the tail of the schedule brackets
/// the limit. `Lower` takes the tail minimum, `Upper` the tail maximum; if
/// every step lands outside the domain the derivative is `+inf`.
pub fn directional_derivative(
    f: &ConvexFunctional,
    g: &GeodesicSegment,
    side: DerivSide,
    schedule: StepSchedule,
) -> Result<ExtendedReal> {
    let fx = f.evaluate(g.start())?;
    if fx.is_infinite() {
        return Err(Error::usage(
            "directional derivative needs a finite value at the segment start",
        ));
    }
    let len = g.length();
    if len <= 0.0 {
        return Err(Error::usage("directional derivative needs a nondegenerate segment"));
    }
    let mut quotients = Vec::new();
    for k in schedule.k_min..=schedule.k_max {
        let t = 0.5_f64.powi(k as i32);
        let fy = f.evaluate(&geodesic_point(g, t)?)?;
        if fy.is_finite() {
            quotients.push((fy.value() - fx.value()) / (t * len));
        }
    }
    if quotients.is_empty() {
        return Ok(ExtendedReal::infinity());
    }
    let tail = &quotients[quotients.len().saturating_sub(3)..];
    let v = match side {
        DerivSide::Lower => tail.iter().copied().fold(f64::INFINITY, f64::min),
        DerivSide::Upper => tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(ExtendedReal::finite(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceRegistry;
    use crate::verdict::Status;

    fn line() -> Space {
        SpaceRegistry::builtin().build("kind=euclidean,dim=1").unwrap()
    }

    fn pt(space: &Space, x: f64) -> Point {
        space.point(Coords::Euclidean(vec![x])).unwrap()
    }

    #[test]
    fn library_evaluates_closed_forms() {
        let plane = SpaceRegistry::builtin().build("kind=euclidean,dim=2").unwrap();
        let anchor = plane.point(Coords::Euclidean(vec![0.0, 0.0])).unwrap();
        let x = plane.point(Coords::Euclidean(vec![3.0, 0.0])).unwrap();
        let f = half_sqdist(anchor.clone(), 1.0).unwrap();
        assert!((f.evaluate(&x).unwrap().value() - 4.5).abs() < 1e-12);
        let g = dist_to(anchor, 2.0).unwrap();
        assert!((g.evaluate(&x).unwrap().value() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_matches_region_membership() {
        let space = line();
        let region = Region::interval(pt(&space, 0.0), pt(&space, 1.0)).unwrap();
        let f = indicator(region);
        assert_eq!(f.evaluate(&pt(&space, 0.5)).unwrap(), ExtendedReal::finite(0.0));
        assert!(f.evaluate(&pt(&space, 2.0)).unwrap().is_infinite());
        assert!(!f.anchors().is_empty());
    }

    #[test]
    fn sum_combines_values_and_hints() {
        let space = line();
        let region = Region::interval(pt(&space, 0.0), pt(&space, 1.0)).unwrap();
        let f = weighted_sum(
            vec![indicator(region), abs(&space, 1.0).unwrap()],
            vec![1.0, 2.0],
        )
        .unwrap();
        assert!((f.evaluate(&pt(&space, 0.5)).unwrap().value() - 1.0).abs() < 1e-12);
        assert!(f.evaluate(&pt(&space, -1.0)).unwrap().is_infinite());
        assert!(matches!(f.domain(), DomainHint::Within(_)));
    }

    #[test]
    fn registry_round_trips_descriptors() {
        let space = line();
        let reg = FunctionalRegistry::builtin();
        for text in [
            "f=zero",
            "f=const,value=-2.5",
            "f=abs,weight=1",
            "f=dist,anchor=(0.25),weight=1",
            "f=dist_sq,anchor=(1),weight=0.5",
            "f=indicator,region=[kind=interval,from=(0),to=(1)]",
            "f=sum,terms=[f=abs,weight=1;f=const,value=1],weights=1|3",
            "f=max,terms=[f=abs,weight=1;f=const,value=0.5]",
        ] {
            let f = reg.build(&space, text).unwrap();
            let again = reg.build(&space, &f.descriptor()).unwrap();
            assert_eq!(f.descriptor(), again.descriptor(), "{text}");
            let probe = pt(&space, 0.375);
            assert_eq!(f.evaluate(&probe).unwrap(), again.evaluate(&probe).unwrap(), "{text}");
        }
    }

    #[test]
    fn registry_rejects_unknown_kind() {
        let err = FunctionalRegistry::builtin().build(&line(), "f=cubic").unwrap_err();
        assert!(err.to_string().contains("expected one of"), "{err}");
    }

    #[test]
    fn linear_spider_needs_convex_rates() {
        let spider = SpaceRegistry::builtin().build("kind=spider,legs=3").unwrap();
        assert!(linear_spider(&spider, vec![1.0, -2.0, 0.0], 0.0).is_err());
        let f = linear_spider(&spider, vec![1.0, -0.5, 2.0], 0.25).unwrap();
        let x = spider.point(Coords::Spider { leg: 2, r: 2.0 }).unwrap();
        assert!((f.evaluate(&x).unwrap().value() - (-0.75)).abs() < 1e-12);
    }

    #[test]
    fn convexity_check_accepts_strongly_convex_and_flags_linear_growth() {
        let space = line();
        let f = half_sqdist(pt(&space, 0.5), 1.0).unwrap();
        let v = convexity_check(&f, 1.0, 60, 7).unwrap();
        assert_eq!(v.status, Status::ConsistentWith, "{v:?}");

        let g = abs(&space, 1.0).unwrap();
        assert_eq!(convexity_check(&g, 0.0, 60, 7).unwrap().status, Status::ConsistentWith);
        let strong = convexity_check(&g, 0.5, 60, 7).unwrap();
        assert_eq!(strong.status, Status::Violated, "{strong:?}");
        assert!(!strong.witnesses.is_empty());
    }

    #[test]
    fn convexity_check_on_halfplane_busemann() {
        let hp = SpaceRegistry::builtin().build("kind=halfplane").unwrap();
        let f = linear_halfplane(&hp, 1.0, 0.0).unwrap();
        let v = convexity_check(&f, 0.0, 50, 11).unwrap();
        assert_eq!(v.status, Status::ConsistentWith, "{v:?}");
    }

    #[test]
    fn directional_derivative_reads_known_slopes() {
        let space = line();
        let origin = pt(&space, 0.0);
        let toward_one = GeodesicSegment::new(origin.clone(), pt(&space, 1.0)).unwrap();
        let f = abs(&space, 1.0).unwrap();
        let d = directional_derivative(&f, &toward_one, DerivSide::Lower, StepSchedule::default())
            .unwrap();
        assert!((d.value() - 1.0).abs() < 1e-9, "{d}");

        let q = half_sqdist(origin, 1.0).unwrap();
        let dq = directional_derivative(&q, &toward_one, DerivSide::Upper, StepSchedule::default())
            .unwrap();
        assert!(dq.value().abs() < 1e-5, "{dq}");
    }

    #[test]
    fn directional_derivative_outside_domain_is_infinite() {
        let space = line();
        let region = Region::interval(pt(&space, 0.0), pt(&space, 1.0)).unwrap();
        let f = indicator(region);
        let g = GeodesicSegment::new(pt(&space, 1.0), pt(&space, 2.0)).unwrap();
        let d = directional_derivative(&f, &g, DerivSide::Lower, StepSchedule::default()).unwrap();
        assert!(d.is_infinite());

        let back = GeodesicSegment::new(pt(&space, 1.0), pt(&space, 0.0)).unwrap();
        let db = directional_derivative(&f, &back, DerivSide::Lower, StepSchedule::default())
            .unwrap();
        assert!(db.value().abs() < 1e-12);
    }

    #[test]
    fn families_produce_expected_members() {
        let space = line();
        let fam = FamilyRegistry::builtin();

        let shifted = fam.build(&space, "family=shifted_abs").unwrap();
        let f4 = shifted.at(4);
        assert!((f4.evaluate(&pt(&space, 0.25)).unwrap().value()).abs() < 1e-12);
        assert!((f4.evaluate(&pt(&space, 1.25)).unwrap().value() - 1.0).abs() < 1e-12);

        let osc = fam.build(&space, "family=oscillating").unwrap();
        assert_eq!(osc.at(1).evaluate(&pt(&space, 3.0)).unwrap(), ExtendedReal::finite(0.0));
        assert_eq!(osc.at(2).evaluate(&pt(&space, 3.0)).unwrap(), ExtendedReal::finite(1.0));

        let steep = fam.build(&space, "family=steepening_quadratic").unwrap();
        let f3 = steep.at(3);
        assert!((f3.evaluate(&pt(&space, 2.0)).unwrap().value() - 12.0).abs() < 1e-12);

        let err = fam.build(&space, "family=mystery").unwrap_err();
        assert!(err.to_string().contains("expected one of"), "{err}");
    }

    #[test]
    fn interval_families_shrink_and_grow() {
        let space = line();
        let fam = SetFamilyRegistry::builtin();
        let shrink = fam.build(&space, "family=interval_shrink").unwrap();
        let c4 = shrink.at(4);
        assert!(c4.contains(&pt(&space, 1.2)).unwrap());
        assert!(!c4.contains(&pt(&space, 1.3)).unwrap());

        let grow = fam.build(&space, "family=interval_grow").unwrap();
        let g4 = grow.at(4);
        assert!(g4.contains(&pt(&space, 0.75)).unwrap());
        assert!(!g4.contains(&pt(&space, 0.8)).unwrap());

        let ind = indicator_sequence(&grow);
        assert!(ind.at(4).evaluate(&pt(&space, 0.9)).unwrap().is_infinite());
    }

    #[test]
    fn properness_witness_finds_domain_and_rejects_empty() {
        let space = line();
        let region = Region::interval(pt(&space, 4.0), pt(&space, 5.0)).unwrap();
        let f = indicator(region);
        let w = properness_witness(&f, 64, 3).unwrap();
        assert!(f.evaluate(&w).unwrap().is_finite());

        let clash = weighted_sum(
            vec![
                indicator(Region::interval(pt(&space, 0.0), pt(&space, 1.0)).unwrap()),
                indicator(Region::interval(pt(&space, 3.0), pt(&space, 4.0)).unwrap()),
            ],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(properness_witness(&clash, 64, 3), Err(Error::NotProper(_))));
    }
}
