//! Proximal mappings, Moreau envelopes, and descent slopes.
//!
//! The prox solver minimizes `phi(y) = f(y) + d(y,x)^2 / (2 lambda)` by
//! multi-start alternating geodesic line searches. The quadratic term makes
//! `phi` strongly convex along every geodesic, so each one-dimensional
//! search is unimodal and the minimizer is unique; an audit pass then checks
//! the strong-convexity certificate
//!
//! ```text
//! phi(z) + d(z, w)^2 / (2 lambda) <= phi(w)
//! ```
//!
//! on sample points `w` before the result is reported as converged.

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::functional::{domain_samples, properness_witness, ConvexFunctional, DomainHint, Functional};
use crate::minimize::{line_minimize, mix_seed, seeded_rng};
use crate::space::{Coords, Point, Space};
use crate::tolerances::{MAX_ITER, SLOPE_CAP, TOL_1D, TOL_MIN, TOL_POINT, TOL_SLOPE};
use crate::verdict::{CheckRole, SubCheck, Verdict, Witness};

/// Settings for one proximal solve.
#[derive(Clone, Copy, Debug)]
pub struct ProxParams {
    pub lambda: f64,
    /// Certificate tolerance, relative to `1 + |phi|`.
    pub tol_min: f64,
    /// Search-radius floor: the ring of probe directions shrinks to this
    /// scale before the solve stops.
    pub tol_point: f64,
    /// Cap on geodesic line searches.
    pub max_iter: usize,
    pub seed: u64,
}

impl ProxParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::usage(format!("prox step lambda must be positive, got {lambda}")));
        }
        Ok(ProxParams {
            lambda,
            tol_min: TOL_MIN,
            tol_point: TOL_POINT,
            max_iter: MAX_ITER,
            seed: 0,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of a proximal solve.
#[derive(Clone, Debug)]
pub struct ProxResult {
    pub minimizer: Point,
    /// `f` at the minimizer.
    pub f_value: f64,
    /// The envelope value `phi` at the minimizer.
    pub envelope: f64,
    /// Worst observed violation of the strong-convexity certificate.
    pub certificate_residual: f64,
    /// Geodesic line searches performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Mixes every coordinate of a point into a seed tag so solves are
/// reproducible independent of call order.
pub(crate) fn coords_tag(c: &Coords) -> u64 {
    fn fold(c: &Coords, acc: u64) -> u64 {
        match c {
            Coords::Euclidean(v) => {
                v.iter().fold(acc, |a, x| mix_seed(a, &[x.to_bits()]))
            }
            Coords::HalfPlane { x, y } => mix_seed(acc, &[x.to_bits(), y.to_bits()]),
            Coords::Spider { leg, r } => mix_seed(acc, &[*leg as u64, r.to_bits()]),
            Coords::Product(parts) => parts.iter().fold(acc, |a, p| fold(p, a)),
        }
    }
    fold(c, 0x9d2c_5680)
}

struct Solver<'a> {
    f: &'a ConvexFunctional,
    space: Space,
    x: Coords,
    lambda: f64,
}

impl Solver<'_> {
    fn phi(&self, y: &Coords) -> f64 {
        let fy = self.f.eval_coords(y);
        if fy.is_infinite() {
            return f64::INFINITY;
        }
        let d = self.space.distance_coords(y, &self.x);
        fy.value() + d * d / (2.0 * self.lambda)
    }

    /// Minimize `phi` along the geodesic from `a` to `b`; returns the best
    /// point, its value, and the evaluation count.
    fn search(&self, a: &Coords, b: &Coords) -> (Coords, f64, usize) {
        let mut obj = |t: f64| {
            let p = self.space.model().interpolate(a, b, t.clamp(0.0, 1.0));
            self.phi(&p)
        };
        let lm = line_minimize(&mut obj, 0.0, 1.0, TOL_1D);
        let p = self.space.model().interpolate(a, b, lm.t.clamp(0.0, 1.0));
        (p, lm.value, lm.evals)
    }
}

/// Proximal point `J_lambda x = argmin_y f(y) + d(y,x)^2 / (2 lambda)`.
pub fn prox(f: &ConvexFunctional, x: &Point, params: &ProxParams) -> Result<ProxResult> {
    prox_with_starts(f, x, params, &[])
}

/// Proximal solve with extra warm-start candidates (used by continuity
/// probes and envelope evaluation, which revisit nearby subproblems).
pub fn prox_with_starts(
    f: &ConvexFunctional,
    x: &Point,
    params: &ProxParams,
    extra: &[Point],
) -> Result<ProxResult> {
    f.evaluate(x)?;
    if !params.lambda.is_finite() || params.lambda <= 0.0 {
        return Err(Error::usage(format!("prox step lambda must be positive, got {}", params.lambda)));
    }
    let space = f.space().clone();
    let mut rng = seeded_rng(
        params.seed,
        &[0x9e0c, params.lambda.to_bits(), coords_tag(x.coords())],
    );

    let mut starts: Vec<Point> = vec![x.clone()];
    starts.extend_from_slice(extra);
    starts.extend(f.anchors());
    let region = match f.domain() {
        DomainHint::Within(r) => Some(r),
        DomainHint::Everywhere => None,
    };
    if let Some(r) = &region {
        starts.push(r.project(x)?);
        starts.extend(r.anchor_points());
    }
    starts.extend(domain_samples(f, 8, &mut rng));

    let solver = Solver { f, space: space.clone(), x: x.coords().clone(), lambda: params.lambda };

    let mut best: Option<(Coords, f64)> = None;
    for s in &starts {
        let v = solver.phi(s.coords());
        if v.is_finite() && best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((s.coords().clone(), v));
        }
    }
    if best.is_none() {
        let w = properness_witness(f, 256, mix_seed(params.seed, &[0x11f]))?;
        best = Some((w.coords().clone(), solver.phi(w.coords())));
    }
    let (mut best_c, mut best_v) = best.expect("finite start");

    let mut anchors: Vec<Coords> = Vec::new();
    for s in &starts {
        if anchors.len() >= 8 {
            break;
        }
        if !anchors.iter().any(|a| space.distance_coords(a, s.coords()) < 1e-12) {
            anchors.push(s.coords().clone());
        }
    }

    let mut searches = 0usize;
    // Seed pass: one line search from the base point toward every distinct
    // start. When the minimizer lies on one of these geodesics (anchor
    // interpolation, domain projection) the parabolic polish lands on it to
    // near machine accuracy, which the ring phase cannot reach from a
    // generic position once improvements fall below round-off.
    for w in &anchors {
        if space.distance_coords(x.coords(), w) < 1e-15 {
            continue;
        }
        let (p, v, _evals) = solver.search(x.coords(), w);
        searches += 1;
        if v < best_v {
            best_c = p;
            best_v = v;
        }
    }

    let scale = region.as_ref().map_or(1.0, |r| r.scale().max(1.0));
    let mut radius = space
        .distance_coords(&best_c, x.coords())
        .max(0.1 * scale)
        .max(params.lambda.min(1.0));
    // Terminal point error runs a few multiples of the floor in higher
    // dimensions, so the floor sits well under tol_point.
    let floor = (params.tol_point * 0.02).max(1e-12);
    let mut rounds = 0usize;
    while searches < params.max_iter && rounds < 400 {
        rounds += 1;
        let here = space.point(best_c.clone()).expect("solver keeps coords valid");
        let mut targets: Vec<Coords> = vec![x.coords().clone()];
        targets.extend(anchors.iter().cloned());
        for _ in 0..4 {
            targets.push(space.sample_near(&here, radius, &mut rng).coords().clone());
        }
        let accept = 8.0 * f64::EPSILON * (1.0 + best_v.abs());
        let mut improved = false;
        let mut best_move = 0.0f64;
        for w in &targets {
            if searches >= params.max_iter {
                break;
            }
            if space.distance_coords(&best_c, w) < 1e-15 {
                continue;
            }
            let (p, v, _evals) = solver.search(&best_c, w);
            searches += 1;
            // Sub-noise improvements are round-off, and keeping them lets
            // the point drift around the noise basin of the minimizer, so
            // a move must clear the fp threshold.
            if best_v - v > accept {
                let moved = space.distance_coords(&best_c, &p);
                improved = true;
                best_move = best_move.max(moved);
                best_c = p;
                best_v = v;
            }
        }
        if improved {
            if best_move > 0.8 * radius {
                radius = (radius * 2.0).min(1e6);
            }
        } else {
            radius *= 0.5;
        }
        if radius <= floor {
            break;
        }
    }

    // Certificate audit: phi(w) must dominate the quadratic lower cone from
    // the reported minimizer.
    let here = space.point(best_c.clone()).expect("solver keeps coords valid");
    let mut audit: Vec<Coords> = vec![x.coords().clone()];
    audit.extend(anchors.iter().cloned());
    for k in 0..24 {
        let r = radius.max(params.tol_point) * 2.0_f64.powi(k % 6) * 10.0_f64.powi(-(k / 6));
        audit.push(space.sample_near(&here, r, &mut rng).coords().clone());
    }
    if let Some(r) = &region {
        for _ in 0..8 {
            if let Ok(p) = r.sample(&mut rng) {
                audit.push(p.coords().clone());
            }
        }
    }
    let mut residual = 0.0f64;
    let mut phi_lipschitz = 0.0f64;
    for w in &audit {
        let pv = solver.phi(w);
        if pv.is_finite() {
            let dzw = space.distance_coords(&best_c, w);
            residual = residual.max(best_v + dzw * dzw / (2.0 * params.lambda) - pv);
            if dzw > params.tol_point {
                phi_lipschitz = phi_lipschitz.max((pv - best_v).abs() / dzw);
            }
        }
    }
    // A minimizer off by tol_point violates the cone inequality by up to
    // that error times the local slope of phi, so the acceptance threshold
    // carries both terms.
    let allowed =
        params.tol_min * (1.0 + best_v.abs()) + 2.0 * params.tol_point * phi_lipschitz;

    let f_value = f.eval_coords(&best_c).value();
    Ok(ProxResult {
        minimizer: here,
        f_value,
        envelope: best_v,
        certificate_residual: residual,
        iterations: searches,
        converged: residual <= allowed,
    })
}

/// Moreau envelope value `f_lambda(x)`.
pub fn moreau_envelope(f: &ConvexFunctional, x: &Point, lambda: f64, seed: u64) -> Result<f64> {
    Ok(prox(f, x, &ProxParams::new(lambda)?.with_seed(seed))?.envelope)
}

#[derive(Debug)]
struct EnvelopeFunctional {
    inner: ConvexFunctional,
    lambda: f64,
    seed: u64,
    starts: Vec<Point>,
}

impl Functional for EnvelopeFunctional {
    fn space(&self) -> &Space {
        self.inner.space()
    }

    fn eval_coords(&self, c: &Coords) -> ExtendedReal {
        let x = self.space().point(c.clone()).expect("validated coords");
        let params = ProxParams { seed: self.seed, ..ProxParams::new(self.lambda).expect("validated lambda") };
        let res = prox_with_starts(&self.inner, &x, &params, &self.starts)
            .expect("envelope of a proper functional is finite");
        ExtendedReal::finite(res.envelope)
    }

    fn descriptor(&self) -> String {
        format!("f=envelope,lambda={},of=[{}]", self.lambda, self.inner.descriptor())
    }

    fn anchors(&self) -> Vec<Point> {
        self.inner.anchors()
    }
}

/// The envelope `f_lambda` as a functional in its own right: finite
/// everywhere, convex, and evaluated by an inner proximal solve (so values
/// carry the solver tolerance, roughly `tol_min`).
pub fn envelope_functional(f: &ConvexFunctional, lambda: f64, seed: u64) -> Result<ConvexFunctional> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::usage(format!("envelope step lambda must be positive, got {lambda}")));
    }
    let witness = properness_witness(f, 256, mix_seed(seed, &[0x3aa]))?;
    let mut starts = vec![witness];
    starts.extend(f.anchors());
    Ok(ConvexFunctional::new(EnvelopeFunctional { inner: f.clone(), lambda, seed, starts }))
}

/// A sampled estimate of the descent slope
/// `|df|(x) = sup_y max(f(x) - f(y), 0) / d(x, y)`.
///
/// Every evaluated ratio is a valid lower bound, so the estimate never
/// exceeds the true slope; stratified shells around `x` plus ray refinement
/// toward the best witnesses make it sharp on the built-in library.
#[derive(Clone, Debug)]
pub struct SlopeEstimate {
    pub value: ExtendedReal,
    pub witness: Option<Point>,
    pub samples: usize,
}

pub fn slope(f: &ConvexFunctional, x: &Point, budget: usize, seed: u64) -> Result<SlopeEstimate> {
    let fx = f.evaluate(x)?;
    if fx.is_infinite() {
        return Ok(SlopeEstimate { value: ExtendedReal::infinity(), witness: None, samples: 0 });
    }
    let fx = fx.value();
    let space = f.space().clone();
    let mut rng = seeded_rng(seed, &[0x510e, coords_tag(x.coords())]);
    let budget = budget.max(16);

    let mut pool = f.anchors();
    pool.extend(domain_samples(f, budget, &mut rng));
    for k in 0..10 {
        let r = 2.0_f64.powi(-k);
        pool.push(space.sample_near(x, r, &mut rng));
        pool.push(space.sample_near(x, r, &mut rng));
    }

    // Below this distance the difference f(x) - f(y) carries only rounding
    // noise, which divided by d would swamp TOL_SLOPE; such samples are
    // discarded so every kept ratio is a genuine lower bound.
    let d_floor = 64.0 * f64::EPSILON * (1.0 + fx.abs()) / TOL_SLOPE;
    let ratio = |y: &Coords| -> f64 {
        let fy = f.eval_coords(y);
        if fy.is_infinite() {
            return 0.0;
        }
        let d = space.distance_coords(x.coords(), y);
        if d < d_floor {
            return 0.0;
        }
        ((fx - fy.value()) / d).max(0.0)
    };

    let mut samples = 0usize;
    let mut scored: Vec<(f64, Coords)> = pool
        .iter()
        .map(|p| {
            samples += 1;
            (ratio(p.coords()), p.coords().clone())
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut best = 0.0f64;
    let mut best_y: Option<Coords> = None;
    if let Some((r0, y0)) = scored.first() {
        if *r0 > 0.0 {
            best = *r0;
            best_y = Some(y0.clone());
        }
    }

    // Ray refinement: for convex f the ratio along a geodesic toward x is
    // nondecreasing as t drops, so small steps recover the directional
    // slope.
    for (r0, y) in scored.iter().take(5) {
        if *r0 <= 0.0 {
            break;
        }
        for k in 1..=26 {
            let t = 2.0_f64.powi(-k);
            let p = space.model().interpolate(x.coords(), y, t);
            let r = ratio(&p);
            samples += 1;
            if r > best {
                best = r;
                best_y = Some(p);
            }
        }
    }

    // Pattern polish around the best witness direction.
    if let Some(center) = best_y.clone() {
        let c = space.point(center).expect("witness coords valid");
        let base = space.distance_coords(x.coords(), c.coords()).max(1e-9);
        for mult in [0.5, 0.1, 0.02] {
            for _ in 0..6 {
                let p = space.sample_near(&c, mult * base, &mut rng);
                let r = ratio(p.coords());
                samples += 1;
                if r > best {
                    best = r;
                    best_y = Some(p.coords().clone());
                }
            }
        }
    }

    let value = if best > SLOPE_CAP { ExtendedReal::infinity() } else { ExtendedReal::finite(best) };
    let witness = best_y.map(|c| space.point(c).expect("witness coords valid"));
    Ok(SlopeEstimate { value, witness, samples })
}

/// Checks the resolvent and envelope identities at one base point over a
/// grid of step sizes:
///
/// * `ubound`: `|df|(J_lambda x) <= d(J_lambda x, x) / lambda`;
/// * `id2`: `(f(x) - f_lambda(x)) / lambda <= |df|(x)^2 / 2`;
/// * `id1_limit`: `J_lambda x` approaches the projection of `x` onto the
///   closed domain as `lambda` drops, at the Lipschitz rate `2 lambda L`;
/// * `id1_continuity`: `lambda -> J_lambda x` moves little under a one
///   percent step change;
/// * `envelope_monotone`: `f_lambda(x)` is nondecreasing as `lambda` drops,
///   bounded by `f(x)`, with gap at most `lambda |df|(x)^2 / 2`.
pub fn verify_prox_lemmas(
    f: &ConvexFunctional,
    x: &Point,
    lambdas: &[f64],
    seed: u64,
) -> Result<Vec<SubCheck>> {
    if lambdas.is_empty() {
        return Err(Error::usage("lemma checks need at least one lambda"));
    }
    for l in lambdas {
        if !l.is_finite() || *l <= 0.0 {
            return Err(Error::usage(format!("lambda grid must be positive, got {l}")));
        }
    }
    let mut lams = lambdas.to_vec();
    lams.sort_by(|a, b| b.partial_cmp(a).unwrap());
    lams.dedup();

    let mut solves = Vec::with_capacity(lams.len());
    for &l in &lams {
        solves.push(prox(f, x, &ProxParams::new(l)?.with_seed(seed))?);
    }
    let slopes: Vec<SlopeEstimate> = solves
        .iter()
        .map(|res| slope(f, &res.minimizer, 200, seed))
        .collect::<Result<_>>()?;
    let fx = f.evaluate(x)?;
    let mut checks = Vec::new();

    // (a) slope bound at the proximal point.
    {
        let mut verdict = Verdict::consistent().with_residual(0.0);
        let mut residual = 0.0f64;
        for ((l, res), s) in lams.iter().zip(&solves).zip(&slopes) {
            let bound = crate::space::distance(&res.minimizer, x)? / l;
            let margin = s.value.value() - bound;
            residual = residual.max(margin.max(0.0));
            if margin > TOL_SLOPE * (1.0 + bound) {
                verdict = Verdict::violated(Witness {
                    point: Some(res.minimizer.coords_text()),
                    lambda: Some(*l),
                    value: margin,
                    label: "slope at prox point exceeds d(J x, x) / lambda".into(),
                    ..Witness::default()
                });
                break;
            }
        }
        if verdict.status == crate::verdict::Status::ConsistentWith {
            verdict = Verdict::consistent().with_residual(residual);
        }
        checks.push(SubCheck { name: "ubound".into(), role: CheckRole::Conclusion, verdict });
    }

    // (b) envelope gap against the squared slope.
    let slope_at_x = slope(f, x, 200, seed)?;
    {
        let verdict = if fx.is_infinite() {
            Verdict::inconclusive("base point lies outside the effective domain")
        } else if slope_at_x.value.is_infinite() {
            Verdict::consistent().with_note("slope at base point unbounded; gap bound is trivial")
        } else {
            let rhs = slope_at_x.value.value().powi(2) / 2.0;
            let mut verdict = Verdict::consistent();
            let mut residual = 0.0f64;
            for (l, res) in lams.iter().zip(&solves) {
                let lhs = (fx.value() - res.envelope) / l;
                let margin = lhs - rhs;
                residual = residual.max(margin.max(0.0));
                if margin > TOL_SLOPE * (1.0 + rhs) {
                    verdict = Verdict::violated(Witness {
                        lambda: Some(*l),
                        value: margin,
                        label: "(f - f_lambda) / lambda exceeds |df|^2 / 2".into(),
                        ..Witness::default()
                    });
                    break;
                }
            }
            if verdict.status == crate::verdict::Status::ConsistentWith {
                verdict = verdict.with_residual(residual);
            }
            verdict
        };
        checks.push(SubCheck { name: "id2".into(), role: CheckRole::Conclusion, verdict });
    }

    // (c) resolvent limit toward the domain projection.
    let projection = match f.domain() {
        DomainHint::Within(r) => r.project(x)?,
        DomainHint::Everywhere => x.clone(),
    };
    {
        let l_min = *lams.last().expect("nonempty");
        let res = solves.last().expect("nonempty");
        let lip = slopes.last().expect("nonempty").value.value().min(SLOPE_CAP);
        let d = crate::space::distance(&res.minimizer, &projection)?;
        let bound = 2.0 * l_min * (lip + 1.0) + 10.0 * TOL_POINT;
        let verdict = if d <= bound {
            Verdict::consistent().with_residual(d)
        } else {
            Verdict::violated(Witness {
                point: Some(res.minimizer.coords_text()),
                lambda: Some(l_min),
                value: d,
                label: format!(
                    "prox point sits {d:.3e} from the domain projection, above the {bound:.3e} rate bound"
                ),
                ..Witness::default()
            })
        };
        checks.push(SubCheck { name: "id1_limit".into(), role: CheckRole::Conclusion, verdict });
    }

    // (c') continuity of lambda -> J_lambda x.
    {
        let mut verdict = Verdict::consistent().with_residual(0.0);
        let mut residual = 0.0f64;
        for (l, res) in lams.iter().zip(&solves) {
            let nearby = prox_with_starts(
                f,
                x,
                &ProxParams::new(l * 1.01)?.with_seed(seed),
                std::slice::from_ref(&res.minimizer),
            )?;
            let step = crate::space::distance(&nearby.minimizer, &res.minimizer)?;
            let dx = crate::space::distance(&res.minimizer, x)?;
            let tol = 0.05 * (1e-6 + dx) + 1e-6;
            residual = residual.max(step);
            if step > tol {
                verdict = Verdict::violated(Witness {
                    lambda: Some(*l),
                    value: step,
                    label: "one percent step change moved the prox point discontinuously".into(),
                    ..Witness::default()
                });
                break;
            }
        }
        if verdict.status == crate::verdict::Status::ConsistentWith {
            verdict = Verdict::consistent().with_residual(residual);
        }
        checks.push(SubCheck { name: "id1_continuity".into(), role: CheckRole::Conclusion, verdict });
    }

    // (d) envelope monotonicity and limit.
    {
        let mut verdict = Verdict::consistent();
        let mut residual = 0.0f64;
        for pair in solves.windows(2) {
            // lams is descending, so envelopes may only rise along the walk.
            let drop = pair[0].envelope - pair[1].envelope;
            residual = residual.max(drop.max(0.0));
            if drop > 10.0 * TOL_MIN * (1.0 + pair[0].envelope.abs()) {
                verdict = Verdict::violated(Witness {
                    value: drop,
                    label: "envelope decreased as lambda dropped".into(),
                    ..Witness::default()
                });
                break;
            }
        }
        if verdict.status == crate::verdict::Status::ConsistentWith && fx.is_finite() {
            for (l, res) in lams.iter().zip(&solves) {
                let above = res.envelope - fx.value();
                residual = residual.max(above.max(0.0));
                if above > 10.0 * TOL_MIN * (1.0 + fx.value().abs()) {
                    verdict = Verdict::violated(Witness {
                        lambda: Some(*l),
                        value: above,
                        label: "envelope exceeded the function value".into(),
                        ..Witness::default()
                    });
                    break;
                }
            }
        }
        if verdict.status == crate::verdict::Status::ConsistentWith
            && fx.is_finite()
            && slope_at_x.value.is_finite()
        {
            let l_min = *lams.last().expect("nonempty");
            let gap = fx.value() - solves.last().expect("nonempty").envelope;
            let bound = l_min * slope_at_x.value.value().powi(2) / 2.0 + TOL_SLOPE * (1.0 + fx.value().abs());
            residual = residual.max(gap.max(0.0));
            if gap > bound {
                verdict = Verdict::violated(Witness {
                    lambda: Some(l_min),
                    value: gap,
                    label: "envelope fails to approach the function value as lambda drops".into(),
                    ..Witness::default()
                });
            }
        }
        if verdict.status == crate::verdict::Status::ConsistentWith {
            verdict = verdict.with_residual(residual);
        }
        checks.push(SubCheck { name: "envelope_monotone".into(), role: CheckRole::Conclusion, verdict });
    }

    Ok(checks)
}
