//! Property tests for the structural invariants the library is built on:
//! metric axioms, constant-speed geodesics, the CAT(0) comparison and
//! strong-convexity inequalities, convexity of the functional library, and
//! the variational inequalities of proximal mappings and projections.
//!
//! Every property is quantified over all four model spaces with shared
//! coordinate draws, so a regression in one geometry cannot hide behind
//! the others.

use hadamard::functional::{abs, dist_to, half_sqdist, weighted_sum, ConvexFunctional};
use hadamard::prox::{prox, ProxParams};
use hadamard::region::Region;
use hadamard::space::{
    cat0_comparison_check, distance, geodesic_point, project_to_geodesic, Coords,
    GeodesicSegment, Point, Space, SpaceRegistry,
};
use hadamard::Status;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Raw coordinate material for one point, interpretable in every model.
#[derive(Clone, Debug)]
struct Draw {
    x1: f64,
    x2: f64,
    y: f64,
    leg: usize,
    r: f64,
}

/// Strategy for a coordinate draw with moderate, finite ranges.
fn draw() -> impl Strategy<Value = Draw> {
    (-5.0..5.0f64, -5.0..5.0f64, 0.05..8.0f64, 1usize..=3, 0.0..6.0f64)
        .prop_map(|(x1, x2, y, leg, r)| Draw { x1, x2, y, leg, r })
}

/// The four built-in model spaces.
fn spaces() -> Vec<Space> {
    let reg = SpaceRegistry::builtin();
    vec![
        reg.build("kind=euclidean,dim=2").unwrap(),
        reg.build("kind=halfplane").unwrap(),
        reg.build("kind=spider,legs=3").unwrap(),
        reg.build("kind=product,factors=[kind=euclidean,dim=2;kind=spider,legs=3]").unwrap(),
    ]
}

/// Realizes a draw as a point of the given space.
fn to_point(space: &Space, d: &Draw) -> Point {
    let coords = match space.kind() {
        "euclidean" => Coords::Euclidean(vec![d.x1, d.x2]),
        "halfplane" => Coords::HalfPlane { x: d.x1, y: d.y },
        "spider" => Coords::Spider { leg: d.leg, r: d.r },
        _ => Coords::Product(vec![
            Coords::Euclidean(vec![d.x1, d.x2]),
            Coords::Spider { leg: d.leg, r: d.r },
        ]),
    };
    space.point(coords).unwrap()
}

/// One term of a random library functional.
#[derive(Clone, Debug)]
struct TermDraw {
    kind: usize,
    weight: f64,
    anchor: Draw,
}

fn term_draw() -> impl Strategy<Value = TermDraw> {
    (0usize..3, 0.2..2.0f64, draw()).prop_map(|(kind, weight, anchor)| TermDraw {
        kind,
        weight,
        anchor,
    })
}

/// A weighted sum of one to three anchor-based library functionals.
fn to_functional(space: &Space, terms: &[TermDraw]) -> ConvexFunctional {
    let mut parts = Vec::new();
    let mut weights = Vec::new();
    for t in terms {
        let a = to_point(space, &t.anchor);
        let f = match t.kind {
            0 => half_sqdist(a, 1.0).unwrap(),
            1 => dist_to(a, 1.0).unwrap(),
            _ => abs(space, 1.0).unwrap(),
        };
        parts.push(f);
        weights.push(t.weight);
    }
    weighted_sum(parts, weights).unwrap()
}

proptest! {
    /// The distance is symmetric, vanishes on the diagonal, and satisfies
    /// the triangle inequality in every model.
    #[test]
    fn metric_axioms_hold_on_every_model(a in draw(), b in draw(), c in draw()) {
        for space in spaces() {
            let (pa, pb, pc) = (to_point(&space, &a), to_point(&space, &b), to_point(&space, &c));
            let dab = distance(&pa, &pb).unwrap();
            let dba = distance(&pb, &pa).unwrap();
            prop_assert!(dab >= 0.0, "{}: negative distance {dab}", space.descriptor());
            prop_assert!(
                (dab - dba).abs() <= 1e-12 * (1.0 + dab),
                "{}: asymmetry {dab} vs {dba}",
                space.descriptor()
            );
            let daa = distance(&pa, &pa).unwrap();
            prop_assert!(daa <= 1e-12, "{}: d(a,a) = {daa}", space.descriptor());
            let dac = distance(&pa, &pc).unwrap();
            let dbc = distance(&pb, &pc).unwrap();
            prop_assert!(
                dac <= dab + dbc + 1e-9 * (1.0 + dac),
                "{}: triangle violated: {dac} > {dab} + {dbc}",
                space.descriptor()
            );
        }
    }

    /// Geodesics hit their endpoints and run at constant speed:
    /// d(gamma(s), gamma(t)) = |s - t| d(a, b).
    #[test]
    fn geodesics_run_at_constant_speed(
        a in draw(),
        b in draw(),
        s in 0.0..=1.0f64,
        t in 0.0..=1.0f64,
    ) {
        for space in spaces() {
            let (pa, pb) = (to_point(&space, &a), to_point(&space, &b));
            let d = distance(&pa, &pb).unwrap();
            let g = GeodesicSegment::new(pa.clone(), pb.clone()).unwrap();
            let start_gap = distance(&geodesic_point(&g, 0.0).unwrap(), &pa).unwrap();
            let end_gap = distance(&geodesic_point(&g, 1.0).unwrap(), &pb).unwrap();
            prop_assert!(start_gap <= 1e-9 * (1.0 + d), "{}: start gap {start_gap}", space.descriptor());
            prop_assert!(end_gap <= 1e-9 * (1.0 + d), "{}: end gap {end_gap}", space.descriptor());
            let ps = geodesic_point(&g, s).unwrap();
            let pt = geodesic_point(&g, t).unwrap();
            let dst = distance(&ps, &pt).unwrap();
            prop_assert!(
                (dst - (s - t).abs() * d).abs() <= 1e-8 * (1.0 + d),
                "{}: speed defect at s={s}, t={t}: {dst} vs {}",
                space.descriptor(),
                (s - t).abs() * d
            );
        }
    }

    /// The defining NPC inequality: squared distance to any witness point
    /// is 2-strongly convex along every geodesic,
    /// d(gamma_t, w)^2 <= (1-t) d(a,w)^2 + t d(b,w)^2 - t(1-t) d(a,b)^2.
    #[test]
    fn squared_distance_is_strongly_convex_along_geodesics(
        a in draw(),
        b in draw(),
        w in draw(),
        t in 0.0..=1.0f64,
    ) {
        for space in spaces() {
            let (pa, pb, pw) = (to_point(&space, &a), to_point(&space, &b), to_point(&space, &w));
            let g = GeodesicSegment::new(pa.clone(), pb.clone()).unwrap();
            let pt = geodesic_point(&g, t).unwrap();
            let lhs = distance(&pt, &pw).unwrap().powi(2);
            let daw = distance(&pa, &pw).unwrap().powi(2);
            let dbw = distance(&pb, &pw).unwrap().powi(2);
            let dab = distance(&pa, &pb).unwrap().powi(2);
            let rhs = (1.0 - t) * daw + t * dbw - t * (1.0 - t) * dab;
            prop_assert!(
                lhs <= rhs + 1e-8 * (1.0 + rhs.abs()),
                "{}: NPC inequality violated at t={t}: {lhs} > {rhs}",
                space.descriptor()
            );
        }
    }

    /// Sampled comparison triangles are never thinner than their Euclidean
    /// counterparts (degenerate draws report Inconclusive, never Violated).
    #[test]
    fn comparison_triangles_never_violate_cat0(
        a in draw(),
        b in draw(),
        c in draw(),
        seed in any::<u64>(),
    ) {
        for space in spaces() {
            let (pa, pb, pc) = (to_point(&space, &a), to_point(&space, &b), to_point(&space, &c));
            let verdict = cat0_comparison_check(&pa, &pb, &pc, 16, seed).unwrap();
            prop_assert!(
                verdict.status != Status::Violated,
                "{}: {:?}",
                space.descriptor(),
                verdict
            );
        }
    }

    /// Every library functional is convex along geodesics:
    /// f(gamma_t) <= (1-t) f(a) + t f(b).
    #[test]
    fn library_functionals_are_geodesically_convex(
        terms in prop::collection::vec(term_draw(), 1..=3),
        a in draw(),
        b in draw(),
        t in 0.0..=1.0f64,
    ) {
        for space in spaces() {
            let f = to_functional(&space, &terms);
            let (pa, pb) = (to_point(&space, &a), to_point(&space, &b));
            let g = GeodesicSegment::new(pa.clone(), pb.clone()).unwrap();
            let pt = geodesic_point(&g, t).unwrap();
            let fa = f.evaluate(&pa).unwrap().value();
            let fb = f.evaluate(&pb).unwrap().value();
            let ft = f.evaluate(&pt).unwrap().value();
            let chord = (1.0 - t) * fa + t * fb;
            prop_assert!(
                ft <= chord + 1e-9 * (1.0 + chord.abs()),
                "{}: convexity violated at t={t}: {ft} > {chord} for {}",
                space.descriptor(),
                f.descriptor()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The proximal mapping is nonexpansive up to solver tolerance:
    /// d(J_lambda x, J_lambda y) <= d(x, y).
    #[test]
    fn prox_is_nonexpansive(
        terms in prop::collection::vec(term_draw(), 1..=2),
        x in draw(),
        y in draw(),
        lambda in 0.2..1.5f64,
        seed in any::<u64>(),
    ) {
        for space in spaces() {
            let f = to_functional(&space, &terms);
            let (px, py) = (to_point(&space, &x), to_point(&space, &y));
            let params = ProxParams::new(lambda).unwrap().with_seed(seed);
            let jx = prox(&f, &px, &params).unwrap();
            let jy = prox(&f, &py, &params).unwrap();
            let dj = distance(&jx.minimizer, &jy.minimizer).unwrap();
            let dxy = distance(&px, &py).unwrap();
            prop_assert!(
                dj <= dxy + 5e-6 * (1.0 + dxy),
                "{}: prox expanded {dxy} to {dj} for {}",
                space.descriptor(),
                f.descriptor()
            );
        }
    }

    /// The envelope sits between the minimum and the function value, and
    /// the solver result is at least as good as random candidates.
    #[test]
    fn envelope_brackets_and_dominates_sampled_candidates(
        terms in prop::collection::vec(term_draw(), 1..=2),
        x in draw(),
        lambda in 0.2..1.5f64,
        seed in any::<u64>(),
    ) {
        for space in spaces() {
            let f = to_functional(&space, &terms);
            let px = to_point(&space, &x);
            let params = ProxParams::new(lambda).unwrap().with_seed(seed);
            let res = prox(&f, &px, &params).unwrap();
            prop_assert!(res.converged, "{}: {:?}", space.descriptor(), res);
            let fx = f.evaluate(&px).unwrap().value();
            prop_assert!(
                res.envelope <= fx + 1e-9 * (1.0 + fx.abs()),
                "{}: envelope {} above f(x) = {fx}",
                space.descriptor(),
                res.envelope
            );
            prop_assert!(
                res.f_value <= res.envelope + 1e-9 * (1.0 + res.envelope.abs()),
                "{}: f at prox point {} above envelope {}",
                space.descriptor(),
                res.f_value,
                res.envelope
            );
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..12 {
                let z = space.sample_near(&px, 2.0, &mut rng);
                let fz = f.evaluate(&z).unwrap();
                if fz.is_infinite() {
                    continue;
                }
                let dz = distance(&z, &px).unwrap();
                let phi = fz.value() + dz * dz / (2.0 * lambda);
                prop_assert!(
                    res.envelope <= phi + 1e-9 * (1.0 + phi.abs()),
                    "{}: envelope {} beaten by candidate {phi}",
                    space.descriptor(),
                    res.envelope
                );
            }
        }
    }

    /// Metric projections onto balls, intervals, and geodesics return
    /// feasible points no farther than any sampled competitor, and the
    /// region projection is nonexpansive.
    #[test]
    fn projections_are_optimal_and_nonexpansive(
        center in draw(),
        radius in 0.3..3.0f64,
        x in draw(),
        y in draw(),
        seed in any::<u64>(),
    ) {
        for space in spaces() {
            let ball = Region::ball(to_point(&space, &center), radius).unwrap();
            let (px, py) = (to_point(&space, &x), to_point(&space, &y));
            let proj_x = ball.project(&px).unwrap();
            let proj_y = ball.project(&py).unwrap();
            prop_assert!(ball.contains(&proj_x).unwrap(), "{}", space.descriptor());
            let dx = distance(&px, &proj_x).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10 {
                let z = ball.sample(&mut rng).unwrap();
                let dz = distance(&px, &z).unwrap();
                prop_assert!(
                    dx <= dz + 1e-7 * (1.0 + dz),
                    "{}: projection distance {dx} beaten by sample at {dz}",
                    space.descriptor()
                );
            }
            let dproj = distance(&proj_x, &proj_y).unwrap();
            let dxy = distance(&px, &py).unwrap();
            prop_assert!(
                dproj <= dxy + 1e-6 * (1.0 + dxy),
                "{}: projection expanded {dxy} to {dproj}",
                space.descriptor()
            );

            let ga = to_point(&space, &center);
            let g = match GeodesicSegment::new(ga, py.clone()) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let proj = project_to_geodesic(&px, &g).unwrap();
            for k in 0..=10 {
                let z = geodesic_point(&g, k as f64 / 10.0).unwrap();
                let dz = distance(&px, &z).unwrap();
                prop_assert!(
                    proj.distance <= dz + 1e-7 * (1.0 + dz),
                    "{}: geodesic projection {} beaten at t={}",
                    space.descriptor(),
                    proj.distance,
                    k as f64 / 10.0
                );
            }
        }
    }
}
