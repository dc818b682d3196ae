//! Independent numeric oracles for the solver outputs: dense-grid argmin
//! for proximal points, Riemannian polyline quadrature for half-plane
//! distances, closed-form envelopes, and bitwise determinism.
//!
//! The oracles deliberately avoid the library's own minimizers: grids are
//! refined by zooming, lengths come from the metric integrand, and the
//! closed forms are classical formulas evaluated inline.

use hadamard::functional::{
    abs, dist_to, half_sqdist, indicator, linear_euclidean, weighted_sum, ConvexFunctional,
};
use hadamard::prox::{moreau_envelope, prox, slope, ProxParams};
use hadamard::region::Region;
use hadamard::space::{
    distance, geodesic_point, project_to_geodesic, Coords, GeodesicSegment, Point,
    Space, SpaceRegistry,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn line() -> Space {
    SpaceRegistry::builtin().build("kind=euclidean,dim=1").unwrap()
}

fn pt1(space: &Space, x: f64) -> Point {
    space.point(Coords::Euclidean(vec![x])).unwrap()
}

/// Argmin of `phi` over `[lo, hi]` by repeated grid zooming. Six stages at
/// 400 cells shrink the bracket by 1e12, far below the comparison
/// tolerances used by the callers.
fn grid_argmin_line(phi: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut best = (lo, phi(lo));
    for _ in 0..6 {
        let cells = 400;
        let mut stage = best;
        for i in 0..=cells {
            let x = lo + (hi - lo) * i as f64 / cells as f64;
            let v = phi(x);
            if v < stage.1 {
                stage = (x, v);
            }
        }
        best = stage;
        let w = (hi - lo) / cells as f64;
        lo = best.0 - 2.0 * w;
        hi = best.0 + 2.0 * w;
    }
    best
}

/// Per-leg grid zooming on a metric spider; radii live in `[0, rmax]`.
fn grid_argmin_spider(
    phi: &dyn Fn(usize, f64) -> f64,
    legs: usize,
    rmax: f64,
) -> ((usize, f64), f64) {
    let mut best = ((1, 0.0), phi(1, 0.0));
    for leg in 1..=legs {
        let (mut lo, mut hi) = (0.0f64, rmax);
        let mut leg_best = (0.0, phi(leg, 0.0));
        for _ in 0..6 {
            let cells = 300;
            for i in 0..=cells {
                let r = lo + (hi - lo) * i as f64 / cells as f64;
                let v = phi(leg, r);
                if v < leg_best.1 {
                    leg_best = (r, v);
                }
            }
            let w = (hi - lo) / cells as f64;
            lo = (leg_best.0 - 2.0 * w).max(0.0);
            hi = leg_best.0 + 2.0 * w;
        }
        if leg_best.1 < best.1 {
            best = ((leg, leg_best.0), leg_best.1);
        }
    }
    best
}

/// Random convex functional on the line along with a bracket that surely
/// contains any prox minimizer (hull of anchors, padded).
fn random_line_functional(space: &Space, rng: &mut ChaCha8Rng) -> (ConvexFunctional, f64, f64) {
    let a = rng.gen_range(-3.0..3.0);
    let b = rng.gen_range(-3.0..3.0);
    let w1 = rng.gen_range(0.5..3.0);
    let w2 = rng.gen_range(0.5..3.0);
    let f = match rng.gen_range(0..5) {
        0 => abs(space, w1).unwrap(),
        1 => half_sqdist(pt1(space, a), w1).unwrap(),
        2 => dist_to(pt1(space, a), w1).unwrap(),
        3 => weighted_sum(
            vec![dist_to(pt1(space, a), 1.0).unwrap(), half_sqdist(pt1(space, b), 1.0).unwrap()],
            vec![w1, w2],
        )
        .unwrap(),
        _ => {
            let (lo, hi) = (a.min(b), a.max(b) + 0.5);
            let region = Region::interval(pt1(space, lo), pt1(space, hi)).unwrap();
            weighted_sum(
                vec![indicator(region), linear_euclidean(space, vec![w1], 0.0).unwrap()],
                vec![1.0, 1.0],
            )
            .unwrap()
        }
    };
    let lo = a.min(b).min(0.0) - 6.0;
    let hi = a.max(b).max(0.0) + 6.0;
    (f, lo, hi)
}

#[test]
fn prox_matches_grid_argmin_on_the_line() {
    let space = line();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f1a);
    for draw in 0..40 {
        let (f, lo, hi) = random_line_functional(&space, &mut rng);
        let x = rng.gen_range(-4.0..4.0);
        let lambda = [1.0, 0.5, 0.1][draw % 3];
        let xp = pt1(&space, x);
        let res = prox(&f, &xp, &ProxParams::new(lambda).unwrap().with_seed(7)).unwrap();
        assert!(res.converged, "draw {draw}: certificate missed");

        let phi = |y: f64| {
            let v = f.evaluate(&pt1(&space, y)).unwrap();
            if v.is_infinite() {
                f64::INFINITY
            } else {
                v.value() + (y - x) * (y - x) / (2.0 * lambda)
            }
        };
        let (y_star, v_star) = grid_argmin_line(&phi, lo.min(x) - 1.0, hi.max(x) + 1.0);
        let solver_y = match res.minimizer.coords() {
            Coords::Euclidean(v) => v[0],
            other => panic!("unexpected coords {other:?}"),
        };
        assert!(
            (solver_y - y_star).abs() <= 1e-6,
            "draw {draw}: prox {solver_y} vs grid {y_star} for {}",
            f.descriptor()
        );
        assert!(
            (res.envelope - v_star).abs() <= 1e-8,
            "draw {draw}: envelope {} vs grid {v_star}",
            res.envelope
        );
    }
}

#[test]
fn prox_matches_grid_argmin_on_the_spider() {
    let space = SpaceRegistry::builtin().build("kind=spider,legs=4").unwrap();
    let spt = |leg: usize, r: f64| space.point(Coords::Spider { leg, r }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f1b);
    for draw in 0..25 {
        let anchor = spt(rng.gen_range(1..=4), rng.gen_range(0.2..3.0));
        let w = rng.gen_range(0.5..2.5);
        let f = match draw % 3 {
            0 => dist_to(anchor.clone(), w).unwrap(),
            1 => half_sqdist(anchor.clone(), w).unwrap(),
            _ => weighted_sum(
                vec![
                    dist_to(anchor.clone(), 1.0).unwrap(),
                    half_sqdist(spt(rng.gen_range(1..=4), rng.gen_range(0.2..2.0)), 1.0).unwrap(),
                ],
                vec![w, 1.0],
            )
            .unwrap(),
        };
        let x = spt(rng.gen_range(1..=4), rng.gen_range(0.0..3.0));
        let lambda = [1.0, 0.3][draw % 2];
        let res = prox(&f, &x, &ProxParams::new(lambda).unwrap().with_seed(7)).unwrap();
        assert!(res.converged, "draw {draw}: certificate missed");

        let phi = |leg: usize, r: f64| {
            let y = spt(leg, r);
            let d = distance(&y, &x).unwrap();
            f.evaluate(&y).unwrap().value() + d * d / (2.0 * lambda)
        };
        let ((leg, r), v_star) = grid_argmin_spider(&phi, 4, 8.0);
        let gap = distance(&res.minimizer, &spt(leg, r)).unwrap();
        assert!(gap <= 1e-6, "draw {draw}: prox {} vs grid leg {leg} r {r}", res.minimizer.coords_text());
        assert!((res.envelope - v_star).abs() <= 1e-8, "draw {draw}");
    }
}

#[test]
fn halfplane_vertical_distance_is_the_log_ratio() {
    let space = SpaceRegistry::builtin().build("kind=halfplane").unwrap();
    let p = |x: f64, y: f64| space.point(Coords::HalfPlane { x, y }).unwrap();
    // ds = |dy| / y along a vertical line integrates to ln(y2 / y1).
    let d = distance(&p(0.3, 1.0), &p(0.3, 2.0)).unwrap();
    assert!((d - 2.0_f64.ln()).abs() <= 1e-12, "{d}");
    // Symmetric points at height 1 sit on a semicircle through (0, sqrt 2):
    // the closed form is 2 asinh(1).
    let d = distance(&p(-1.0, 1.0), &p(1.0, 1.0)).unwrap();
    assert!((d - 2.0 * 1.0_f64.asinh()).abs() <= 1e-12, "{d}");
}

#[test]
fn halfplane_distance_matches_polyline_quadrature() {
    let space = SpaceRegistry::builtin().build("kind=halfplane").unwrap();
    let p = |x: f64, y: f64| space.point(Coords::HalfPlane { x, y }).unwrap();
    let hp = |c: &Coords| match c {
        Coords::HalfPlane { x, y } => (*x, *y),
        other => panic!("unexpected coords {other:?}"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f1c);
    for _ in 0..12 {
        let a = p(rng.gen_range(-3.0..3.0), rng.gen_range(0.2..4.0));
        let b = p(rng.gen_range(-3.0..3.0), rng.gen_range(0.2..4.0));
        let d = distance(&a, &b).unwrap();
        // Riemannian length of the interpolated path, chord by chord with
        // the midpoint height: second-order accurate in the step.
        let segments = 8192;
        let mut total = 0.0;
        let mut prev = hp(a.coords());
        for i in 1..=segments {
            let t = i as f64 / segments as f64;
            let cur = hp(&space.model().interpolate(a.coords(), b.coords(), t));
            let (dx, dy) = (cur.0 - prev.0, cur.1 - prev.1);
            total += (dx * dx + dy * dy).sqrt() / (0.5 * (cur.1 + prev.1));
            prev = cur;
        }
        assert!(
            (total - d).abs() <= 1e-6 * (1.0 + d),
            "quadrature {total} vs distance {d}"
        );
    }
}

#[test]
fn dist_sq_prox_interpolates_toward_the_anchor_on_every_model() {
    let registry = SpaceRegistry::builtin();
    let cases: Vec<(Space, Coords, Coords)> = vec![
        (
            registry.build("kind=euclidean,dim=3").unwrap(),
            Coords::Euclidean(vec![1.0, -2.0, 0.5]),
            Coords::Euclidean(vec![-0.5, 1.0, 2.0]),
        ),
        (
            registry.build("kind=halfplane").unwrap(),
            Coords::HalfPlane { x: -1.0, y: 0.7 },
            Coords::HalfPlane { x: 2.0, y: 2.5 },
        ),
        (
            registry.build("kind=spider,legs=3").unwrap(),
            Coords::Spider { leg: 2, r: 1.4 },
            Coords::Spider { leg: 3, r: 0.8 },
        ),
        (
            registry.build("kind=product,factors=[kind=euclidean,dim=2;kind=spider,legs=3]")
                .unwrap(),
            Coords::Product(vec![
                Coords::Euclidean(vec![0.3, -1.2]),
                Coords::Spider { leg: 1, r: 2.0 },
            ]),
            Coords::Product(vec![
                Coords::Euclidean(vec![-0.7, 0.4]),
                Coords::Spider { leg: 2, r: 1.1 },
            ]),
        ),
    ];
    for (space, xc, ac) in cases {
        let x = space.point(xc).unwrap();
        let anchor = space.point(ac).unwrap();
        let f = half_sqdist(anchor.clone(), 1.0).unwrap();
        for lambda in [1.0, 0.25] {
            let res = prox(&f, &x, &ProxParams::new(lambda).unwrap().with_seed(5)).unwrap();
            assert!(res.converged, "{}", space.descriptor());
            // J_lambda x = gamma_{x -> anchor}(lambda / (1 + lambda)).
            let t = lambda / (1.0 + lambda);
            let g = GeodesicSegment::new(x.clone(), anchor.clone()).unwrap();
            let expect = geodesic_point(&g, t).unwrap();
            let gap = distance(&res.minimizer, &expect).unwrap();
            assert!(gap <= 1e-8, "{}: gap {gap}", space.descriptor());
            let d = distance(&x, &anchor).unwrap();
            let env = d * d / (2.0 * (1.0 + lambda));
            assert!(
                (res.envelope - env).abs() <= 1e-8 * (1.0 + env),
                "{}: envelope {} vs {env}",
                space.descriptor(),
                res.envelope
            );
        }
    }
}

#[test]
fn envelopes_match_classical_closed_forms_on_the_line() {
    let space = line();
    // Huber: weight-w absolute value smooths to x^2 / (2 lambda) inside
    // |x| <= w lambda and w |x| - w^2 lambda / 2 outside.
    let f = abs(&space, 2.0).unwrap();
    let inside = moreau_envelope(&f, &pt1(&space, 0.5), 0.7, 3).unwrap();
    assert!((inside - 0.25 / 1.4).abs() <= 1e-8, "{inside}");
    let outside = moreau_envelope(&f, &pt1(&space, 3.0), 0.7, 3).unwrap();
    assert!((outside - (6.0 - 4.0 * 0.35)).abs() <= 1e-8, "{outside}");

    // a x^2 smooths to a x^2 / (1 + 2 a lambda).
    let f = half_sqdist(pt1(&space, 0.0), 6.0).unwrap();
    let env = moreau_envelope(&f, &pt1(&space, -2.0), 0.25, 3).unwrap();
    assert!((env - 12.0 / 2.5).abs() <= 1e-8, "{env}");
    let res = prox(&f, &pt1(&space, -2.0), &ProxParams::new(0.25).unwrap().with_seed(3)).unwrap();
    let gap = distance(&res.minimizer, &pt1(&space, -0.8)).unwrap();
    assert!(gap <= 1e-8, "{gap}");

    // Indicator of [-1, 2]: envelope is the squared set distance over
    // 2 lambda and the prox is the clamp.
    let region = Region::interval(pt1(&space, -1.0), pt1(&space, 2.0)).unwrap();
    let f = indicator(region);
    let env = moreau_envelope(&f, &pt1(&space, 4.0), 0.8, 3).unwrap();
    assert!((env - 4.0 / 1.6).abs() <= 1e-8, "{env}");
    let res = prox(&f, &pt1(&space, 4.0), &ProxParams::new(0.8).unwrap().with_seed(3)).unwrap();
    let gap = distance(&res.minimizer, &pt1(&space, 2.0)).unwrap();
    assert!(gap <= 1e-7, "{gap}");
}

#[test]
fn segment_projection_matches_clamped_inner_product() {
    let space = SpaceRegistry::builtin().build("kind=euclidean,dim=3").unwrap();
    let p = |v: [f64; 3]| space.point(Coords::Euclidean(v.to_vec())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f1d);
    for _ in 0..50 {
        let a: [f64; 3] = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let b: [f64; 3] = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let x: [f64; 3] = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let g = match GeodesicSegment::new(p(a), p(b)) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let proj = project_to_geodesic(&p(x), &g).unwrap();

        let dot: f64 = (0..3).map(|i| (x[i] - a[i]) * (b[i] - a[i])).sum();
        let nsq: f64 = (0..3).map(|i| (b[i] - a[i]) * (b[i] - a[i])).sum();
        let t = (dot / nsq).clamp(0.0, 1.0);
        let closest = [
            a[0] + t * (b[0] - a[0]),
            a[1] + t * (b[1] - a[1]),
            a[2] + t * (b[2] - a[2]),
        ];
        let gap = distance(&proj.point, &p(closest)).unwrap();
        assert!(gap <= 1e-7, "projection gap {gap}");
        let dref = distance(&p(x), &p(closest)).unwrap();
        assert!((proj.distance - dref).abs() <= 1e-9, "{} vs {dref}", proj.distance);
    }
}

#[test]
fn spider_projection_matches_dense_parameter_scan() {
    let space = SpaceRegistry::builtin().build("kind=spider,legs=3").unwrap();
    let spt = |leg: usize, r: f64| space.point(Coords::Spider { leg, r }).unwrap();
    let g = GeodesicSegment::new(spt(1, 2.0), spt(2, 1.5)).unwrap();
    for x in [spt(3, 1.0), spt(1, 3.0), spt(2, 0.2)] {
        let proj = project_to_geodesic(&x, &g).unwrap();
        // Two-stage parameter scan: coarse pass, then zoom around the
        // best cell. Final resolution in t is about 4e-8 of the segment.
        let scan = |lo: f64, hi: f64| {
            let mut best = (lo, f64::INFINITY);
            for i in 0..=20_000 {
                let t = lo + (hi - lo) * i as f64 / 20_000.0;
                let y = geodesic_point(&g, t).unwrap();
                let d = distance(&x, &y).unwrap();
                if d < best.1 {
                    best = (t, d);
                }
            }
            best
        };
        let (t0, _) = scan(0.0, 1.0);
        let w = 1.0 / 20_000.0;
        let (_, best) = scan((t0 - 2.0 * w).max(0.0), (t0 + 2.0 * w).min(1.0));
        assert!(
            (proj.distance - best).abs() <= 1e-6,
            "{}: {} vs scan {best}",
            x.coords_text(),
            proj.distance
        );
    }
}

#[test]
fn prox_and_slope_are_bitwise_deterministic() {
    let space = line();
    let f = weighted_sum(
        vec![abs(&space, 1.0).unwrap(), half_sqdist(pt1(&space, 1.5), 2.0).unwrap()],
        vec![1.0, 1.0],
    )
    .unwrap();
    let x = pt1(&space, 0.9);
    let params = ProxParams::new(0.6).unwrap().with_seed(42);
    let r1 = prox(&f, &x, &params).unwrap();
    let r2 = prox(&f, &x, &params).unwrap();
    assert_eq!(r1.minimizer.coords_text(), r2.minimizer.coords_text());
    assert_eq!(r1.envelope.to_bits(), r2.envelope.to_bits());
    assert_eq!(r1.certificate_residual.to_bits(), r2.certificate_residual.to_bits());

    let s1 = slope(&f, &x, 128, 42).unwrap();
    let s2 = slope(&f, &x, 128, 42).unwrap();
    assert_eq!(s1.value.value().to_bits(), s2.value.value().to_bits());
    assert_eq!(s1.samples, s2.samples);
}
