//! Asymptotic slope bounds: membership in the bounded-slope classes, cone
//! combinations, and the sup-distance sufficient condition for slope
//! convergence.

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::functional::{domain_samples, weighted_sum, ConvexFunctional, FunctionSequence};
use crate::minimize::{mix_seed, seeded_rng};
use crate::prox::{coords_tag, slope};
use crate::space::{distance, Point, Space, WindowSpec};
use crate::tolerances::TOL_SLOPE;
use crate::verdict::{Status, Verdict, Witness};

use super::{ext_abs_diff, tail_indices, WorstCase};

const SLOPE_BUDGET: usize = 96;

/// Slope tail data for one grid point.
#[derive(Clone, Debug)]
pub struct ProfileEntry {
    pub point: Point,
    /// Max slope estimate over the sampled tail window.
    pub tail_bound: ExtendedReal,
    /// True when the tail estimates blow up (cap hit, or the full-window
    /// max keeps growing past the half-window max).
    pub divergent: bool,
}

/// Verdict on membership in the bounded-asymptotic-slope classes.
///
/// `in_a` reports the liminf-bound class (finite tail bound at every grid
/// point); `in_a0` additionally certifies one constant over the grid.
/// On a finite grid the two coincide, so `in_a0` carries a note saying the
/// uniform constant is grid-limited.
#[derive(Clone, Debug)]
pub struct SlopeEnvelopeProfile {
    pub entries: Vec<ProfileEntry>,
    /// The grid-uniform constant, when `in_a0` passes.
    pub uniform_bound: Option<f64>,
    pub in_a: Status,
    pub in_a0: Status,
    pub notes: Vec<String>,
}

impl SlopeEnvelopeProfile {
    /// Collapses the profile into a single verdict for report tables.
    pub fn verdict(&self) -> Verdict {
        match self.in_a {
            Status::ConsistentWith => {
                let mut v = Verdict::consistent().one_sided();
                if let Some(c) = self.uniform_bound {
                    v = v.with_residual(c);
                }
                for n in &self.notes {
                    v = v.with_note(n.clone());
                }
                v
            }
            _ => {
                let worst = self
                    .entries
                    .iter()
                    .find(|e| e.divergent)
                    .expect("a non-passing profile has a divergent entry");
                let mut v = Verdict::violated(Witness {
                    point: Some(worst.point.coords_text()),
                    value: worst.tail_bound.value(),
                    label: "slope tail estimate diverges".into(),
                    ..Witness::default()
                });
                for n in &self.notes {
                    v = v.with_note(n.clone());
                }
                v
            }
        }
    }
}

fn check_grid(space: &Space, points: &[Point]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::usage("slope profile needs a nonempty point grid"));
    }
    for p in points {
        if !p.space().same_as(space) {
            return Err(Error::SpaceMismatch {
                expected: space.descriptor(),
                found: p.space().descriptor(),
            });
        }
    }
    Ok(())
}

fn tail_slope_max(
    seq: &FunctionSequence,
    x: &Point,
    ns: &[usize],
    seed: u64,
) -> Result<ExtendedReal> {
    let mut out = ExtendedReal::finite(0.0);
    for &n in ns {
        let est = slope(
            &seq.at(n),
            x,
            SLOPE_BUDGET,
            mix_seed(seed, &[n as u64, coords_tag(x.coords())]),
        )?;
        out = out.max(est.value);
        if out.is_infinite() {
            break;
        }
    }
    Ok(out)
}

/// Estimates per-point slope tail bounds for `f^n` and decides membership
/// in the bounded-slope classes.
///
/// Divergence is flagged when the capped slope estimator overflows, or
/// when the max over the full window exceeds 1.5x the max over the
/// half-shifted window while already being larger than 1: a tail whose
/// bound keeps growing as the window slides is not bounded.
pub fn asymptotic_slope_check(
    seq: &FunctionSequence,
    points: &[Point],
    window: &WindowSpec,
    seed: u64,
) -> Result<SlopeEnvelopeProfile> {
    check_grid(seq.space(), points)?;
    let ns_full = tail_indices(window);
    let half = WindowSpec::new(
        (window.n_min / 2).max(1),
        (window.n_max / 2).max(window.n_min / 2 + 2).max(3),
        window.tol_seq,
    )?;
    let ns_half = tail_indices(&half);

    let mut entries = Vec::with_capacity(points.len());
    let mut any_divergent = false;
    let mut bound = 0.0f64;
    for x in points {
        let m_full = tail_slope_max(seq, x, &ns_full, seed)?;
        let divergent = if m_full.is_infinite() {
            true
        } else {
            let m_half = tail_slope_max(seq, x, &ns_half, seed)?;
            let grew = m_half.is_finite()
                && m_full.value() >= 1.5 * m_half.value()
                && m_full.value() > 1.0;
            grew
        };
        any_divergent |= divergent;
        if !divergent {
            bound = bound.max(m_full.value());
        }
        entries.push(ProfileEntry { point: x.clone(), tail_bound: m_full, divergent });
    }

    let status = if any_divergent { Status::Violated } else { Status::ConsistentWith };
    let mut notes = vec![
        "slope estimates are lower bounds; membership passes are one-sided".to_string(),
    ];
    let uniform_bound = if any_divergent {
        None
    } else {
        notes.push(format!(
            "uniform bound {bound:.6} certified over the supplied grid only"
        ));
        Some(bound)
    };
    Ok(SlopeEnvelopeProfile { entries, uniform_bound, in_a: status, in_a0: status, notes })
}

/// Checks that a conic combination `alpha f^n + beta g^n` stays in the
/// bounded-slope class with the expected subadditive tail bound.
pub fn cone_closure_check(
    seq_a: &FunctionSequence,
    seq_b: &FunctionSequence,
    alpha: f64,
    beta: f64,
    points: &[Point],
    window: &WindowSpec,
    seed: u64,
) -> Result<Verdict> {
    if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
        return Err(Error::usage(format!(
            "cone coefficients must be positive, got alpha={alpha}, beta={beta}"
        )));
    }
    if !seq_a.space().same_as(seq_b.space()) {
        return Err(Error::SpaceMismatch {
            expected: seq_a.space().descriptor(),
            found: seq_b.space().descriptor(),
        });
    }
    check_grid(seq_a.space(), points)?;
    let pa = asymptotic_slope_check(seq_a, points, window, seed)?;
    let pb = asymptotic_slope_check(seq_b, points, window, seed)?;
    if pa.in_a != Status::ConsistentWith || pb.in_a != Status::ConsistentWith {
        return Ok(Verdict::inconclusive(
            "cone closure needs both families in the bounded-slope class; a profile did not pass",
        ));
    }

    let (sa, sb) = (seq_a.clone(), seq_b.clone());
    let combo = FunctionSequence::new(
        seq_a.space().clone(),
        format!("{}*{} + {}*{}", alpha, seq_a.label(), beta, seq_b.label()),
        move |n| {
            weighted_sum(vec![sa.at(n), sb.at(n)], vec![alpha, beta])
                .expect("validated same-space terms and positive weights")
        },
    );

    let ns = tail_indices(window);
    let mut worst = WorstCase::new();
    for (i, x) in points.iter().enumerate() {
        let tail_h = tail_slope_max(&combo, x, &ns, seed)?;
        let ta = pa.entries[i].tail_bound.value();
        let tb = pb.entries[i].tail_bound.value();
        let budget = alpha * ta + beta * tb;
        let margin = if tail_h.is_infinite() {
            f64::INFINITY
        } else {
            tail_h.value() - budget - TOL_SLOPE * (1.0 + budget)
        };
        worst.update(margin.max(0.0), || Witness {
            point: Some(x.coords_text()),
            value: margin,
            label: format!(
                "combined slope tail {:.6} exceeds {alpha}*{ta:.6} + {beta}*{tb:.6}",
                tail_h.value()
            ),
            ..Witness::default()
        });
    }
    // Any positive margin already exceeds the tolerance built into it.
    Ok(worst.verdict(0.0).one_sided().with_note(
        "tail bound of the combination stayed within the conic budget on the sampled grid",
    ))
}

/// `max{f(x) - f(y), 0} / d(x, y)`, the quantity whose sup over y is the
/// descending slope. Infinite `f(y)` contributes zero; infinite `f(x)`
/// makes the ratio infinite for any finite-valued y.
fn slope_ratio(fx: ExtendedReal, fy: ExtendedReal, d: f64) -> f64 {
    if d < 1e-15 {
        return 0.0;
    }
    match (fx.is_infinite(), fy.is_infinite()) {
        (_, true) => 0.0,
        (true, false) => f64::INFINITY,
        (false, false) => ((fx.value() - fy.value()) / d).max(0.0),
    }
}

fn sup_ratio_diff(
    fnn: &ConvexFunctional,
    f: &ConvexFunctional,
    x: &Point,
    ys: &[Point],
) -> Result<f64> {
    let fx_n = fnn.evaluate(x)?;
    let fx = f.evaluate(x)?;
    let mut sup = 0.0f64;
    for y in ys {
        let d = distance(x, y)?;
        if d < 1e-15 {
            continue;
        }
        let gn = slope_ratio(fx_n, fnn.evaluate(y)?, d);
        let g = slope_ratio(fx, f.evaluate(y)?, d);
        let diff = match (gn.is_infinite(), g.is_infinite()) {
            (true, true) => 0.0,
            (false, false) => (gn - g).abs(),
            _ => f64::INFINITY,
        };
        sup = sup.max(diff);
        if sup.is_infinite() {
            break;
        }
    }
    Ok(sup)
}

fn y_samples(f: &ConvexFunctional, x: &Point, budget: usize, seed: u64) -> Vec<Point> {
    let space = x.space().clone();
    let mut rng = seeded_rng(seed, &[0x51f, coords_tag(x.coords())]);
    let mut ys = domain_samples(f, budget, &mut rng);
    // Shells closing in on x catch ratio flips that only happen locally.
    for k in 0..=10 {
        let r = 0.5f64.powi(k);
        for _ in 0..2 {
            ys.push(space.sample_near(x, r, &mut rng));
        }
    }
    ys
}

/// Sufficient condition for slope convergence: if the slope-ratio field of
/// `f^n` converges to that of `f` uniformly in y at a point, the slopes
/// converge there.
///
/// The sup over y is sampled; the estimate must be stable under doubling
/// the sample or the check refuses to conclude. A failed premise yields a
/// hypothesis violation and the conclusion goes untested at that point. A
/// passing premise with a failing conclusion is flagged loudly, since it
/// would contradict the statement being exercised.
pub fn sufficient_condition_check(
    seq: &FunctionSequence,
    f: &ConvexFunctional,
    points: &[Point],
    y_budget: usize,
    window: &WindowSpec,
    seed: u64,
) -> Result<Verdict> {
    check_grid(seq.space(), points)?;
    if !seq.space().same_as(f.space()) {
        return Err(Error::SpaceMismatch {
            expected: seq.space().descriptor(),
            found: f.space().descriptor(),
        });
    }
    let budget = y_budget.max(16);
    let ns = tail_indices(window);
    let tol = window.tol_seq;
    let mut premise_failures: Vec<Witness> = Vec::new();
    let mut conclusion_failures: Vec<Witness> = Vec::new();
    let mut notes: Vec<String> = Vec::new();

    for x in points {
        let point_seed = mix_seed(seed, &[coords_tag(x.coords())]);
        let ys = y_samples(f, x, budget, point_seed);
        let ys2 = y_samples(f, x, budget * 2, mix_seed(point_seed, &[2]));
        let mut premise_worst = 0.0f64;
        let mut premise_n = ns[0];
        for &n in &ns {
            let fnn = seq.at(n);
            let d1 = sup_ratio_diff(&fnn, f, x, &ys)?;
            let d2 = sup_ratio_diff(&fnn, f, x, &ys2)?;
            if (d2 - d1).abs() > 0.1 * (1.0 + d1.min(d2)) {
                return Ok(Verdict::inconclusive(format!(
                    "sup estimate unstable under sample doubling at x={}, n={n} ({d1:.4} vs {d2:.4})",
                    x.coords_text()
                )));
            }
            let d = d1.max(d2);
            if d > premise_worst {
                premise_worst = d;
                premise_n = n;
            }
        }
        if premise_worst > tol {
            premise_failures.push(Witness {
                point: Some(x.coords_text()),
                n: Some(premise_n),
                value: premise_worst,
                label: "hypothesis: sup_y |ratio^n - ratio| does not vanish".into(),
                ..Witness::default()
            });
            continue;
        }
        // Premise holds here; test the conclusion.
        let s_lim = slope(f, x, SLOPE_BUDGET, mix_seed(point_seed, &[0x5105]))?;
        let mut worst = 0.0f64;
        let mut worst_n = ns[0];
        for &n in &ns {
            let s_n = slope(
                &seq.at(n),
                x,
                SLOPE_BUDGET,
                mix_seed(point_seed, &[n as u64, 0x5105]),
            )?;
            let d = ext_abs_diff(s_n.value, s_lim.value);
            if d > worst {
                worst = d;
                worst_n = n;
            }
        }
        if worst > tol {
            conclusion_failures.push(Witness {
                point: Some(x.coords_text()),
                n: Some(worst_n),
                value: worst,
                label: "slope values fail to converge despite a passing premise".into(),
                ..Witness::default()
            });
        }
    }

    // Cross-check against the asymptotic profile: converging slopes cannot
    // have a divergent tail.
    let profile = asymptotic_slope_check(seq, points, window, seed)?;
    if profile.in_a == Status::Violated && premise_failures.is_empty() && conclusion_failures.is_empty() {
        return Ok(Verdict::inconclusive(
            "slope tails look divergent in the asymptotic profile yet the pointwise estimates converged; estimator disagreement",
        ));
    }

    if !conclusion_failures.is_empty() && premise_failures.is_empty() {
        let mut v = Verdict::violated(conclusion_failures.remove(0));
        v = v.with_note(
            "FALSIFICATION PATTERN: premise holds at every grid point yet slope convergence fails",
        );
        return Ok(v);
    }
    if !premise_failures.is_empty() {
        let mut v = Verdict::violated(premise_failures.remove(0));
        for w in premise_failures {
            v = v.with_witness(w);
        }
        v = v.with_note("conclusion untested at points where the premise fails");
        for w in conclusion_failures {
            v = v.with_witness(w);
        }
        return Ok(v);
    }
    notes.push("premise and conclusion verified on sampled y-families; pass is one-sided".into());
    let mut v = Verdict::consistent().one_sided();
    for n in notes {
        v = v.with_note(n);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{abs, zero, FamilyRegistry};
    use crate::space::{Coords, SpaceRegistry};

    fn line() -> Space {
        SpaceRegistry::builtin().build("kind=euclidean,dim=1").unwrap()
    }

    fn pts(space: &Space, xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| space.point(Coords::Euclidean(vec![x])).unwrap()).collect()
    }

    #[test]
    fn constant_zero_family_has_zero_uniform_bound() {
        let space = line();
        let seq = FunctionSequence::new(space.clone(), "zeros", {
            let sp = space.clone();
            move |_| zero(&sp)
        });
        let grid = pts(&space, &[0.0, 1.0, -2.0]);
        let p = asymptotic_slope_check(&seq, &grid, &WindowSpec::default(), 5).unwrap();
        assert_eq!(p.in_a, Status::ConsistentWith);
        assert_eq!(p.in_a0, Status::ConsistentWith);
        assert_eq!(p.uniform_bound, Some(0.0));
    }

    #[test]
    fn shifted_abs_profile_is_bounded_by_one() {
        let space = line();
        let seq = FamilyRegistry::builtin().build(&space, "family=shifted_abs").unwrap();
        let grid = pts(&space, &[0.0, 0.5, 2.0]);
        let p = asymptotic_slope_check(&seq, &grid, &WindowSpec::default(), 5).unwrap();
        assert_eq!(p.in_a, Status::ConsistentWith);
        let c = p.uniform_bound.unwrap();
        assert!((c - 1.0).abs() < 1e-6, "bound {c}");
    }

    #[test]
    fn steepening_quadratic_diverges_at_off_center_points() {
        let space = line();
        let seq = FamilyRegistry::builtin().build(&space, "family=steepening_quadratic").unwrap();
        let grid = pts(&space, &[1.0]);
        let p = asymptotic_slope_check(&seq, &grid, &WindowSpec::default(), 5).unwrap();
        assert_eq!(p.in_a, Status::Violated);
        assert!(p.entries[0].divergent);
        assert_eq!(p.verdict().status, Status::Violated);
    }

    #[test]
    fn cone_combination_of_bounded_families_stays_bounded() {
        let space = line();
        let fam = FamilyRegistry::builtin();
        let a = fam.build(&space, "family=shifted_abs").unwrap();
        let b = fam.build(&space, "family=scaled_abs").unwrap();
        let grid = pts(&space, &[0.0, 1.5]);
        let v = cone_closure_check(&a, &b, 2.0, 0.5, &grid, &WindowSpec::default(), 5).unwrap();
        assert_eq!(v.status, Status::ConsistentWith, "{v:?}");
    }

    #[test]
    fn sufficient_condition_flags_shifted_abs_premise_near_the_kink() {
        let space = line();
        let seq = FamilyRegistry::builtin().build(&space, "family=shifted_abs").unwrap();
        let f = abs(&space, 1.0).unwrap();
        // At x = 0 the ratio field of |x - 1/n| disagrees with |x| at
        // y-values between the two kinks, so the premise must fail there
        // even though the slopes themselves converge.
        let grid = pts(&space, &[0.0]);
        let v = sufficient_condition_check(&seq, &f, &grid, 48, &WindowSpec::default(), 5).unwrap();
        assert_eq!(v.status, Status::Violated, "{v:?}");
        assert!(v.notes.iter().any(|n| n.contains("untested")), "{v:?}");
        assert!(!v.notes.iter().any(|n| n.contains("FALSIFICATION")), "{v:?}");
    }

    #[test]
    fn sufficient_condition_passes_away_from_the_kink() {
        let space = line();
        let seq = FamilyRegistry::builtin().build(&space, "family=scaled_abs").unwrap();
        let f = abs(&space, 1.0).unwrap();
        let grid = pts(&space, &[2.0]);
        // Ratio gap for (1 + 1/n)|x| is 1/n, below 1e-2 from n = 128 on.
        let window = WindowSpec::new(128, 256, 1e-2).unwrap();
        let v = sufficient_condition_check(&seq, &f, &grid, 48, &window, 5).unwrap();
        assert_eq!(v.status, Status::ConsistentWith, "{v:?}");
        assert!(v.one_sided);
    }
}
