//! Composite checks: normalization and equi-Lipschitz preconditions, and
//! the theorem web wiring hypotheses to conclusions.

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::functional::{ConvexFunctional, FunctionSequence};
use crate::minimize::{mix_seed, seeded_rng};
use crate::prox::{coords_tag, prox, prox_with_starts, slope, ProxParams};
use crate::region::Region;
use crate::space::{distance, geodesic_point, GeodesicSegment, Point, PointSequence, WindowSpec};
use crate::tolerances::{QUAD_NODES, TOL_SLOPE};
use crate::verdict::{
    CheckRole, Status, SubCheck, TheoremId, TheoremReport, Verdict, Witness,
};

use super::{
    asymptotic_slope_check, ext_abs_diff, limit_mode_check, mosco_check, tail_indices, Mode,
    ModeSpec, WorstCase,
};

const SLOPE_BUDGET: usize = 96;
/// Central-difference step in geodesic parameter for envelope derivatives.
const DD_STEP: f64 = 2e-4;
/// Interior knots where envelope derivatives are compared along a geodesic.
const DD_KNOTS: [f64; 4] = [0.15, 0.4, 0.65, 0.9];

/// Tail residuals of the normalized sequence `x_n = J^n_lambda x0` against
/// `x = J_lambda x0`: distances, function values, and slopes must all
/// settle. No Mosco gate; callers wanting the gated version use
/// `normalization_check`.
pub(crate) fn normalization_tails(
    seq: &FunctionSequence,
    f: &ConvexFunctional,
    x0: &Point,
    lambda: f64,
    window: &WindowSpec,
    seed: u64,
) -> Result<Verdict> {
    let base = prox(f, x0, &ProxParams::new(lambda)?.with_seed(seed))?;
    if !base.converged {
        return Ok(Verdict::inconclusive(
            "resolvent of the limit functional missed its certificate at the anchor",
        ));
    }
    let x = base.minimizer;
    let fx = f.evaluate(&x)?;
    let s_lim = slope(f, &x, SLOPE_BUDGET, mix_seed(seed, &[0x401]))?;
    let mut worst = WorstCase::new();
    for &n in &tail_indices(window) {
        let rn = prox(&seq.at(n), x0, &ProxParams::new(lambda)?.with_seed(seed))?;
        if !rn.converged {
            return Ok(Verdict::inconclusive(format!(
                "resolvent of f^{n} missed its certificate at the anchor"
            )));
        }
        let xn = rn.minimizer;
        let d = distance(&xn, &x)?;
        worst.update(d, || Witness {
            point: Some(xn.coords_text()),
            lambda: Some(lambda),
            n: Some(n),
            value: d,
            label: "d(x_n, x) tail of the normalized sequence".into(),
            ..Witness::default()
        });
        let vf = ext_abs_diff(ExtendedReal::finite(rn.f_value), fx);
        worst.update(vf, || Witness {
            point: Some(xn.coords_text()),
            lambda: Some(lambda),
            n: Some(n),
            value: vf,
            label: "|f^n(x_n) - f(x)| tail of the normalized sequence".into(),
            ..Witness::default()
        });
        let sn = slope(
            &seq.at(n),
            &xn,
            SLOPE_BUDGET,
            mix_seed(seed, &[0x402, n as u64, coords_tag(xn.coords())]),
        )?;
        let vs = ext_abs_diff(sn.value, s_lim.value);
        worst.update(vs, || Witness {
            point: Some(xn.coords_text()),
            lambda: Some(lambda),
            n: Some(n),
            value: vs,
            label: "slope tail of the normalized sequence".into(),
            ..Witness::default()
        });
    }
    Ok(worst.verdict(window.tol_seq))
}

/// Normalization of a Mosco-convergent family: moving base points
/// `x_n = J^n_lambda x0` carry convergence of points, values, and slopes.
///
/// Refuses to run (usage error) when the family is not verified
/// Mosco-convergent first, since the statement presupposes it.
pub fn normalization_check(
    seq: &FunctionSequence,
    f: &ConvexFunctional,
    x0: &Point,
    lambda: f64,
    spec: &ModeSpec,
    seed: u64,
) -> Result<Verdict> {
    let mosco = mosco_check(seq, f, &spec.with_mode(Mode::Mosco), &[], seed)?;
    if mosco.status != Status::ConsistentWith {
        return Err(Error::usage(format!(
            "normalization requires Mosco convergence of the family; mosco_check returned {}",
            mosco.status
        )));
    }
    let v = normalization_tails(seq, f, x0, lambda, &spec.window, seed)?;
    Ok(v.with_note("precondition: Mosco convergence verified on the same window"))
}

/// Uniform quadratic minorization and envelope Lipschitz bounds for a
/// family on a bounded region.
///
/// Precondition: the envelopes at the anchor settle to a finite value.
/// Then (a) every `f^n` admits the certificate
/// `f^n(x) + (d(x, x0)^2 + 1) / (2 lambda) >= 0` on region samples, and
/// (b) the envelope Lipschitz constants over the region, estimated from
/// sampled pairs, do not drift upward with n: the max over all sampled n
/// stays within 10% of the max over the late half.
pub fn equi_lipschitz_check(
    seq: &FunctionSequence,
    lambda: f64,
    x0: &Point,
    region: &Region,
    samples: usize,
    window: &WindowSpec,
    seed: u64,
) -> Result<Verdict> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::usage(format!("lambda must be positive, got {lambda}")));
    }
    if !region.space().same_as(seq.space()) {
        return Err(Error::SpaceMismatch {
            expected: seq.space().descriptor(),
            found: region.space().descriptor(),
        });
    }
    let ns = tail_indices(window);
    let tol = window.tol_seq;

    let mut envs = Vec::with_capacity(ns.len());
    for &n in &ns {
        let r = prox(&seq.at(n), x0, &ProxParams::new(lambda)?.with_seed(seed))?;
        if !r.converged {
            return Ok(Verdict::inconclusive(format!(
                "envelope solve for f^{n} missed its certificate at the anchor"
            )));
        }
        envs.push(r.envelope);
    }
    let lo = envs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = envs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > tol {
        return Ok(Verdict::violated(Witness {
            point: Some(x0.coords_text()),
            lambda: Some(lambda),
            value: hi - lo,
            label: "precondition: envelope values at the anchor do not settle".into(),
            ..Witness::default()
        }));
    }
    let alpha0 = envs[envs.len() - 1];

    let mut rng = seeded_rng(seed, &[0x3a2, coords_tag(x0.coords())]);
    let mut cert_pts = region.anchor_points();
    for _ in 0..samples.max(8) {
        cert_pts.push(region.sample(&mut rng)?);
    }
    let r_coef = 1.0 / (2.0 * lambda);
    for &n in &ns {
        let fnn = seq.at(n);
        for p in &cert_pts {
            let v = fnn.evaluate(p)?;
            if v.is_infinite() {
                continue;
            }
            let d = distance(p, x0)?;
            let floor = v.value() + r_coef * (d * d + 1.0);
            if floor < -1e-9 * (1.0 + r_coef * (d * d + 1.0)) {
                return Ok(Verdict::violated(Witness {
                    point: Some(p.coords_text()),
                    lambda: Some(lambda),
                    n: Some(n),
                    value: -floor,
                    label: "quadratic minorization certificate fails".into(),
                    ..Witness::default()
                }));
            }
        }
    }

    let mut eval_pts = region.anchor_points();
    let eval_budget = samples.clamp(8, 40);
    for _ in 0..eval_budget {
        eval_pts.push(region.sample(&mut rng)?);
    }
    let mut lipschitz = Vec::with_capacity(ns.len());
    for &n in &ns {
        let fnn = seq.at(n);
        let mut values = Vec::with_capacity(eval_pts.len());
        for p in &eval_pts {
            let r = prox(&fnn, p, &ProxParams::new(lambda)?.with_seed(seed))?;
            if !r.converged {
                return Ok(Verdict::inconclusive(format!(
                    "envelope solve for f^{n} missed its certificate on the region"
                )));
            }
            values.push(r.envelope);
        }
        let mut l_n = 0.0f64;
        for i in 0..eval_pts.len() {
            for j in (i + 1)..eval_pts.len() {
                let d = distance(&eval_pts[i], &eval_pts[j])?;
                if d > 1e-9 {
                    l_n = l_n.max((values[i] - values[j]).abs() / d);
                }
            }
        }
        lipschitz.push(l_n);
    }
    let c_k = lipschitz.iter().cloned().fold(0.0, f64::max);
    let late = &lipschitz[lipschitz.len() / 2..];
    let late_max = late.iter().cloned().fold(0.0, f64::max);
    if c_k > 1.1 * late_max + TOL_SLOPE {
        let (idx, _) = lipschitz
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        return Ok(Verdict::violated(Witness {
            lambda: Some(lambda),
            n: Some(ns[idx]),
            value: c_k,
            label: "envelope Lipschitz constants drift across the family".into(),
            ..Witness::default()
        }));
    }
    Ok(Verdict::consistent()
        .with_residual(c_k)
        .one_sided()
        .with_note(format!("anchor envelope settles near {alpha0:.6}"))
        .with_note(format!("sampled envelope Lipschitz bound {c_k:.6} on the region"))
        .with_note("minorization certificate checked on samples; pass is one-sided"))
}

/// Optional inputs for `theorem_verify`.
#[derive(Clone, Debug, Default)]
pub struct TheoremExtras {
    /// Extra probe sequences for the Mosco condition (i).
    pub probes: Vec<PointSequence>,
    /// Anchor for normalization tails; defaults to the first grid point.
    pub anchor: Option<Point>,
    /// Endpoints of geodesics from the anchor for envelope derivative
    /// checks; defaults to sampled endpoints.
    pub bundle: Vec<Point>,
}

fn meet(a: &Verdict, b: &Verdict) -> Verdict {
    let status = a.status.and(b.status);
    let mut v = match status {
        Status::ConsistentWith => Verdict::consistent()
            .with_residual(a.residual.unwrap_or(0.0).max(b.residual.unwrap_or(0.0))),
        Status::Violated => {
            let w = if a.status == Status::Violated { a.witnesses.first() } else { b.witnesses.first() };
            Verdict::violated(w.cloned().unwrap_or_default())
        }
        Status::Inconclusive => Verdict::inconclusive("a component check was inconclusive"),
    };
    if a.one_sided || b.one_sided {
        v = v.one_sided();
    }
    for n in a.notes.iter().chain(b.notes.iter()) {
        v = v.with_note(n.clone());
    }
    v
}

struct Components<'a> {
    seq: &'a FunctionSequence,
    f: &'a ConvexFunctional,
    spec: &'a ModeSpec,
    extras: &'a TheoremExtras,
    seed: u64,
}

impl Components<'_> {
    fn mode(&self, mode: Mode) -> Result<Verdict> {
        limit_mode_check(self.seq, self.f, &self.spec.with_mode(mode), self.seed)
    }

    fn mosco(&self) -> Result<Verdict> {
        mosco_check(
            self.seq,
            self.f,
            &self.spec.with_mode(Mode::Mosco),
            &self.extras.probes,
            self.seed,
        )
    }

    fn slope_profile(&self) -> Result<(Verdict, Option<f64>)> {
        let p = asymptotic_slope_check(self.seq, &self.spec.points, &self.spec.window, self.seed)?;
        let bound = p.uniform_bound;
        Ok((p.verdict(), bound))
    }

    fn anchor(&self) -> Point {
        self.extras.anchor.clone().unwrap_or_else(|| self.spec.points[0].clone())
    }

    fn bundle(&self) -> Result<Vec<GeodesicSegment>> {
        let x0 = self.anchor();
        let space = x0.space().clone();
        let mut ends = self.extras.bundle.clone();
        if ends.is_empty() {
            let mut rng = seeded_rng(self.seed, &[0x6a0, coords_tag(x0.coords())]);
            for _ in 0..2 {
                ends.push(space.sample_near(&x0, 1.0, &mut rng));
            }
        }
        let mut out = Vec::new();
        for w in ends {
            if space.distance_coords(x0.coords(), w.coords()) > 1e-9 {
                out.push(GeodesicSegment::new(x0.clone(), w)?);
            }
        }
        Ok(out)
    }

    /// Central-difference derivative of the lambda-envelope of `f` along
    /// `g` at parameter `t`. At kinks of the underlying functional this
    /// averages the two one-sided slopes, which is what the integral
    /// identity needs.
    fn envelope_deriv(
        &self,
        func: &ConvexFunctional,
        g: &GeodesicSegment,
        t: f64,
        lambda: f64,
        warm: &mut Vec<Point>,
    ) -> Result<Option<f64>> {
        let a = geodesic_point(g, t - DD_STEP)?;
        let b = geodesic_point(g, t + DD_STEP)?;
        let params = ProxParams::new(lambda)?.with_seed(self.seed);
        let ra = prox_with_starts(func, &a, &params, warm)?;
        let rb = prox_with_starts(func, &b, &params, warm)?;
        if !(ra.converged && rb.converged) {
            return Ok(None);
        }
        warm.clear();
        warm.push(rb.minimizer);
        Ok(Some((rb.envelope - ra.envelope) / (2.0 * DD_STEP)))
    }

    fn envelope_at(
        &self,
        func: &ConvexFunctional,
        x: &Point,
        lambda: f64,
    ) -> Result<Option<f64>> {
        let r = prox(func, x, &ProxParams::new(lambda)?.with_seed(self.seed))?;
        Ok(r.converged.then_some(r.envelope))
    }

    /// Hypothesis for the moving-base envelope theorem: derivatives of the
    /// envelopes converge along a bundle of geodesics from the anchor.
    fn dirderiv_convergence(&self, lambda: f64) -> Result<Verdict> {
        let geos = self.bundle()?;
        if geos.is_empty() {
            return Ok(Verdict::inconclusive("no usable bundle geodesics from the anchor"));
        }
        let ns = tail_indices(&self.spec.window);
        let tol = self.spec.window.tol_seq;
        let mut worst = WorstCase::new();
        for g in &geos {
            for &t in &DD_KNOTS {
                let mut warm = Vec::new();
                let Some(d_lim) = self.envelope_deriv(self.f, g, t, lambda, &mut warm)? else {
                    return Ok(Verdict::inconclusive("limit envelope solve missed its certificate"));
                };
                for &n in &ns {
                    let mut warm_n = Vec::new();
                    let Some(d_n) =
                        self.envelope_deriv(&self.seq.at(n), g, t, lambda, &mut warm_n)?
                    else {
                        return Ok(Verdict::inconclusive(format!(
                            "envelope solve for f^{n} missed its certificate on the bundle"
                        )));
                    };
                    let gap = (d_n - d_lim).abs();
                    let margin = gap - tol * (1.0 + d_lim.abs());
                    worst.update(margin.max(0.0), || Witness {
                        point: Some(geodesic_point(g, t).expect("interior t").coords_text()),
                        lambda: Some(lambda),
                        n: Some(n),
                        value: gap,
                        label: "envelope derivative gap along the bundle".into(),
                        ..Witness::default()
                    });
                }
            }
        }
        Ok(worst.verdict(0.0).with_note(format!(
            "central differences with step {DD_STEP:.0e} in geodesic parameter"
        )))
    }

    /// Auxiliary: the envelope difference along a geodesic equals the
    /// integral of its derivative, by composite midpoint quadrature.
    fn integral_identity(&self, lambda: f64) -> Result<Verdict> {
        let geos = self.bundle()?;
        let Some(g) = geos.first() else {
            return Ok(Verdict::inconclusive("no usable bundle geodesics from the anchor"));
        };
        let n_top = self.spec.window.n_max;
        let tail_fn = self.seq.at(n_top);
        let mut worst = WorstCase::new();
        for (label, func) in [(format!("f^{n_top}"), &tail_fn), ("limit".to_string(), self.f)] {
            let (Some(e1), Some(e0)) = (
                self.envelope_at(func, g.end(), lambda)?,
                self.envelope_at(func, g.start(), lambda)?,
            ) else {
                return Ok(Verdict::inconclusive("endpoint envelope solve missed its certificate"));
            };
            let lhs = e1 - e0;
            let mut acc = 0.0;
            let mut warm = Vec::new();
            for j in 0..QUAD_NODES {
                let t = (j as f64 + 0.5) / QUAD_NODES as f64;
                let Some(d) = self.envelope_deriv(func, g, t, lambda, &mut warm)? else {
                    return Ok(Verdict::inconclusive(
                        "quadrature envelope solve missed its certificate",
                    ));
                };
                acc += d;
            }
            let rhs = acc / QUAD_NODES as f64;
            let gap = (lhs - rhs).abs();
            let margin = gap - 1e-6 * (1.0 + lhs.abs());
            worst.update(margin.max(0.0), || Witness {
                lambda: Some(lambda),
                n: (label != "limit").then_some(n_top),
                value: gap,
                label: format!("integral identity residual for {label}"),
                ..Witness::default()
            });
        }
        Ok(worst
            .verdict(0.0)
            .with_note(format!("midpoint rule with {QUAD_NODES} nodes")))
    }

    /// Auxiliary for the envelope-to-prox direction: the diagonal
    /// `lambda(n) = 1 / sqrt(n)` envelope values approach `f` within the
    /// standard envelope gap budget `lambda |slope|^2 / 2`.
    fn diagonal_envelope(&self, uniform_bound: Option<f64>) -> Result<Verdict> {
        let Some(c) = uniform_bound else {
            return Ok(Verdict::inconclusive(
                "diagonal budget needs a finite uniform slope bound",
            ));
        };
        let ns = tail_indices(&self.spec.window);
        let tol = self.spec.window.tol_seq;
        let mut worst = WorstCase::new();
        let mut skipped = false;
        for x in &self.spec.points {
            let fx = self.f.evaluate(x)?;
            if fx.is_infinite() {
                skipped = true;
                continue;
            }
            for &n in &ns {
                let l = 1.0 / (n as f64).sqrt();
                let r = prox(&self.seq.at(n), x, &ProxParams::new(l)?.with_seed(self.seed))?;
                if !r.converged {
                    return Ok(Verdict::inconclusive(format!(
                        "diagonal envelope solve for f^{n} missed its certificate"
                    )));
                }
                let gap = (r.envelope - fx.value()).abs();
                let allow = tol + 0.5 * l * (c + tol) * (c + tol);
                let margin = gap - allow;
                worst.update(margin.max(0.0), || Witness {
                    point: Some(x.coords_text()),
                    lambda: Some(l),
                    n: Some(n),
                    value: gap,
                    label: "diagonal envelope gap exceeds the slope budget".into(),
                    ..Witness::default()
                });
            }
        }
        let mut v = worst.verdict(0.0);
        if skipped {
            v = v.with_note("points outside the limit domain skipped on the diagonal");
        }
        Ok(v)
    }
}

fn sub(name: &str, role: CheckRole, verdict: Verdict) -> SubCheck {
    SubCheck { name: name.to_string(), role, verdict }
}

/// Runs the sub-checks for one theorem and folds them into a report with
/// implication semantics: hypotheses gate the conclusion verdict, and the
/// falsification flag fires only when passing hypotheses meet a violated
/// conclusion.
pub fn theorem_verify(
    id: TheoremId,
    seq: &FunctionSequence,
    f: &ConvexFunctional,
    spec: &ModeSpec,
    extras: &TheoremExtras,
    seed: u64,
) -> Result<TheoremReport> {
    let c = Components { seq, f, spec, extras, seed };
    let mut notes = vec![format!(
        "window [{}, {}], tol {}",
        spec.window.n_min, spec.window.n_max, spec.window.tol_seq
    )];
    let checks = match id {
        TheoremId::Thm1 => vec![
            sub("pointwise", CheckRole::Hypothesis, c.mode(Mode::Pointwise)?),
            sub("asymptotic_slopes", CheckRole::Hypothesis, c.slope_profile()?.0),
            sub("prox", CheckRole::Hypothesis, c.mode(Mode::Prox)?),
            sub("envelope", CheckRole::Conclusion, c.mode(Mode::Envelope)?),
        ],
        TheoremId::Thm2 => {
            let (profile, bound) = c.slope_profile()?;
            notes.push("diagonal uses lambda(n) = 1/sqrt(n)".to_string());
            vec![
                sub("asymptotic_slopes", CheckRole::Hypothesis, profile),
                sub("envelope", CheckRole::Hypothesis, c.mode(Mode::Envelope)?),
                sub("prox", CheckRole::Conclusion, c.mode(Mode::Prox)?),
                sub("pointwise", CheckRole::Conclusion, c.mode(Mode::Pointwise)?),
                sub("diagonal_envelope", CheckRole::Auxiliary, c.diagonal_envelope(bound)?),
            ]
        }
        TheoremId::MainThm => {
            let (profile, _) = c.slope_profile()?;
            let mosco = c.mosco()?;
            let pointwise = c.mode(Mode::Pointwise)?;
            let proxv = c.mode(Mode::Prox)?;
            let fwd = if mosco.status == Status::ConsistentWith {
                meet(&pointwise, &proxv)
            } else {
                Verdict::inconclusive(
                    "forward direction not applicable: Mosco premise not established here",
                )
            };
            let bwd = if pointwise.status == Status::ConsistentWith
                && proxv.status == Status::ConsistentWith
            {
                mosco.clone()
            } else {
                Verdict::inconclusive(
                    "reverse direction not applicable: pointwise + prox premise not established here",
                )
            };
            vec![
                sub("asymptotic_slopes", CheckRole::Hypothesis, profile),
                sub("mosco_to_modes", CheckRole::Conclusion, fwd),
                sub("modes_to_mosco", CheckRole::Conclusion, bwd),
                sub("mosco", CheckRole::Auxiliary, mosco),
                sub("pointwise", CheckRole::Auxiliary, pointwise),
                sub("prox", CheckRole::Auxiliary, proxv),
            ]
        }
        TheoremId::BacakFwd => vec![
            sub("mosco", CheckRole::Hypothesis, c.mosco()?),
            sub("envelope", CheckRole::Conclusion, c.mode(Mode::Envelope)?),
            sub("prox", CheckRole::Conclusion, c.mode(Mode::Prox)?),
        ],
        TheoremId::Bacak2Bwd => vec![
            sub("envelope", CheckRole::Hypothesis, c.mode(Mode::Envelope)?),
            sub("mosco", CheckRole::Conclusion, c.mosco()?),
        ],
        TheoremId::AttouchHadamard => {
            let lambda = spec.lambdas[0];
            notes.push(format!(
                "anchor {}, lambda {lambda}",
                c.anchor().coords_text()
            ));
            vec![
                sub("prox", CheckRole::Hypothesis, c.mode(Mode::Prox)?),
                sub(
                    "normalization",
                    CheckRole::Hypothesis,
                    normalization_tails(seq, f, &c.anchor(), lambda, &spec.window, seed)?,
                ),
                sub(
                    "envelope_dirderiv",
                    CheckRole::Hypothesis,
                    c.dirderiv_convergence(lambda)?,
                ),
                sub("envelope", CheckRole::Conclusion, c.mode(Mode::Envelope)?),
                sub("integral_identity", CheckRole::Auxiliary, c.integral_identity(lambda)?),
            ]
        }
    };
    Ok(TheoremReport::from_checks(id, checks, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{abs, FamilyRegistry};
    use crate::space::{Coords, Space, SpaceRegistry};

    fn line() -> Space {
        SpaceRegistry::builtin().build("kind=euclidean,dim=1").unwrap()
    }

    fn pt(space: &Space, x: f64) -> Point {
        space.point(Coords::Euclidean(vec![x])).unwrap()
    }

    fn spec(space: &Space) -> ModeSpec {
        ModeSpec::new(
            Mode::Mosco,
            vec![pt(space, 0.0), pt(space, 0.5), pt(space, 2.0)],
            vec![1.0, 0.1],
            WindowSpec::new(128, 256, 1e-2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn forward_theorems_hold_for_shifted_abs() {
        let space = line();
        let seq = FamilyRegistry::builtin().build(&space, "family=shifted_abs").unwrap();
        let f = abs(&space, 1.0).unwrap();
        let extras = TheoremExtras::default();
        for id in [TheoremId::Thm1, TheoremId::Thm2, TheoremId::BacakFwd, TheoremId::Bacak2Bwd] {
            let report = theorem_verify(id, &seq, &f, &spec(&space), &extras, 11).unwrap();
            assert!(report.hypotheses_pass(), "{id}: {report:?}");
            assert_eq!(report.conclusion_verdict, Status::ConsistentWith, "{id}");
            assert!(!report.falsified, "{id}");
        }
    }

    #[test]
    fn main_equivalence_holds_both_ways_for_shifted_abs() {
        let space = line();
        let seq = FamilyRegistry::builtin().build(&space, "family=shifted_abs").unwrap();
        let f = abs(&space, 1.0).unwrap();
        let report = theorem_verify(
            TheoremId::MainThm,
            &seq,
            &f,
            &spec(&space),
            &TheoremExtras::default(),
            11,
        )
        .unwrap();
        assert_eq!(report.conclusion_verdict, Status::ConsistentWith, "{report:?}");
        assert!(!report.falsified);
    }

    #[test]
    fn oscillating_family_never_falsifies_the_web() {
        let space = line();
        let seq = FamilyRegistry::builtin().build(&space, "family=oscillating").unwrap();
        let f = crate::functional::zero(&space);
        for id in TheoremId::ALL {
            let report =
                theorem_verify(id, &seq, &f, &spec(&space), &TheoremExtras::default(), 11)
                    .unwrap();
            assert!(!report.falsified, "{id}: {report:?}");
        }
    }

    #[test]
    fn normalization_refuses_without_mosco() {
        let space = line();
        let seq = FamilyRegistry::builtin().build(&space, "family=oscillating").unwrap();
        let f = crate::functional::zero(&space);
        let err =
            normalization_check(&seq, &f, &pt(&space, 0.3), 1.0, &spec(&space), 11).unwrap_err();
        assert!(err.to_string().contains("Mosco"), "{err}");
    }

    #[test]
    fn normalization_passes_for_shifted_abs() {
        let space = line();
        let seq = FamilyRegistry::builtin().build(&space, "family=shifted_abs").unwrap();
        let f = abs(&space, 1.0).unwrap();
        let v = normalization_check(&seq, &f, &pt(&space, 0.7), 0.5, &spec(&space), 11).unwrap();
        assert_eq!(v.status, Status::ConsistentWith, "{v:?}");
    }

    #[test]
    fn equi_lipschitz_holds_for_steepening_quadratics() {
        let space = line();
        let seq =
            FamilyRegistry::builtin().build(&space, "family=steepening_quadratic").unwrap();
        let region = Region::ball(pt(&space, 0.0), 2.0).unwrap();
        let v = equi_lipschitz_check(
            &seq,
            0.5,
            &pt(&space, 0.0),
            &region,
            16,
            &WindowSpec::new(128, 256, 1e-2).unwrap(),
            11,
        )
        .unwrap();
        assert_eq!(v.status, Status::ConsistentWith, "{v:?}");
        // Envelope gradient of n d^2 at radius R caps near R / lambda.
        assert!(v.residual.unwrap() <= 2.0 / 0.5 + 0.5, "{v:?}");
    }

    #[test]
    fn attouch_wiring_reports_integral_identity() {
        let space = line();
        let anchor = pt(&space, 0.25);
        let seq = FamilyRegistry::builtin().build(&space, "family=shifted_abs").unwrap();
        let f = abs(&space, 1.0).unwrap();
        let mut extras = TheoremExtras::default();
        extras.anchor = Some(anchor.clone());
        extras.bundle = vec![pt(&space, 1.25)];
        let ms = ModeSpec::new(
            Mode::Mosco,
            vec![pt(&space, 0.0), pt(&space, 0.5)],
            vec![1.0],
            WindowSpec::new(128, 256, 1e-2).unwrap(),
        )
        .unwrap();
        let report =
            theorem_verify(TheoremId::AttouchHadamard, &seq, &f, &ms, &extras, 11).unwrap();
        assert!(report.hypotheses_pass(), "{report:?}");
        assert_eq!(report.conclusion_verdict, Status::ConsistentWith, "{report:?}");
        let aux = report
            .checks
            .iter()
            .find(|ch| ch.name == "integral_identity")
            .expect("auxiliary present");
        assert_eq!(aux.verdict.status, Status::ConsistentWith, "{aux:?}");
        assert!(aux.verdict.residual.unwrap() <= 1e-6 * 4.0, "{aux:?}");
    }
}
