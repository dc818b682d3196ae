//! One-dimensional minimization on a closed interval.
//!
//! Golden-section search handles convex objectives that may take the value
//! `+∞` (indicator terms); a guarded parabolic polish step recovers full
//! floating-point accuracy at smooth minima, where pure golden-section
//! stalls on the round-off plateau near `sqrt(eps)`.

/// Result of a line search.
#[derive(Clone, Copy, Debug)]
pub struct LineMin {
    pub t: f64,
    pub value: f64,
    pub evals: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Grid cells scanned before the golden-section phase. The scan brackets
/// the minimum of a convex objective even when most of the interval is
/// `+∞`: pure golden-section can discard the finite region when both
/// interior probes are infinite.
const SCAN_CELLS: usize = 16;

/// Golden-section search on `[lo, hi]`, preceded by a bracketing scan.
/// Assumes the objective is convex on the interval (values of `+∞` for
/// indicator-like terms are allowed). Stops when the bracket is narrower
/// than `tol_t`.
pub fn golden_min(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, tol_t: f64) -> LineMin {
    let mut evals = 0usize;
    let mut eval = |t: f64, evals: &mut usize| -> f64 {
        *evals += 1;
        f(t)
    };

    let span = hi - lo;
    let mut best = LineMin { t: lo, value: eval(lo, &mut evals), evals: 0 };
    let mut best_cell = 0usize;
    for i in 1..=SCAN_CELLS {
        let t = if i == SCAN_CELLS { hi } else { lo + span * (i as f64) / (SCAN_CELLS as f64) };
        let v = eval(t, &mut evals);
        if v < best.value {
            best = LineMin { t, value: v, evals: 0 };
            best_cell = i;
        }
    }
    // Convexity confines the minimum to the cells adjacent to the best
    // grid point.
    let mut a = lo + span * (best_cell.saturating_sub(1) as f64) / (SCAN_CELLS as f64);
    let mut b = lo + span * ((best_cell + 1).min(SCAN_CELLS) as f64) / (SCAN_CELLS as f64);

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut evals);
    let mut fd = eval(d, &mut evals);
    for (t, v) in [(c, fc), (d, fd)] {
        if v < best.value {
            best = LineMin { t, value: v, evals: 0 };
        }
    }

    while (b - a).abs() > tol_t {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut evals);
            if fc < best.value {
                best = LineMin { t: c, value: fc, evals: 0 };
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut evals);
            if fd < best.value {
                best = LineMin { t: d, value: fd, evals: 0 };
            }
        }
    }

    let mid = 0.5 * (a + b);
    let fmid = eval(mid, &mut evals);
    if fmid < best.value {
        best = LineMin { t: mid, value: fmid, evals: 0 };
    }
    best.evals = evals;
    best
}

/// One guarded parabolic-fit step around `t0`: fits a parabola through
/// `(t0-h, t0, t0+h)` and jumps to its vertex if that strictly helps.
/// Returns the improved point (or the input when the fit is rejected).
fn parabolic_step(
    f: &mut dyn FnMut(f64) -> f64,
    t0: f64,
    v0: f64,
    h: f64,
    lo: f64,
    hi: f64,
    evals: &mut usize,
) -> (f64, f64) {
    let tl = (t0 - h).max(lo);
    let tr = (t0 + h).min(hi);
    if tl >= t0 || tr <= t0 {
        return (t0, v0);
    }
    *evals += 2;
    let vl = f(tl);
    let vr = f(tr);
    if !vl.is_finite() || !vr.is_finite() || !v0.is_finite() {
        return (t0, v0);
    }
    // Vertex of the parabola through the three samples.
    let dl = t0 - tl;
    let dr = tr - t0;
    let num = dl * dl * (v0 - vr) - dr * dr * (v0 - vl);
    let den = dl * (v0 - vr) + dr * (v0 - vl);
    if den.abs() < f64::MIN_POSITIVE || !num.is_finite() || !den.is_finite() {
        return (t0, v0);
    }
    let tv = t0 - 0.5 * num / den;
    if !(lo..=hi).contains(&tv) || !tv.is_finite() {
        return (t0, v0);
    }
    *evals += 1;
    let vv = f(tv);
    // Near the minimum the objective differences sit below round-off, so
    // the vertex is accepted on a tie within a few ulps; without the
    // margin the polish cannot correct the sqrt(eps) plateau of the
    // golden-section phase.
    let margin = 8.0 * f64::EPSILON * (1.0 + v0.abs());
    let mut out = (t0, v0);
    for (t, v) in [(tl, vl), (tr, vr)] {
        if v < out.1 {
            out = (t, v);
        }
    }
    if vv <= out.1 + margin {
        out = (tv, vv);
    }
    out
}

/// Golden-section search followed by two shrinking parabolic polish steps.
pub fn line_minimize(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, tol_t: f64) -> LineMin {
    let mut best = golden_min(f, lo, hi, tol_t);
    let mut evals = best.evals;
    let span = hi - lo;
    let (mut t, mut v) = (best.t, best.value);
    for h in [1e-4 * span, 1e-6 * span] {
        if h <= 0.0 {
            break;
        }
        let (tn, vn) = parabolic_step(f, t, v, h, lo, hi, &mut evals);
        t = tn;
        v = vn;
    }
    best.t = t;
    best.value = v;
    best.evals = evals;
    best
}

/// A reproducible generator for the sub-task identified by `parts`.
pub fn seeded_rng(base: u64, parts: &[u64]) -> rand_chacha::ChaCha8Rng {
    use rand_chacha::rand_core::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(mix_seed(base, parts))
}

/// Deterministic seed derivation: mixes a base seed with index parts so
/// that every sub-task gets an independent, reproducible stream.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base ^ 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        z ^= p.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(z << 6) ^ (z >> 2);
        // splitmix64 finalizer
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z = x ^ (x >> 31);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum_to_high_accuracy() {
        let mut f = |t: f64| (t - 0.3712).powi(2) * 5.0 + 1.0;
        let m = line_minimize(&mut f, 0.0, 1.0, 1e-10);
        assert!((m.t - 0.3712).abs() < 1e-10, "t = {}", m.t);
    }

    #[test]
    fn finds_kink_minimum() {
        let mut f = |t: f64| (t - 0.25).abs() * 2.0;
        let m = line_minimize(&mut f, 0.0, 1.0, 1e-10);
        assert!((m.t - 0.25).abs() < 1e-9, "t = {}", m.t);
    }

    #[test]
    fn tolerates_infinite_plateaus() {
        // Indicator of [0.4, 0.6] plus a tilt: minimum at 0.4.
        let mut f = |t: f64| {
            if (0.4..=0.6).contains(&t) {
                t
            } else {
                f64::INFINITY
            }
        };
        let m = line_minimize(&mut f, 0.0, 1.0, 1e-10);
        assert!((m.t - 0.4).abs() < 1e-8, "t = {}", m.t);
        assert!(m.value.is_finite());
    }

    #[test]
    fn endpoint_minimum_is_found() {
        let mut f = |t: f64| 3.0 - t;
        let m = line_minimize(&mut f, 0.0, 1.0, 1e-10);
        assert!((m.t - 1.0).abs() < 1e-9);
    }

    #[test]
    fn seed_mixing_is_stable_and_sensitive() {
        let a = mix_seed(42, &[1, 2, 3]);
        let b = mix_seed(42, &[1, 2, 3]);
        let c = mix_seed(42, &[1, 2, 4]);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
