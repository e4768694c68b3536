//! One-dimensional search helpers: golden-section minimisation, a
//! scan-then-refine wrapper for objectives that may be bimodal, and
//! bisection on a sign boundary.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimum of a function on an interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for a local minimum of `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Minimum {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // the bracket shrinks by 1/φ per step, so this is plenty
    for _ in 0..200 {
        if (b - a) <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc < fd { Minimum { x: c, value: fc } } else { Minimum { x: d, value: fd } };
    for x in [a, b] {
        let fx = f(x);
        if fx < best.value {
            best = Minimum { x, value: fx };
        }
    }
    best
}

/// Uniform scan of `points` abscissae on `[lo, hi]` followed by a golden
/// refinement around the best grid point.
pub fn scan_then_refine<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize, tol: f64) -> Minimum {
    if hi <= lo || points < 2 {
        return Minimum { x: lo, value: f(lo) };
    }
    let step = (hi - lo) / (points - 1) as f64;
    let at = |k: usize| if k + 1 == points { hi } else { lo + step * k as f64 };
    let mut best_k = 0;
    let mut best = f64::INFINITY;
    for k in 0..points {
        let v = f(at(k));
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let left = at(best_k.saturating_sub(1));
    let right = at((best_k + 1).min(points - 1));
    let refined = golden_section(&f, left, right, tol);
    if refined.value <= best {
        refined
    } else {
        Minimum { x: at(best_k), value: best }
    }
}

/// Bisection for the boundary between `holds(lo) == true` and
/// `holds(hi) == false`. Returns the final `(lo, hi)` bracket, whose
/// width is at most `width`.
pub fn bisect_boundary<P: Fn(f64) -> bool>(holds: P, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}
