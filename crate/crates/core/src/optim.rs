//! Golden-section search for unimodal scalar minimisation.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimum of a unimodal `f` on `[a, b]`, returned as `(x, f(x))`.
///
/// The bracket is shrunk until it is narrower than `tol`; the endpoints
/// themselves are evaluated too, so a minimum sitting on the boundary is
/// found exactly.
pub fn golden_section_minimize(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Vertex of the parabola through `x - h`, `x`, `x + h`, accepted when it
/// stays within `h` of `x` and inside `[lo, hi]`.
///
/// Comparing function values pins a flat minimum down only to about the
/// square root of the evaluation noise; a finite-difference vertex with a
/// moderate `h` does much better.
pub fn parabolic_refine(f: impl Fn(f64) -> f64, x: f64, lo: f64, hi: f64, h: f64) -> f64 {
    if x - h < lo || x + h > hi {
        return x;
    }
    let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
    let curvature = fp - 2.0 * f0 + fm;
    if !(curvature > 0.0) {
        return x;
    }
    let step = 0.5 * h * (fm - fp) / curvature;
    if step.abs() <= h {
        x + step
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_sharpens_flat_minimum() {
        let f = |x: f64| 1.0 + 1e-3 * (x - 0.123_456_789).powi(2) + 1e-4 * (x - 0.123_456_789).powi(3);
        let (x, _) = golden_section_minimize(f, 0.0, 1.0, 1e-12);
        let x = parabolic_refine(f, parabolic_refine(f, x, 0.0, 1.0, 1e-3), 0.0, 1.0, 1e-4);
        assert!((x - 0.123_456_789).abs() < 1e-9, "{x}");
    }

    #[test]
    fn finds_interior_minimum() {
        let (x, fx) = golden_section_minimize(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finds_boundary_minimum() {
        let (x, fx) = golden_section_minimize(|x| 2.0 - x, 0.0, 1.0, 1e-12);
        assert_eq!(x, 1.0);
        assert_eq!(fx, 1.0);
        let (x, _) = golden_section_minimize(|x| x, 0.0, 1.0, 1e-12);
        assert_eq!(x, 0.0);
    }
}
