//! Derivative-free scalar maximization.
//!
//! A uniform grid scan locates the best cell; golden-section search then
//! refines inside the neighbouring cells. Extra candidate points (kinks,
//! boundary values) can be supplied and are always evaluated, so a maximum
//! sitting exactly on a non-differentiable point is never missed.

/// Golden ratio conjugate, (√5 − 1)/2.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy)]
pub struct MaximizeOptions {
    pub grid_points: usize,
    /// Final bracket width of the golden-section stage.
    pub tol: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            grid_points: 512,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Maximizes `f` over `[lo, hi]`.
///
/// Ties are broken towards the smallest `x`.
pub fn maximize<F>(f: F, lo: f64, hi: f64, extra: &[f64], opts: MaximizeOptions) -> Maximum
where
    F: Fn(f64) -> f64,
{
    assert!(lo < hi, "empty search interval [{lo}, {hi}]");
    let n = opts.grid_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let grid_x = |i: usize| if i == n - 1 { hi } else { lo + step * i as f64 };

    let mut best_i = 0;
    let mut best = Maximum {
        x: lo,
        value: f(lo),
    };
    for i in 1..n {
        let x = grid_x(i);
        let v = f(x);
        if v > best.value {
            best = Maximum { x, value: v };
            best_i = i;
        }
    }

    let a = grid_x(best_i.saturating_sub(1));
    let b = grid_x((best_i + 1).min(n - 1));
    let refined = golden_section(&f, a, b, opts.tol);
    consider(&mut best, refined);

    for &x in extra {
        if (lo..=hi).contains(&x) {
            consider(&mut best, Maximum { x, value: f(x) });
        }
    }
    best
}

fn consider(best: &mut Maximum, cand: Maximum) {
    if cand.value > best.value || (cand.value == best.value && cand.x < best.x) {
        *best = cand;
    }
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc >= fd {
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
        if c >= d {
            break;
        }
    }
    let mut best = Maximum { x: c, value: fc };
    consider(&mut best, Maximum { x: d, value: fd });
    for x in [a, b] {
        consider(&mut best, Maximum { x, value: f(x) });
    }
    best
}

/// Boundary of a predicate that holds on the left part of `[lo, hi]`.
/// Stops when the bracket cannot be split further in floating point.
pub fn bisect_boundary(below: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
