//! Small scalar solvers shared by the analysis modules.

use crate::error::{Error, Result};

/// Sign changes of `fun` on a uniform scan of `[lo, hi]`, returned as
/// bracketing sub-intervals.
pub fn scan_sign_changes<F>(fun: &F, lo: f64, hi: f64, samples: usize) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = samples.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut out = Vec::new();
    let mut prev_x = lo;
    let mut prev = fun(lo)?;
    for i in 1..n {
        let x = if i == n - 1 { hi } else { lo + step * i as f64 };
        let v = fun(x)?;
        if prev == 0.0 {
            out.push((prev_x, prev_x));
        } else if prev.signum() != v.signum() && v != 0.0 {
            out.push((prev_x, x));
        }
        prev_x = x;
        prev = v;
    }
    if prev == 0.0 {
        out.push((hi, hi));
    }
    Ok(out)
}

/// Bisection on a bracketing interval down to width `tol`.
pub fn bisect<F>(fun: &F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if lo == hi {
        return Ok(lo);
    }
    let mut f_lo = fun(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = fun(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Locates the unique zero crossing of `fun` in `[lo, hi]`.
pub fn single_crossing<F>(fun: &F, lo: f64, hi: f64, samples: usize, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let brackets = scan_sign_changes(fun, lo, hi, samples)?;
    match brackets.as_slice() {
        [] => Err(Error::NoResonance { lo, hi }),
        [(a, b)] => bisect(fun, *a, *b, tol),
        many => Err(Error::MultipleResonances {
            lo,
            hi,
            count: many.len(),
        }),
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of `fun` on `[lo, hi]` with a fixed number of
/// interval reductions. Returns `(argmax, max)` over every evaluated point.
pub fn golden_section_max<F, E>(fun: F, mut lo: f64, mut hi: f64, iterations: usize) -> std::result::Result<(f64, f64), E>
where
    F: Fn(f64) -> std::result::Result<f64, E>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = fun(x1)?;
    let mut f2 = fun(x2)?;
    let mut best = if f2 > f1 { (x2, f2) } else { (x1, f1) };
    for _ in 0..iterations {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = fun(x1)?;
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = fun(x2)?;
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    Ok(best)
}

/// Composite Simpson rule with adaptive bisection and Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(fun: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let fa = fun(a);
    let fb = fun(b);
    let (m, fm, whole) = simpson(fun, a, fa, b, fb);
    recurse(fun, a, fa, b, fb, m, fm, whole, tol, 48)
}
