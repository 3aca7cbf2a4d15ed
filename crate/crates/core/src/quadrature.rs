//! Adaptive Simpson quadrature on finite intervals.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 60;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // Start from a fixed grid of panels so narrow peaks are not missed.
    const START: usize = 16;
    let h = (b - a) / START as f64;
    let mut total = 0.0;
    for i in 0..START {
        let lo = a + h * i as f64;
        let hi = if i + 1 == START { b } else { lo + h };
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let panel = Panel {
            a: lo,
            b: hi,
            fa,
            fm,
            fb,
            whole: simpson(lo, hi, fa, fm, fb),
        };
        total += refine(f, panel, tol / START as f64, MAX_DEPTH)?;
    }
    Ok(total)
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (p.a + p.b);
    let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if !delta.is_finite() {
        return Err(Error::Numeric("non-finite integrand".into()));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "adaptive quadrature did not converge on [{}, {}]",
            p.a, p.b
        )));
    }
    let l = refine(
        f,
        Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left },
        tol / 2.0,
        depth - 1,
    )?;
    let r = refine(
        f,
        Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right },
        tol / 2.0,
        depth - 1,
    )?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_peaks() {
        let v = integrate(&|x: f64| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let v = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        // Narrow Gaussian bump of unit mass.
        let s = 1e-3;
        let g = |x: f64| (-(x - 0.37).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let v = integrate(&g, 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }
}
