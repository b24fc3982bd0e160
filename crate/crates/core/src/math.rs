//! Shared numerical kernels: elementary functions, Gauss rules, a symmetric
//! tridiagonal eigensolver and adaptive Gauss-Kronrod integration.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

pub use libm::{atan, ceil, cos, exp, expm1, fabs, floor, hypot, lgamma, log, pow, round, sin, sqrt, tan, tgamma};

pub const PI: f64 = core::f64::consts::PI;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if fabs(dx) <= 1e-16 * fabs(x).max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
/// diagonal and sub-diagonal, by implicit QL iteration.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(invalid("tridiagonal matrix shape mismatch"));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = fabs(d[m]) + fabs(d[m + 1]);
                if fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 80 {
                return Err(Error::QuadratureConstructionFailed(
                    "QL iteration did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(d)
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss-Kronrod 7/15 panel: (kronrod estimate, |kronrod - gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * h, fabs((resk - resg) * h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss-Kronrod integration on a finite interval.
///
/// Bisects the panel with the largest error estimate until the summed error
/// is below `max(abs_tol, rel_tol * |I|)` or `max_panels` is reached.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut panels: Vec<(f64, f64, f64, f64)> = vec![(a, b, v, e)];
    loop {
        let (value, error) = panels
            .iter()
            .fold((0.0, 0.0), |(s, err), p| (s + p.2, err + p.3));
        if !value.is_finite() {
            return Err(Error::QuadratureBudgetExceeded { estimate: f64::INFINITY });
        }
        let target = abs_tol.max(rel_tol * fabs(value));
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureBudgetExceeded { estimate: error });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap_or(core::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // panel width at machine resolution; accept what we have
            return Ok(Estimate { value, error });
        }
        let (v1, e1) = gk15(&mut f, pa, mid);
        let (v2, e2) = gk15(&mut f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

/// Outcome of integrating over (0, inf) by dyadic shells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShellIntegral {
    Finite(f64),
    Divergent,
}

impl ShellIntegral {
    pub fn value_or_inf(self) -> f64 {
        match self {
            ShellIntegral::Finite(v) => v,
            ShellIntegral::Divergent => f64::INFINITY,
        }
    }
}

const MAX_SHELLS: usize = 900;

/// Integrates a nonnegative-tailed `f` over (0, inf) as a sum of dyadic shells
/// `[c 2^k, c 2^(k+1)]` running outward from `center` in both directions.
///
/// Each direction stops once shell contributions become negligible, or once
/// they settle into a geometric progression whose remainder can be summed in
/// closed form. Contributions that stop shrinking (ratio -> 1 or above) mark
/// the integral as divergent; this catches both power and logarithmic
/// divergences at either end.
pub fn integrate_shells<F: FnMut(f64) -> f64>(mut f: F, center: f64, tol: f64) -> Result<ShellIntegral> {
    if !(center > 0.0) {
        return Err(invalid("shell center must be positive"));
    }
    let first_up = integrate(&mut f, center, 2.0 * center, 0.1 * tol, 0.0, 4000)?.value;
    let first_down = integrate(&mut f, 0.5 * center, center, 0.1 * tol, 0.0, 4000)?.value;
    let mut total = first_up + first_down;
    for upward in [true, false] {
        let mut prev = if upward { first_up } else { first_down };
        let mut prev_ratio = f64::NAN;
        let mut flat_run = 0usize;
        let mut small_run = 0usize;
        let mut done = false;
        for k in 1..MAX_SHELLS {
            let (lo, hi) = if upward {
                (center * pow(2.0, k as f64), center * pow(2.0, k as f64 + 1.0))
            } else {
                (center * pow(2.0, -(k as f64) - 1.0), center * pow(2.0, -(k as f64)))
            };
            let abs_tol = 0.01 * tol * fabs(total);
            let s = integrate(&mut f, lo, hi, 0.1 * tol, abs_tol, 4000)?.value;
            total += s;
            if fabs(s) <= 0.01 * tol * fabs(total) {
                small_run += 1;
                if small_run >= 3 {
                    done = true;
                    break;
                }
            } else {
                small_run = 0;
            }
            if prev != 0.0 && s != 0.0 {
                let ratio = s / prev;
                if ratio >= 0.999 {
                    flat_run += 1;
                    if flat_run >= 12 && k >= 24 {
                        return Ok(ShellIntegral::Divergent);
                    }
                } else {
                    flat_run = 0;
                }
                if k >= 8 && ratio > 0.0 && ratio < 0.99 && prev_ratio.is_finite() {
                    let settled = fabs(ratio - prev_ratio) <= tol * (1.0 - ratio);
                    if settled {
                        total += s * ratio / (1.0 - ratio);
                        done = true;
                        break;
                    }
                }
                prev_ratio = ratio;
            }
            prev = s;
        }
        if !done {
            if flat_run > 0 {
                return Ok(ShellIntegral::Divergent);
            }
            return Err(Error::QuadratureBudgetExceeded { estimate: fabs(prev) });
        }
    }
    Ok(ShellIntegral::Finite(total))
}

/// Least-squares line `y = intercept + slope * x`; returns (slope, intercept, r^2).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 8, 17] {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * pow(*x, p as f64)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!(fabs(approx - exact) < 1e-13, "n={n} p={p}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn tridiagonal_eigenvalues_of_laplacian_stencil() {
        let n = 12;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let ev = symmetric_tridiagonal_eigenvalues(&d, &e).unwrap();
        for (k, lam) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * cos(PI * (k as f64 + 1.0) / (n as f64 + 1.0));
            assert!(fabs(lam - exact) < 1e-13);
        }
    }

    #[test]
    fn adaptive_integration_handles_peaks() {
        let est = integrate(|x| 0.01 / (x * x + 1e-4), -1.0, 1.0, 1e-12, 0.0, 2000).unwrap();
        let exact = 2.0 * atan(100.0);
        assert!(fabs(est.value - exact) < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let r = integrate(|x| sin(1e4 * x), 0.0, 10.0, 1e-14, 0.0, 4);
        assert!(matches!(r, Err(Error::QuadratureBudgetExceeded { .. })));
    }

    #[test]
    fn shells_converge_and_detect_divergence() {
        let v = integrate_shells(|x| x * exp(-x), 1.0, 1e-11).unwrap();
        assert!(fabs(v.value_or_inf() - 1.0) < 1e-10);
        let slow = integrate_shells(|x| pow(x, -0.9) * exp(-x), 1.0, 1e-11).unwrap();
        assert!(fabs(slow.value_or_inf() - tgamma(0.1)) < 1e-8 * tgamma(0.1));
        assert_eq!(integrate_shells(|x| exp(-x) / x, 1.0, 1e-10).unwrap(), ShellIntegral::Divergent);
        assert_eq!(
            integrate_shells(|x| 1.0 / (1.0 + x), 1.0, 1e-10).unwrap(),
            ShellIntegral::Divergent
        );
    }
}
