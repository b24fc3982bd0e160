//! Linear dispersion relation `w^2 = k^2 + Sigma(w, k)` with the self-energy
//! `Sigma = int rho(mu) k^2 / (w^2 - k^2 + mu) dmu`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::math::{atan, ceil, fabs, gauss_legendre, integrate_shells, sqrt, tan, ShellIntegral};
use crate::spectral::{spectral_constants, SpectralDensity};

pub const DEFAULT_K_GRID: [f64; 7] = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
pub const DEFAULT_DISPERSION_TOL: f64 = 1e-10;
pub const SCAN_SEEDS: usize = 32;
const SCAN_SEED: u64 = 0x00c0_ffee;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub k: f64,
    pub omega: f64,
    pub sigma: f64,
    pub residual: f64,
}

fn check_k(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(invalid("k must be nonnegative and finite"))
    }
}

/// Real self-energy; requires `w^2 - k^2 + mu > 0` on the support.
pub fn self_energy(rho: &SpectralDensity, omega: f64, k: f64, tol: f64) -> Result<f64> {
    check_k(k)?;
    if !omega.is_finite() {
        return Err(invalid("omega must be finite"));
    }
    if k == 0.0 || rho.is_null() {
        return Ok(0.0);
    }
    let shift = omega * omega - k * k;
    let k2 = k * k;
    if let Some(atoms) = rho.atoms() {
        if shift + atoms[0].mass <= 0.0 {
            return Err(Error::PrincipalValueNotSupported);
        }
        return Ok(atoms.iter().map(|a| a.weight * k2 / (shift + a.mass)).sum());
    }
    if shift < 0.0 {
        return Err(Error::PrincipalValueNotSupported);
    }
    let tol = tol.clamp(1e-13, 1e-4);
    let v = integrate_shells(|mu| rho.value_unchecked(mu) * k2 / (shift + mu), rho.mode(), tol)?;
    Ok(v.value_or_inf())
}

/// Fixed rule `{(mu_i, rho_i w_i)}` for integrals of smooth functions
/// against `rho dmu`, geometrically graded toward `mu = 0` so that
/// near-singular factors `1 / (a + mu)` with small `a` stay resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl DensityRule {
    pub fn new(rho: &SpectralDensity) -> Result<Self> {
        let mut rule = DensityRule { nodes: Vec::new(), weights: Vec::new() };
        if rho.is_null() {
            return Ok(rule);
        }
        if let Some(atoms) = rho.atoms() {
            rule.nodes = atoms.iter().map(|a| a.mass).collect();
            rule.weights = atoms.iter().map(|a| a.weight).collect();
            return Ok(rule);
        }
        let (gx, gw) = gauss_legendre(RULE_POINTS);
        let mut push = |a: f64, b: f64, map: &dyn Fn(f64) -> (f64, f64)| {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in gx.iter().zip(&gw) {
                let (mu, jac) = map(c + h * x);
                rule.nodes.push(mu);
                rule.weights.push(w * h * jac);
            }
        };
        match *rho {
            SpectralDensity::PowerLawExp { beta, lambda, .. } => {
                let m0 = lambda;
                let mut top = lambda * (1.0 + beta);
                let peak = rho.value_unchecked(beta * lambda).max(rho.value_unchecked(0.0));
                while rho.value_unchecked(top) * top > 1e-18 * peak * lambda {
                    top *= 1.25;
                }
                let plain = |mu: f64| (mu, rho.value_unchecked(mu));
                let mut hi = m0;
                for _ in 0..GRADING_LEVELS {
                    push(0.5 * hi, hi, &plain);
                    hi *= 0.5;
                }
                let panels = ceil((top - m0) / (0.25 * lambda)).max(1.0) as usize;
                let h = (top - m0) / panels as f64;
                for p in 0..panels {
                    push(m0 + p as f64 * h, m0 + (p + 1) as f64 * h, &plain);
                }
            }
            SpectralDensity::BreitWigner { alpha, gamma, mu0 } => {
                // mu = mu0 + gamma tan(theta) gives rho dmu = alpha dtheta
                let lo = -atan(mu0 / gamma);
                let hi = core::f64::consts::FRAC_PI_2;
                let map = |th: f64| (mu0 + gamma * tan(th), alpha);
                let first = (hi - lo) / 400.0;
                let mut top = first;
                for _ in 0..GRADING_LEVELS {
                    push(lo + 0.5 * top, lo + top, &map);
                    top *= 0.5;
                }
                for p in 1..400 {
                    push(lo + p as f64 * first, lo + (p + 1) as f64 * first, &map);
                }
            }
            SpectralDensity::DiracComb(_) => unreachable!(),
        }
        Ok(rule)
    }

    /// Self-energy and its `w`-derivative at complex `w`.
    pub fn self_energy(&self, omega: Complex64, k: f64) -> (Complex64, Complex64) {
        let k2 = k * k;
        let shift = omega * omega - k2;
        let mut s = Complex64::new(0.0, 0.0);
        let mut inner = Complex64::new(0.0, 0.0);
        for (&mu, &w) in self.nodes.iter().zip(&self.weights) {
            let r = 1.0 / (shift + mu);
            s += w * r;
            inner += w * r * r;
        }
        (k2 * s, -2.0 * omega * k2 * inner)
    }
}

/// `g(w) = w^2 - k^2 - Sigma(w, k)` at complex `w` by adaptive quadrature of
/// the real and imaginary parts. Fails on the cut `w^2 - k^2 + mu = 0`.
pub fn dispersion_function(rho: &SpectralDensity, omega: Complex64, k: f64) -> Result<Complex64> {
    let k2 = k * k;
    let shift = omega * omega - k2;
    let base = omega * omega - k2;
    if k == 0.0 || rho.is_null() {
        return Ok(base);
    }
    if let Some(atoms) = rho.atoms() {
        return Ok(base - atoms.iter().map(|a| a.weight * k2 / (shift + a.mass)).sum::<Complex64>());
    }
    let part = |f: &dyn Fn(Complex64) -> f64| -> Result<f64> {
        match integrate_shells(|mu| rho.value_unchecked(mu) * f(shift + mu), rho.mode(), 1e-12)? {
            ShellIntegral::Finite(v) if v.is_finite() => Ok(v),
            _ => Err(Error::PrincipalValueNotSupported),
        }
    };
    let s = Complex64::new(part(&|d| (k2 / d).re)?, part(&|d| (k2 / d).im)?);
    Ok(base - s)
}

const RULE_POINTS: usize = 8;
const GRADING_LEVELS: usize = 40;

/// The physical branch `w >= k` by bisection on `g(w) = w^2 - k^2 - Sigma`.
pub fn solve_branch(rho: &SpectralDensity, k: f64, tol: f64) -> Result<DispersionPoint> {
    check_k(k)?;
    if k == 0.0 {
        return Ok(DispersionPoint { k, omega: 0.0, sigma: 0.0, residual: 0.0 });
    }
    let l1 = spectral_constants(rho, 1e-10)?.l1;
    if !l1.is_finite() {
        return Err(invalid("dispersion needs a finite total spectral weight"));
    }
    let g = |w: f64| -> Result<(f64, f64)> {
        let s = self_energy(rho, w, k, 0.01 * tol)?;
        Ok((w * w - k * k - s, s))
    };
    // Sigma(w) <= k^2 l1 / (w^2 - k^2) and w_hi^2 - k^2 >= 2 k sqrt(k^2 + l1),
    // so g(w_hi) >= (4 k^2 l1 - k^2 l1) / (w_hi^2 - k^2) > 0.
    let mut lo = k;
    let mut hi = sqrt(k * k + l1) + k + 1.0;
    let g_lo = match self_energy(rho, lo, k, 0.01 * tol) {
        Ok(s) => -s,
        Err(Error::PrincipalValueNotSupported) => f64::NEG_INFINITY,
        Err(e) => return Err(e),
    };
    let (g_hi, _) = g(hi)?;
    if !(g_lo <= 0.0 && g_hi > 0.0) {
        return Err(Error::RootBracketFailed { g_lo, g_hi });
    }
    if g_lo == 0.0 {
        return Ok(DispersionPoint { k, omega: k, sigma: 0.0, residual: 0.0 });
    }
    let mut best = (hi, g_hi, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (gm, sm) = g(mid)?;
        best = (mid, gm, sm);
        if fabs(gm) <= tol || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (omega, gm, sigma) = best;
    Ok(DispersionPoint { k, omega, sigma, residual: fabs(gm) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityScan {
    /// Largest `|Im w|` among converged roots.
    pub max_im: f64,
    /// Distinct converged roots per grid wavenumber.
    pub roots: Vec<(f64, Vec<Complex64>)>,
    /// Wavenumbers at which no seed converged.
    pub gaps: Vec<f64>,
}

/// Damped complex Newton on `g(w) = w^2 - k^2 - Sigma(w, k)` from 32 seeded
/// starts in `|Re w| <= k + 2`, `|Im w| <= 1`, for every `k` in the grid.
pub fn mode_stability_scan(rho: &SpectralDensity, k_grid: &[f64], tol: f64) -> Result<StabilityScan> {
    let mut scan = StabilityScan { max_im: 0.0, roots: Vec::new(), gaps: Vec::new() };
    for (idx, &k) in k_grid.iter().enumerate() {
        let roots = scan_wavenumber(rho, k, idx as u64, tol)?;
        if roots.is_empty() {
            scan.gaps.push(k);
        }
        for r in &roots {
            scan.max_im = scan.max_im.max(fabs(r.im));
        }
        scan.roots.push((k, roots));
    }
    Ok(scan)
}

/// Converged distinct roots at one wavenumber; `stream` selects the seed
/// sequence so grids can be scanned in any order with identical results.
pub fn scan_wavenumber(rho: &SpectralDensity, k: f64, stream: u64, tol: f64) -> Result<Vec<Complex64>> {
    check_k(k)?;
    let rule = DensityRule::new(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SCAN_SEED);
    rng.set_stream(stream);
    let reach = k + 2.0;
    let mut roots: Vec<Complex64> = Vec::new();
    for _ in 0..SCAN_SEEDS {
        let start = Complex64::new(rng.gen_range(-reach..=reach), rng.gen_range(-1.0..=1.0));
        if let Some(root) = newton(&rule, k, start, tol) {
            // an independent adaptive evaluation rejects artefacts of the
            // fixed rule, which cannot see the cut of a continuous spectrum
            let confirmed = dispersion_function(rho, root, k)
                .map(|g| g.norm() <= 1e3 * tol * (1.0 + k * k))
                .unwrap_or(false);
            if !confirmed {
                continue;
            }
            if !roots.iter().any(|r| (r - root).norm() <= 1e-7 * (1.0 + root.norm())) {
                roots.push(root);
            }
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

fn newton(rule: &DensityRule, k: f64, start: Complex64, tol: f64) -> Option<Complex64> {
    let eval = |w: Complex64| -> Option<(Complex64, Complex64)> {
        let (s, ds) = rule.self_energy(w, k);
        let g = w * w - k * k - s;
        let dg = 2.0 * w - ds;
        (g.re.is_finite() && g.im.is_finite()).then_some((g, dg))
    };
    let scale = 1.0 + k * k;
    let mut w = start;
    let (mut g, mut dg) = eval(w)?;
    for _ in 0..100 {
        if g.norm() <= tol * scale {
            return Some(w);
        }
        if dg.norm() == 0.0 {
            return None;
        }
        let step = g / dg;
        let mut lambda = 1.0;
        loop {
            let trial = w - lambda * step;
            if let Some((gt, dgt)) = eval(trial) {
                if gt.norm() < g.norm() {
                    w = trial;
                    g = gt;
                    dg = dgt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return None;
            }
        }
    }
    (g.norm() <= tol * scale).then_some(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_atom_root(alpha: f64, mu1: f64, k: f64) -> f64 {
        let y = (-mu1 + sqrt(mu1 * mu1 + 4.0 * alpha * k * k)) / 2.0;
        sqrt(k * k + y)
    }

    #[test]
    fn self_energy_basics() {
        let rho = SpectralDensity::dirac_comb(&[(0.7, 2.0)]).unwrap();
        assert_eq!(self_energy(&rho, 3.0, 0.0, 1e-10).unwrap(), 0.0);
        let s = self_energy(&rho, 3.0, 1.5, 1e-10).unwrap();
        assert!(fabs(s - 0.7 * 2.25 / (9.0 - 2.25 + 2.0)) < 1e-15);
        let cont = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        assert_eq!(self_energy(&cont, 0.5, 1.0, 1e-10), Err(Error::PrincipalValueNotSupported));
    }

    #[test]
    fn one_atom_branch_matches_quadratic_formula() {
        let rho = SpectralDensity::dirac_comb(&[(1.0, 1.0)]).unwrap();
        let p = solve_branch(&rho, 1.0, 1e-12).unwrap();
        assert!(fabs(p.omega - one_atom_root(1.0, 1.0, 1.0)) < 1e-10, "{p:?}");
        assert!(fabs(p.omega - 1.272_019_649_514_069) < 1e-10);
        for &c in &[0.1, 3.0] {
            let scaled = rho.scaled(c);
            let p = solve_branch(&scaled, 2.0, 1e-12).unwrap();
            assert!(fabs(p.omega - one_atom_root(c, 1.0, 2.0)) < 1e-10);
        }
    }

    #[test]
    fn zero_wavenumber_has_zero_frequency() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        assert_eq!(solve_branch(&rho, 0.0, 1e-10).unwrap().omega, 0.0);
    }

    #[test]
    fn continuous_branch_is_monotone() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        let ws: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&k| solve_branch(&rho, k, 1e-10).unwrap().omega).collect();
        assert!(ws[0] >= 0.5 && ws[1] >= 1.0 && ws[2] >= 2.0);
        assert!(ws[0] < ws[1] && ws[1] < ws[2]);
    }

    #[test]
    fn null_density_scan_recovers_light_cone() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap().scaled(0.0);
        let roots = scan_wavenumber(&rho, 1.5, 0, 1e-12).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 1.5).norm() < 1e-12 && (roots[1] - 1.5).norm() < 1e-12);
    }

    #[test]
    fn one_atom_scan_finds_the_quartic_roots() {
        // y^2 + mu y - alpha k^2 = 0 with y = w^2 - k^2: at alpha = mu = k = 1
        // the second root gives w^2 = 1 - (1 + sqrt 5) / 2 < 0
        let rho = SpectralDensity::dirac_comb(&[(1.0, 1.0)]).unwrap();
        let roots = scan_wavenumber(&rho, 1.0, 0, 1e-12).unwrap();
        let real = one_atom_root(1.0, 1.0, 1.0);
        let imag = sqrt((1.0 + sqrt(5.0)) / 2.0 - 1.0);
        assert!(roots.iter().any(|r| (r - Complex64::new(real, 0.0)).norm() < 1e-10));
        assert!(roots.iter().any(|r| (r - Complex64::new(-real, 0.0)).norm() < 1e-10));
        assert!(roots.iter().any(|r| (r - Complex64::new(0.0, imag)).norm() < 1e-10), "{roots:?}");
    }

    #[test]
    fn fixed_rule_matches_adaptive_self_energy() {
        for rho in [
            SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap(),
            SpectralDensity::power_law_exp(2.0, 0.5, 3.0).unwrap(),
            SpectralDensity::breit_wigner(1.0, 0.1, 1.0).unwrap(),
        ] {
            let rule = DensityRule::new(&rho).unwrap();
            for &(w, k) in &[(0.14, 0.1), (1.3, 1.0), (2.0, 1.0), (9.0, 8.0)] {
                let exact = self_energy(&rho, w, k, 1e-13).unwrap();
                let (fixed, _) = rule.self_energy(Complex64::new(w, 0.0), k);
                assert!(fabs(fixed.re - exact) <= 1e-11 * (1.0 + exact), "{rho:?} {w} {k}: {} {exact}", fixed.re);
            }
        }
    }
}
