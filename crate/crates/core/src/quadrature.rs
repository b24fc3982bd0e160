//! Finite mass quadratures `{(mu_j, w_j)}` for a spectral measure.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{self, atan, exp, fabs, gauss_legendre, lgamma, log, pow, tan, PI};
use crate::spectral::{spectral_constants, Family, SpectralConstants, SpectralDensity};

pub const DEFAULT_NODES: usize = 32;
pub const MAX_NODES: usize = 512;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Relative errors of the discrete moments `sum w_j mu_j^p` for
/// `p = -1, 0, 1`. Each entry is an error when the exact moment diverges.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub minus_one: Result<f64>,
    pub zero: Result<f64>,
    pub one: Result<f64>,
    /// Set when a polynomial moment (p = 0 or 1) misses the requested tolerance.
    pub flagged: bool,
}

impl MomentReport {
    pub fn get(&self, p: i32) -> Option<&Result<f64>> {
        match p {
            -1 => Some(&self.minus_one),
            0 => Some(&self.zero),
            1 => Some(&self.one),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub source_family: Family,
    pub moment_report: MomentReport,
    /// Nodes dropped because their weight underflowed to zero.
    pub pruned: usize,
}

impl MassQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_node(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }

    /// Discrete moment `sum_j w_j mu_j^p`.
    pub fn moment(&self, p: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&m, &w)| w * pow(m, p)).sum()
    }

    /// Quadrature with no nodes, representing the null density.
    pub fn empty(source_family: Family) -> Self {
        MassQuadrature {
            nodes: Vec::new(),
            weights: Vec::new(),
            source_family,
            moment_report: MomentReport { minus_one: Ok(0.0), zero: Ok(0.0), one: Ok(0.0), flagged: false },
            pruned: 0,
        }
    }

    /// Quadrature from explicit nodes and weights (ascending positive nodes,
    /// positive weights). The moment report is left empty.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, source_family: Family) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(invalid("nodes and weights differ in length"));
        }
        if nodes.iter().any(|&m| !(m > 0.0 && m.is_finite())) || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(invalid("nodes and weights must be positive and finite"));
        }
        if nodes.windows(2).any(|p| p[1] <= p[0]) {
            return Err(invalid("nodes must be strictly ascending"));
        }
        let mut q = MassQuadrature::empty(source_family);
        q.nodes = nodes;
        q.weights = weights;
        Ok(q)
    }
}

/// Builds a quadrature for `rho dmu`: generalized Gauss-Laguerre for the
/// power law, tangent-mapped Gauss-Legendre panels for Breit-Wigner, and the
/// atoms themselves for a Dirac comb.
pub fn build_quadrature(rho: &SpectralDensity, n_nodes: usize, tol: f64) -> Result<MassQuadrature> {
    if !(1..=MAX_NODES).contains(&n_nodes) {
        return Err(invalid(format!("n_nodes must lie in [1, {MAX_NODES}], got {n_nodes}")));
    }
    let consts = spectral_constants(rho, tol)?;
    if rho.is_null() {
        return Ok(MassQuadrature::empty(rho.family()));
    }
    let mut quad = match *rho {
        SpectralDensity::PowerLawExp { alpha, beta, lambda } => {
            let (x, lw, pruned) = gauss_laguerre_log(n_nodes, beta)?;
            let shift = log(alpha) + (beta + 1.0) * log(lambda);
            let weights: Vec<f64> = lw.iter().map(|&l| exp(l + shift)).collect();
            let keep: Vec<usize> = (0..x.len()).filter(|&i| weights[i] >= f64::MIN_POSITIVE).collect();
            let mut q = MassQuadrature::from_parts(
                keep.iter().map(|&i| lambda * x[i]).collect(),
                keep.iter().map(|&i| weights[i]).collect(),
                Family::PowerLawExp,
            )
            .map_err(|e| Error::QuadratureConstructionFailed(format!("{e}")))?;
            q.pruned = pruned + x.len() - keep.len();
            q
        }
        SpectralDensity::BreitWigner { alpha, gamma, mu0 } => breit_wigner_rule(alpha, gamma, mu0, n_nodes, tol)?,
        SpectralDensity::DiracComb(ref atoms) => MassQuadrature::from_parts(
            atoms.iter().map(|a| a.mass).collect(),
            atoms.iter().map(|a| a.weight).collect(),
            Family::DiracComb,
        )?,
    };
    quad.moment_report = validate_moments(&quad, &consts, tol);
    Ok(quad)
}

/// Relative moment errors against the exact constants.
pub fn validate_moments(quad: &MassQuadrature, consts: &SpectralConstants, tol: f64) -> MomentReport {
    let entry = |p: i32| -> Result<f64> {
        let exact = consts.moment(p).unwrap_or(f64::INFINITY);
        if !exact.is_finite() {
            return Err(Error::MomentUndefined { p });
        }
        let approx = quad.moment(p as f64);
        if exact == 0.0 {
            return Ok(fabs(approx));
        }
        Ok(fabs(approx - exact) / exact)
    };
    let minus_one = entry(-1);
    let zero = entry(0);
    let one = entry(1);
    let limit = if tol > 1e-12 { tol } else { 1e-12 };
    let flagged = [&zero, &one].iter().any(|e| matches!(e, Ok(v) if *v > limit));
    MomentReport { minus_one, zero, one, flagged }
}

/// Laguerre polynomials `L_{n-1}`, `L_n` (same arbitrary scale) and
/// `L_{n+1}` at `x`, together with the natural log of the factor that was
/// divided out of `L_{n+1}`.
fn laguerre_scaled(n: usize, beta: f64, x: f64) -> (f64, f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    let (mut lm1, mut ln) = (0.0, 1.0);
    for k in 0..=n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + beta - x) * cur - (kf + beta) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if k + 1 == n {
            (lm1, ln) = (prev, cur);
        }
        if fabs(cur) > 1e150 {
            prev *= 1e-150;
            cur *= 1e-150;
            log_scale += 150.0 * core::f64::consts::LN_10;
        }
    }
    (lm1, ln, cur, log_scale)
}

/// Nodes and log-weights of the `n`-point Gauss rule for `x^beta e^{-x}`.
/// Returns the count of nodes discarded for non-finite weights as well.
fn gauss_laguerre_log(n: usize, beta: f64) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + beta + 1.0).collect();
    let off: Vec<f64> = (0..n.saturating_sub(1))
        .map(|k| {
            let k1 = (k + 1) as f64;
            math::sqrt(k1 * (k1 + beta))
        })
        .collect();
    let mut nodes = crate::math::symmetric_tridiagonal_eigenvalues(&diag, &off)
        .map_err(|e| Error::QuadratureConstructionFailed(format!("{e}")))?;
    let nf = n as f64;
    for x in nodes.iter_mut() {
        for _ in 0..4 {
            let (lm1, ln, _, _) = laguerre_scaled(n, beta, *x);
            let deriv = nf * ln - (nf + beta) * lm1;
            if deriv == 0.0 {
                break;
            }
            let step = *x * ln / deriv;
            *x -= step;
            if fabs(step) <= 1e-16 * *x {
                break;
            }
        }
    }
    if nodes.iter().any(|&x| !(x > 0.0)) || nodes.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::QuadratureConstructionFailed(
            "Laguerre nodes are not positive and distinct".into(),
        ));
    }
    let base = lgamma(nf + beta + 1.0) - lgamma(nf + 1.0) - 2.0 * log(nf + 1.0);
    let mut xs = Vec::with_capacity(n);
    let mut lws = Vec::with_capacity(n);
    let mut dropped = 0;
    for &x in &nodes {
        let (_, _, lnp1, scale) = laguerre_scaled(n, beta, x);
        let lw = base + log(x) - 2.0 * (log(fabs(lnp1)) + scale);
        if lw.is_finite() {
            xs.push(x);
            lws.push(lw);
        } else {
            dropped += 1;
        }
    }
    Ok((xs, lws, dropped))
}

/// Gauss-Legendre panels in the angle `theta`, where
/// `mu = mu0 + gamma tan(theta)` turns `rho dmu` into `alpha dtheta`.
/// Uniform angle panels concentrate nodes around the resonance.
fn breit_wigner_rule(alpha: f64, gamma: f64, mu0: f64, n: usize, tol: f64) -> Result<MassQuadrature> {
    let theta_zero = -atan(mu0 / gamma);
    let full = PI / 2.0 - theta_zero;
    // excluded angle on each side is half of tol times the total
    let cut = 0.5 * tol * full;
    let lo = theta_zero + cut;
    let hi = PI / 2.0 - cut;
    let panels = n.div_ceil(16);
    let width = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for p in 0..panels {
        let m = n / panels + usize::from(p < n % panels);
        let (x, w) = gauss_legendre(m);
        let a = lo + p as f64 * width;
        for (xi, wi) in x.iter().zip(&w) {
            let theta = a + 0.5 * width * (xi + 1.0);
            nodes.push(mu0 + gamma * tan(theta));
            weights.push(alpha * 0.5 * width * wi);
        }
    }
    MassQuadrature::from_parts(nodes, weights, Family::BreitWigner)
        .map_err(|e| Error::QuadratureConstructionFailed(format!("{e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_comb_passes_through() {
        let rho = SpectralDensity::dirac_comb(&[(0.5, 1.0), (0.25, 4.0)]).unwrap();
        let q = build_quadrature(&rho, 7, DEFAULT_QUAD_TOL).unwrap();
        assert_eq!(q.nodes, [1.0, 4.0]);
        assert_eq!(q.weights, [0.5, 0.25]);
        assert_eq!(q.moment_report.minus_one, Ok(0.0));
        assert_eq!(q.moment_report.zero, Ok(0.0));
        assert_eq!(q.moment_report.one, Ok(0.0));
    }

    #[test]
    fn laguerre_weights_sum_to_gamma() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        let q = build_quadrature(&rho, 32, DEFAULT_QUAD_TOL).unwrap();
        assert_eq!(q.len(), 32);
        assert!(fabs(q.moment(0.0) - 1.0) < 1e-12);
        assert!(!q.moment_report.flagged);
    }

    #[test]
    fn infrared_moment_error_has_closed_form() {
        // The n-point rule for x^beta e^{-x} misses the 1/x moment by the
        // relative amount Gamma(beta+1) n! / Gamma(n+beta+1).
        for &beta in &[0.5, 1.0, 2.0, 3.0] {
            for &n in &[8usize, 32] {
                let rho = SpectralDensity::power_law_exp(1.0, beta, 1.0).unwrap();
                let q = build_quadrature(&rho, n, DEFAULT_QUAD_TOL).unwrap();
                let nf = n as f64;
                let expected = exp(lgamma(beta + 1.0) + lgamma(nf + 1.0) - lgamma(nf + beta + 1.0));
                let got = *q.moment_report.minus_one.as_ref().unwrap();
                assert!(fabs(got - expected) < 1e-11 * (1.0 + expected), "{beta} {n}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn two_point_rule_matches_closed_form() {
        // n = 2, beta = 0: nodes 2 -+ sqrt(2), weights (2 +- sqrt(2)) / 4
        let rho = SpectralDensity::power_law_exp(1.0, 0.0, 1.0).unwrap();
        let q = build_quadrature(&rho, 2, DEFAULT_QUAD_TOL).unwrap();
        let s = math::sqrt(2.0);
        assert!(fabs(q.nodes[0] - (2.0 - s)) < 1e-15);
        assert!(fabs(q.nodes[1] - (2.0 + s)) < 1e-14);
        assert!(fabs(q.weights[0] - (2.0 + s) / 4.0) < 1e-15);
        assert!(fabs(q.weights[1] - (2.0 - s) / 4.0) < 1e-15);
        assert_eq!(q.moment_report.minus_one, Err(Error::MomentUndefined { p: -1 }));
    }

    #[test]
    fn large_rules_prune_underflowing_weights() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        let q = build_quadrature(&rho, MAX_NODES, DEFAULT_QUAD_TOL).unwrap();
        assert!(q.pruned > 0);
        assert_eq!(q.len() + q.pruned, MAX_NODES);
        assert!(q.weights.iter().all(|&w| w > 0.0));
        assert!(fabs(q.moment(0.0) - 1.0) < 1e-12);
    }

    #[test]
    fn breit_wigner_rule_keeps_requested_mass() {
        let rho = SpectralDensity::breit_wigner(1.0, 0.1, 1.0).unwrap();
        let q = build_quadrature(&rho, 64, 1e-8).unwrap();
        assert_eq!(q.len(), 64);
        let l1 = math::PI / 2.0 + atan(10.0);
        assert!(fabs(q.moment(0.0) - l1) / l1 <= 1.0e-8 * (1.0 + 1e-6));
        assert_eq!(q.moment_report.one, Err(Error::MomentUndefined { p: 1 }));
        assert!(!q.moment_report.flagged);
    }

    #[test]
    fn node_count_is_validated() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        assert!(build_quadrature(&rho, 0, DEFAULT_QUAD_TOL).is_err());
        assert!(build_quadrature(&rho, 513, DEFAULT_QUAD_TOL).is_err());
    }

    #[test]
    fn null_density_gives_empty_rule() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap().scaled(0.0);
        let q = build_quadrature(&rho, 32, DEFAULT_QUAD_TOL).unwrap();
        assert!(q.is_empty());
    }
}
