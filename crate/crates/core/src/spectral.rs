//! Spectral densities over the mass-squared parameter, their integral
//! constants, and the admissibility conditions S1-S5.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{self, exp, fabs, integrate_shells, lgamma, pow, tgamma, ShellIntegral};

/// One point mass `weight * delta(mu - mass)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub mass: f64,
}

/// Nonnegative spectral density rho(mu) on mu > 0.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// `alpha * mu^beta * exp(-mu / lambda)`.
    PowerLawExp { alpha: f64, beta: f64, lambda: f64 },
    /// `alpha * gamma / ((mu - mu0)^2 + gamma^2)`.
    BreitWigner { alpha: f64, gamma: f64, mu0: f64 },
    /// Finite sum of point masses, strictly ascending in mass.
    DiracComb(Vec<Atom>),
}

/// Tag of the family a quadrature or report was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    PowerLawExp,
    BreitWigner,
    DiracComb,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::PowerLawExp => "powerlaw",
            Family::BreitWigner => "breitwigner",
            Family::DiracComb => "diraccomb",
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl SpectralDensity {
    pub fn power_law_exp(alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        let rho = SpectralDensity::PowerLawExp { alpha, beta, lambda };
        rho.validate()?;
        Ok(rho)
    }

    pub fn breit_wigner(alpha: f64, gamma: f64, mu0: f64) -> Result<Self> {
        let rho = SpectralDensity::BreitWigner { alpha, gamma, mu0 };
        rho.validate()?;
        Ok(rho)
    }

    /// Atoms given as `(weight, mass)` pairs.
    pub fn dirac_comb(atoms: &[(f64, f64)]) -> Result<Self> {
        let rho = SpectralDensity::DiracComb(
            atoms.iter().map(|&(weight, mass)| Atom { weight, mass }).collect(),
        );
        rho.validate()?;
        Ok(rho)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SpectralDensity::PowerLawExp { alpha, beta, lambda } => {
                positive("alpha", alpha)?;
                positive("lambda", lambda)?;
                if !(beta.is_finite() && beta >= 0.0) {
                    return Err(invalid(format!("beta must be >= 0, got {beta}")));
                }
            }
            SpectralDensity::BreitWigner { alpha, gamma, mu0 } => {
                positive("alpha", alpha)?;
                positive("gamma", gamma)?;
                positive("mu0", mu0)?;
                if mu0 <= gamma {
                    return Err(invalid(format!("mu0 ({mu0}) must exceed gamma ({gamma})")));
                }
            }
            SpectralDensity::DiracComb(ref atoms) => {
                if atoms.is_empty() {
                    return Err(invalid("a Dirac comb needs at least one atom"));
                }
                for a in atoms {
                    positive("atom weight", a.weight)?;
                    positive("atom mass", a.mass)?;
                }
                if atoms.windows(2).any(|w| w[1].mass <= w[0].mass) {
                    return Err(invalid("atom masses must be strictly ascending"));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        match self {
            SpectralDensity::PowerLawExp { .. } => Family::PowerLawExp,
            SpectralDensity::BreitWigner { .. } => Family::BreitWigner,
            SpectralDensity::DiracComb(_) => Family::DiracComb,
        }
    }

    /// Caveats a caller should surface to users (e.g. the beta = 0 case,
    /// which is admitted only as the infrared counterexample).
    pub fn warnings(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if let SpectralDensity::PowerLawExp { beta, .. } = *self {
            if beta == 0.0 {
                out.push("beta = 0 violates S3 (infrared regularity); admitted as a counterexample only");
            }
        }
        out
    }

    /// Multiplies the density by `c >= 0`. `c = 0` yields the null density,
    /// which is useful as the free limit but is not itself admissible.
    pub fn scaled(&self, c: f64) -> Self {
        match *self {
            SpectralDensity::PowerLawExp { alpha, beta, lambda } => {
                SpectralDensity::PowerLawExp { alpha: alpha * c, beta, lambda }
            }
            SpectralDensity::BreitWigner { alpha, gamma, mu0 } => {
                SpectralDensity::BreitWigner { alpha: alpha * c, gamma, mu0 }
            }
            SpectralDensity::DiracComb(ref atoms) => SpectralDensity::DiracComb(
                atoms.iter().map(|a| Atom { weight: a.weight * c, mass: a.mass }).collect(),
            ),
        }
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match self {
            SpectralDensity::DiracComb(atoms) => Some(atoms),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        match *self {
            SpectralDensity::PowerLawExp { alpha, .. } | SpectralDensity::BreitWigner { alpha, .. } => {
                alpha == 0.0
            }
            SpectralDensity::DiracComb(ref atoms) => atoms.iter().all(|a| a.weight == 0.0),
        }
    }

    /// rho(0+) for continuous families.
    pub fn value_at_origin(&self) -> Option<f64> {
        match *self {
            SpectralDensity::PowerLawExp { alpha, beta, .. } => Some(if beta == 0.0 { alpha } else { 0.0 }),
            SpectralDensity::BreitWigner { alpha, gamma, mu0 } => Some(alpha * gamma / (mu0 * mu0 + gamma * gamma)),
            SpectralDensity::DiracComb(_) => None,
        }
    }

    /// Pointwise value; `mu` may be 0 for continuous families.
    pub(crate) fn value_unchecked(&self, mu: f64) -> f64 {
        match *self {
            SpectralDensity::PowerLawExp { alpha, beta, lambda } => {
                if beta == 0.0 {
                    alpha * exp(-mu / lambda)
                } else if mu == 0.0 {
                    0.0
                } else {
                    alpha * exp(beta * math::log(mu) - mu / lambda)
                }
            }
            SpectralDensity::BreitWigner { alpha, gamma, mu0 } => {
                let d = mu - mu0;
                alpha * gamma / (d * d + gamma * gamma)
            }
            SpectralDensity::DiracComb(_) => 0.0,
        }
    }

    /// d rho / d mu for continuous families.
    pub(crate) fn derivative_unchecked(&self, mu: f64) -> f64 {
        match *self {
            SpectralDensity::PowerLawExp { beta, lambda, .. } => {
                if mu == 0.0 && beta != 0.0 && beta != 1.0 {
                    return if beta < 1.0 { f64::INFINITY } else { 0.0 };
                }
                let rho = self.value_unchecked(mu);
                if beta == 0.0 {
                    -rho / lambda
                } else if beta == 1.0 {
                    let SpectralDensity::PowerLawExp { alpha, .. } = *self else { unreachable!() };
                    alpha * (1.0 - mu / lambda) * exp(-mu / lambda)
                } else {
                    rho * (beta / mu - 1.0 / lambda)
                }
            }
            SpectralDensity::BreitWigner { alpha, gamma, mu0 } => {
                let d = mu - mu0;
                let q = d * d + gamma * gamma;
                -2.0 * alpha * gamma * d / (q * q)
            }
            SpectralDensity::DiracComb(_) => 0.0,
        }
    }

    /// Location that separates the increasing and decreasing parts of a
    /// continuous density (its mode), used to split |rho'| integrals.
    pub(crate) fn mode(&self) -> f64 {
        match *self {
            SpectralDensity::PowerLawExp { beta, lambda, .. } => {
                if beta == 0.0 {
                    lambda
                } else {
                    beta * lambda
                }
            }
            SpectralDensity::BreitWigner { mu0, .. } => mu0,
            SpectralDensity::DiracComb(ref atoms) => atoms[0].mass,
        }
    }
}

/// Pointwise rho(mu) for continuous families.
pub fn eval_density(rho: &SpectralDensity, mu: f64) -> Result<f64> {
    if rho.atoms().is_some() {
        return Err(Error::NotPointwiseEvaluable);
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid(format!("mu must be positive and finite, got {mu}")));
    }
    Ok(rho.value_unchecked(mu))
}

/// The spectral constants; divergent integrals are `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants {
    /// Integral of rho.
    pub l1: f64,
    /// Integral of rho / mu.
    pub c_m1: f64,
    /// Integral of mu * rho.
    pub c_p1: f64,
    /// Integral of |rho'|; `None` for atomic densities.
    pub c_prime: Option<f64>,
    /// Integral of rho / sqrt(mu).
    pub c_mhalf: f64,
}

impl SpectralConstants {
    /// Moment `p` in {-1, 0, 1}.
    pub fn moment(&self, p: i32) -> Option<f64> {
        match p {
            -1 => Some(self.c_m1),
            0 => Some(self.l1),
            1 => Some(self.c_p1),
            _ => None,
        }
    }
}

pub const DEFAULT_TOL: f64 = 1e-10;

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= 1e-4 {
        Ok(())
    } else {
        Err(invalid(format!("tol must lie in (0, 1e-4], got {tol}")))
    }
}

/// Spectral constants: closed forms for the power law, finite sums for
/// atoms, and adaptive shell quadrature for the Breit-Wigner profile.
pub fn spectral_constants(rho: &SpectralDensity, tol: f64) -> Result<SpectralConstants> {
    check_tol(tol)?;
    rho.validate_scaled()?;
    match *rho {
        SpectralDensity::PowerLawExp { alpha, beta, lambda } => {
            let moment = |p: f64| {
                let s = beta + p + 1.0;
                if s <= 0.0 {
                    f64::INFINITY
                } else if alpha == 0.0 {
                    0.0
                } else {
                    alpha * exp(s * math::log(lambda) + lgamma(s))
                }
            };
            // rho is unimodal: it rises from rho(0) to its peak at beta*lambda
            // and then decays to zero, so each half of |rho'| integrates to a
            // difference of endpoint values.
            let peak = if beta == 0.0 { alpha } else { rho.value_unchecked(beta * lambda) };
            let rise = peak - rho.value_at_origin().unwrap_or(0.0);
            let c_prime = rise + peak;
            Ok(SpectralConstants {
                l1: moment(0.0),
                c_m1: moment(-1.0),
                c_p1: moment(1.0),
                c_prime: Some(c_prime),
                c_mhalf: moment(-0.5),
            })
        }
        SpectralDensity::BreitWigner { .. } => numeric_constants(rho, tol),
        SpectralDensity::DiracComb(ref atoms) => {
            let sum = |p: f64| atoms.iter().map(|a| a.weight * pow(a.mass, p)).sum::<f64>();
            Ok(SpectralConstants {
                l1: sum(0.0),
                c_m1: sum(-1.0),
                c_p1: sum(1.0),
                c_prime: None,
                c_mhalf: sum(-0.5),
            })
        }
    }
}

/// Spectral constants of a continuous family by adaptive quadrature alone,
/// with divergence detected from the behaviour of dyadic shell contributions.
///
/// Used directly for the Breit-Wigner family and as an independent check of
/// the power-law closed forms.
pub fn numeric_constants(rho: &SpectralDensity, tol: f64) -> Result<SpectralConstants> {
    check_tol(tol)?;
    if rho.atoms().is_some() {
        return Err(Error::NotPointwiseEvaluable);
    }
    if rho.is_null() {
        return Ok(SpectralConstants { l1: 0.0, c_m1: 0.0, c_p1: 0.0, c_prime: Some(0.0), c_mhalf: 0.0 });
    }
    let center = rho.mode();
    let moment = |p: f64| -> Result<f64> {
        Ok(integrate_shells(|mu| pow(mu, p) * rho.value_unchecked(mu), center, tol)?.value_or_inf())
    };
    let c_prime = integrate_shells(|mu| fabs(rho.derivative_unchecked(mu)), center, tol)?;
    Ok(SpectralConstants {
        l1: moment(0.0)?,
        c_m1: moment(-1.0)?,
        c_p1: moment(1.0)?,
        c_prime: Some(match c_prime {
            ShellIntegral::Finite(v) => v,
            ShellIntegral::Divergent => f64::INFINITY,
        }),
        c_mhalf: moment(-0.5)?,
    })
}

impl SpectralDensity {
    /// Validation that also admits the null density produced by `scaled(0)`.
    fn validate_scaled(&self) -> Result<()> {
        if self.is_null() {
            return Ok(());
        }
        self.validate()
    }
}

/// Which decay mechanism is available for a density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayPath {
    /// S1-S5 hold: spectral averaging in the mass variable.
    SpectralAveraging,
    /// Atomic spectrum with S1-S4: finite coupled wave/Klein-Gordon system.
    DiscreteSpectrum,
    /// Neither applies.
    Unsupported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub s1: bool,
    pub s2: bool,
    pub s3: bool,
    pub s4: bool,
    pub s5: bool,
    /// One message per failed condition.
    pub messages: Vec<String>,
    pub path: DecayPath,
}

impl ConditionReport {
    pub fn all(&self) -> bool {
        self.s1 && self.s2 && self.s3 && self.s4 && self.s5
    }
}

pub fn check_conditions(rho: &SpectralDensity, consts: &SpectralConstants) -> ConditionReport {
    let s1 = true;
    let s2 = consts.l1.is_finite();
    let s3 = consts.c_m1.is_finite();
    let s4 = consts.c_p1.is_finite();
    let s5 = rho.atoms().is_none() && consts.c_prime.is_some_and(f64::is_finite);
    let mut messages = Vec::new();
    if !s2 {
        messages.push(String::from("S2 fails: the total spectral weight diverges"));
    }
    if !s3 {
        messages.push(String::from("S3 fails: integral of rho/mu diverges (weight accumulates near mu = 0)"));
    }
    if !s4 {
        messages.push(String::from("S4 fails: integral of mu*rho diverges (ultraviolet tail too heavy)"));
    }
    if !s5 {
        if rho.atoms().is_some() {
            messages.push(String::from("S5 fails: atomic spectrum is not absolutely continuous"));
        } else {
            messages.push(String::from("S5 fails: integral of |rho'| diverges"));
        }
    }
    let path = if s2 && s3 && s4 && s5 {
        DecayPath::SpectralAveraging
    } else if s2 && s3 && s4 && rho.atoms().is_some() {
        DecayPath::DiscreteSpectrum
    } else {
        DecayPath::Unsupported
    };
    ConditionReport { s1, s2, s3, s4, s5, messages, path }
}

/// Gamma function, exposed for oracles in downstream crates.
pub fn gamma(x: f64) -> f64 {
    tgamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        fabs(a - b) / fabs(b)
    }

    #[test]
    fn power_law_closed_forms() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        let c = spectral_constants(&rho, DEFAULT_TOL).unwrap();
        assert!(rel(c.l1, 1.0) < 1e-14);
        assert!(rel(c.c_m1, 1.0) < 1e-14);
        assert!(rel(c.c_p1, 2.0) < 1e-14);
        assert!(rel(c.c_prime.unwrap(), 2.0 / core::f64::consts::E) < 1e-14);
        assert!(rel(c.c_mhalf, tgamma(1.5)) < 1e-14);
    }

    #[test]
    fn exponential_counterexample_has_infinite_infrared_constant() {
        let rho = SpectralDensity::power_law_exp(1.0, 0.0, 1.0).unwrap();
        assert_eq!(rho.warnings().len(), 1);
        let c = spectral_constants(&rho, DEFAULT_TOL).unwrap();
        assert_eq!(c.c_m1, f64::INFINITY);
        let r = check_conditions(&rho, &c);
        assert!(r.s1 && r.s2 && !r.s3 && r.s4 && r.s5);
        assert_eq!(r.messages.len(), 1);
    }

    #[test]
    fn dirac_comb_sums() {
        let rho = SpectralDensity::dirac_comb(&[(0.5, 1.0), (0.25, 4.0)]).unwrap();
        let c = spectral_constants(&rho, DEFAULT_TOL).unwrap();
        assert_eq!(c.l1, 0.75);
        assert_eq!(c.c_m1, 0.5625);
        assert_eq!(c.c_p1, 1.5);
        assert_eq!(c.c_prime, None);
        let r = check_conditions(&SpectralDensity::dirac_comb(&[(1.0, 1.0)]).unwrap(), &c);
        assert!(r.s1 && r.s2 && r.s3 && r.s4 && !r.s5);
        assert_eq!(r.path, DecayPath::DiscreteSpectrum);
    }

    #[test]
    fn density_evaluation() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        assert!(fabs(eval_density(&rho, 1.0).unwrap() - exp(-1.0)) < 1e-16);
        assert!(eval_density(&rho, 1e-300).unwrap() < 1e-299);
        let bw = SpectralDensity::breit_wigner(1.0, 0.1, 1.0).unwrap();
        assert!(fabs(eval_density(&bw, 1.0).unwrap() - 10.0) < 1e-12);
        let comb = SpectralDensity::dirac_comb(&[(1.0, 1.0)]).unwrap();
        assert_eq!(eval_density(&comb, 1.0), Err(Error::NotPointwiseEvaluable));
        assert!(eval_density(&rho, 0.0).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(SpectralDensity::power_law_exp(0.0, 1.0, 1.0).is_err());
        assert!(SpectralDensity::power_law_exp(1.0, -0.5, 1.0).is_err());
        assert!(SpectralDensity::breit_wigner(1.0, 1.0, 0.5).is_err());
        assert!(SpectralDensity::dirac_comb(&[]).is_err());
        assert!(SpectralDensity::dirac_comb(&[(1.0, 2.0), (1.0, 2.0)]).is_err());
        assert!(SpectralDensity::dirac_comb(&[(1.0, 2.0), (1.0, 1.0)]).is_err());
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        assert!(spectral_constants(&rho, 1e-3).is_err());
    }

    #[test]
    fn numeric_route_matches_power_law_closed_forms() {
        for &(beta, lambda) in &[(1.0, 1.0), (0.5, 2.0), (2.5, 0.7)] {
            let rho = SpectralDensity::power_law_exp(1.3, beta, lambda).unwrap();
            let exact = spectral_constants(&rho, DEFAULT_TOL).unwrap();
            let num = numeric_constants(&rho, DEFAULT_TOL).unwrap();
            assert!(rel(num.l1, exact.l1) < 10.0 * DEFAULT_TOL, "{beta} {lambda}");
            assert!(rel(num.c_m1, exact.c_m1) < 10.0 * DEFAULT_TOL, "{beta} {lambda}");
            assert!(rel(num.c_p1, exact.c_p1) < 10.0 * DEFAULT_TOL, "{beta} {lambda}");
            assert!(rel(num.c_mhalf, exact.c_mhalf) < 10.0 * DEFAULT_TOL, "{beta} {lambda}");
            assert!(rel(num.c_prime.unwrap(), exact.c_prime.unwrap()) < 10.0 * DEFAULT_TOL);
        }
    }

    #[test]
    fn breit_wigner_constants() {
        let (alpha, gamma, mu0) = (1.0, 0.1, 1.0);
        let rho = SpectralDensity::breit_wigner(alpha, gamma, mu0).unwrap();
        let c = spectral_constants(&rho, DEFAULT_TOL).unwrap();
        let l1 = alpha * (core::f64::consts::FRAC_PI_2 + math::atan(mu0 / gamma));
        assert!(rel(c.l1, l1) < 1e-9, "{} {}", c.l1, l1);
        // the profile is positive at the origin and has a Lorentzian tail
        assert_eq!(c.c_m1, f64::INFINITY);
        assert_eq!(c.c_p1, f64::INFINITY);
        let rho0 = rho.value_at_origin().unwrap();
        assert!(rel(c.c_prime.unwrap(), 2.0 * alpha / gamma - rho0) < 1e-9);
        assert!(c.c_mhalf.is_finite() && c.c_mhalf > 0.0);
        let r = check_conditions(&rho, &c);
        assert!(r.s1 && r.s2 && !r.s3 && !r.s4 && r.s5);
    }
}
