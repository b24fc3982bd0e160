//! Order-of-magnitude observational signatures of the memory kernel.

use crate::error::{invalid, Error, Result};
use crate::math::pow;

/// Metres per megaparsec.
pub const MPC_M: f64 = 3.08568e22;
/// Speed of light, m/s.
pub const C_SI: f64 = 2.99792e8;
/// Newton's constant, m^3 kg^-1 s^-2.
pub const G_SI: f64 = 6.67430e-11;
pub const CM_PER_M: f64 = 100.0;

/// How a distance in megaparsecs and a frequency in hertz enter the
/// phase-shift formula `d l1 / (2 omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    /// `G = c = 1`: `d` and `omega` are used as given, in units of the mass.
    Natural,
    /// `d` in metres, `omega` in rad/s, times `c^3 / G`.
    Si,
    /// `d` in centimetres, `omega` in hertz, no further factors. This is the
    /// convention under which 400 Mpc at 100 Hz gives `6.17e24 l1`.
    CentimetreHertz,
}

impl Units {
    pub fn name(self) -> &'static str {
        match self {
            Units::Natural => "natural",
            Units::Si => "si",
            Units::CentimetreHertz => "cgs",
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(alloc::format!("{name} must be positive, got {v}")))
    }
}

/// Accumulated phase shift `d l1 / (2 omega)` in natural units.
pub fn phase_shift(d: f64, omega: f64, l1: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    positive("distance", d)?;
    positive("omega", omega)?;
    positive("l1", l1)?;
    Ok(d * l1 / (2.0 * omega))
}

/// Phase shift for a distance in megaparsecs and a frequency in hertz.
pub fn phase_shift_in(units: Units, d_mpc: f64, omega_hz: f64, l1: f64) -> Result<f64> {
    match units {
        Units::Natural => phase_shift(d_mpc, omega_hz, l1),
        Units::Si => Ok(phase_shift(d_mpc * MPC_M, omega_hz, l1)? * (C_SI * C_SI * C_SI / G_SI)),
        Units::CentimetreHertz => phase_shift(d_mpc * MPC_M * CM_PER_M, omega_hz, l1),
    }
}

/// Largest `l1` (that is, `alpha M*^2`) compatible with a phase accuracy
/// `max_phase`; inverts [`phase_shift_in`], which is linear in `l1`.
pub fn phase_bound(units: Units, max_phase: f64, d_mpc: f64, omega_hz: f64) -> Result<f64> {
    positive("phase accuracy", max_phase)?;
    Ok(max_phase / phase_shift_in(units, d_mpc, omega_hz, 1.0)?)
}

/// Ratio of memory excess to the standard memory, `alpha M*^2`.
pub fn memory_excess_ratio(alpha: f64, m_star: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    positive("M*", m_star)?;
    Ok(alpha * m_star * m_star)
}

/// Bound on the inverse-mass moment implied by a memory-ratio sensitivity
/// `eta`: `c_m1 <= eta / M*^2`.
pub fn pulsar_bound(eta: f64, m_star: f64) -> Result<f64> {
    positive("eta", eta)?;
    positive("M*", m_star)?;
    Ok(eta / (m_star * m_star))
}

/// Time after which a `1/t` tail dominates a `t^-7` one: `l1^(-1/6)`.
pub fn tail_crossing(l1: f64) -> Result<f64> {
    positive("l1", l1)?;
    Ok(pow(l1, -1.0 / 6.0))
}

/// Tail strain `l1 eps^2 / (r t)` at time `t` after merger.
pub fn tail_amplitude(l1: f64, epsilon: f64, r: f64, t: f64) -> Result<f64> {
    positive("l1", l1)?;
    positive("r", r)?;
    positive("t", t)?;
    if !epsilon.is_finite() {
        return Err(invalid("epsilon must be finite"));
    }
    Ok(l1 * epsilon * epsilon / (r * t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureInput {
    pub d_mpc: f64,
    pub omega_hz: f64,
    pub alpha: f64,
    pub m_star: f64,
    /// `None` takes `l1 = alpha M*^2`.
    pub l1: Option<f64>,
    pub units: Units,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureReport {
    pub l1: f64,
    pub memory_excess_ratio: f64,
    pub pulsar_bound: f64,
    pub phase_shift_natural: f64,
    pub phase_shift_si: f64,
    pub phase_shift_cgs: f64,
    /// Phase shift in the requested units.
    pub phase_shift: f64,
    /// `l1` bound from a 0.1 rad phase accuracy in the requested units.
    pub phase_bound: f64,
    pub tail_crossing: f64,
    /// Tail strain at `t = tail_crossing`, unit amplitude and distance.
    pub tail_amplitude_at_crossing: f64,
}

pub const PHASE_ACCURACY: f64 = 0.1;
pub const PULSAR_ETA: f64 = 0.1;

pub fn signature_report(input: &SignatureInput) -> Result<SignatureReport> {
    let ratio = memory_excess_ratio(input.alpha, input.m_star)?;
    let l1 = input.l1.unwrap_or(ratio);
    let crossing = tail_crossing(l1)?;
    let (d, w) = (input.d_mpc, input.omega_hz);
    Ok(SignatureReport {
        l1,
        memory_excess_ratio: ratio,
        pulsar_bound: pulsar_bound(PULSAR_ETA, input.m_star)?,
        phase_shift_natural: phase_shift_in(Units::Natural, d, w, l1)?,
        phase_shift_si: phase_shift_in(Units::Si, d, w, l1)?,
        phase_shift_cgs: phase_shift_in(Units::CentimetreHertz, d, w, l1)?,
        phase_shift: phase_shift_in(input.units, d, w, l1)?,
        phase_bound: phase_bound(input.units, PHASE_ACCURACY, d, w)?,
        tail_crossing: crossing,
        tail_amplitude_at_crossing: tail_amplitude(l1, 1.0, 1.0, crossing)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        assert_eq!(memory_excess_ratio(1.0, 1.0).unwrap(), 1.0);
        assert!((memory_excess_ratio(0.1, 2.0).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(tail_crossing(1.0).unwrap(), 1.0);
        assert!((tail_crossing(1e-12).unwrap() - 100.0).abs() < 1e-10);
        assert!((pulsar_bound(0.1, 2.0).unwrap() - 0.025).abs() < 1e-16);
    }

    #[test]
    fn tail_crossing_at_small_l1() {
        let t = tail_crossing(1e-10).unwrap();
        assert!((t - 46.4).abs() <= 0.1, "{t}");
    }

    #[test]
    fn frequency_and_distance_scaling() {
        let a = phase_shift(3.0, 5.0, 0.7).unwrap();
        assert_eq!(phase_shift(3.0, 10.0, 0.7).unwrap(), a / 2.0);
        assert_eq!(phase_shift(6.0, 5.0, 0.7).unwrap(), 2.0 * a);
        assert_eq!(phase_shift(1.0, 0.0, 1.0), Err(Error::ZeroFrequency));
    }

    #[test]
    fn pinned_convention_and_bound() {
        let shift = phase_shift_in(Units::CentimetreHertz, 400.0, 100.0, 1.0).unwrap();
        assert!((shift / 6e24 - 1.0).abs() < 0.05, "{shift:e}");
        let bound = phase_bound(Units::CentimetreHertz, 0.1, 400.0, 100.0).unwrap();
        assert!((bound / 1.6e-26 - 1.0).abs() < 0.05, "{bound:e}");
        let back = phase_shift_in(Units::CentimetreHertz, 400.0, 100.0, bound).unwrap();
        assert!((back - 0.1).abs() <= 1e-12 * 0.1);
    }

    #[test]
    fn report_is_consistent() {
        let r = signature_report(&SignatureInput {
            d_mpc: 400.0,
            omega_hz: 100.0,
            alpha: 1.0,
            m_star: 1e-5,
            l1: None,
            units: Units::Si,
        })
        .unwrap();
        assert!((r.l1 / 1e-10 - 1.0).abs() < 1e-15);
        assert_eq!(r.phase_shift, r.phase_shift_si);
        assert!((r.tail_crossing - 46.4).abs() < 0.1);
    }
}
