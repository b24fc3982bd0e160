//! Retarded Klein-Gordon resolvents and the memory operator on a single
//! Fourier mode, where every operator reduces to forced oscillators in time.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{fabs, sqrt};
use crate::quadrature::MassQuadrature;

/// Largest admissible `dt * omega` for the mode integrator.
pub const MAX_OMEGA_DT: f64 = 2.5;

/// Uniformly sampled real signal starting at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(invalid(format!("time grid needs finite t0 and dt > 0 (dt = {dt})")));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid("time series contains non-finite samples"));
        }
        Ok(TimeSeries { t0, dt, samples })
    }

    /// Samples `f(t0 + i dt)` for `i = 0..n`.
    pub fn sample(t0: f64, dt: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::new(t0, dt, (0..n).map(|i| f(t0 + i as f64 * dt)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    fn with_samples(&self, samples: Vec<f64>) -> Self {
        TimeSeries { t0: self.t0, dt: self.dt, samples }
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(fabs(*v)))
    }

    /// Trapezoid rule for the integral of |f|.
    pub fn l1_norm(&self) -> f64 {
        trapezoid(self.dt, self.samples.iter().map(|v| fabs(*v)))
    }
}

fn trapezoid(dt: f64, values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values
        .enumerate()
        .map(|(i, v)| if i == 0 || i + 1 == n { 0.5 * v } else { v })
        .sum::<f64>()
        * dt
}

/// Mass-squared parameter and spatial wavenumber of one resolvent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub mu: f64,
    pub xi: f64,
}

impl ModeParams {
    pub fn new(mu: f64, xi: f64) -> Result<Self> {
        if !(mu >= 0.0 && xi >= 0.0 && mu.is_finite() && xi.is_finite()) {
            return Err(invalid(format!("mode parameters must be nonnegative (mu = {mu}, xi = {xi})")));
        }
        if mu + xi * xi == 0.0 {
            return Err(Error::ZeroFrequency);
        }
        Ok(ModeParams { mu, xi })
    }

    pub fn omega2(&self) -> f64 {
        self.xi * self.xi + self.mu
    }
}

/// Source value half a step after sample `n`, from a cubic through samples
/// `n-2..=n+1` (lower order near the start of the record).
#[inline]
pub(crate) fn midpoint_source(f: &[f64], n: usize) -> f64 {
    match n {
        0 => 0.5 * (f[0] + f[1]),
        1 => -0.125 * f[0] + 0.75 * f[1] + 0.375 * f[2],
        _ => 0.0625 * f[n - 2] - 0.3125 * f[n - 1] + 0.9375 * f[n] + 0.3125 * f[n + 1],
    }
}

/// Solves `v'' + omega2 v = f`, `v(0) = v'(0) = 0` with classical RK4 on the
/// sample grid; returns position and velocity.
fn forced_oscillator(omega2: f64, dt: f64, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let (mut x, mut y) = (0.0f64, 0.0f64);
    for i in 0..n.saturating_sub(1) {
        let fm = midpoint_source(f, i);
        let (f0, f1) = (f[i], f[i + 1]);
        let k1x = y;
        let k1y = f0 - omega2 * x;
        let k2x = y + 0.5 * dt * k1y;
        let k2y = fm - omega2 * (x + 0.5 * dt * k1x);
        let k3x = y + 0.5 * dt * k2y;
        let k3y = fm - omega2 * (x + 0.5 * dt * k2x);
        let k4x = y + dt * k3y;
        let k4y = f1 - omega2 * (x + dt * k3x);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v[i + 1] = x;
        w[i + 1] = y;
    }
    (v, w)
}

fn check_step(omega2: f64, dt: f64, node: usize) -> Result<()> {
    let omega_dt = dt * sqrt(omega2);
    if omega_dt > MAX_OMEGA_DT {
        return Err(Error::ModeStepUnstable { node, omega_dt });
    }
    Ok(())
}

/// Retarded solution of `v'' + (xi^2 + mu) v = f` with zero initial state.
pub fn kg_retarded(params: ModeParams, f: &TimeSeries) -> Result<TimeSeries> {
    Ok(kg_retarded_with_velocity(params, f)?.0)
}

/// As [`kg_retarded`], also returning `v'`.
pub fn kg_retarded_with_velocity(params: ModeParams, f: &TimeSeries) -> Result<(TimeSeries, TimeSeries)> {
    check_step(params.omega2(), f.dt, 0)?;
    let (v, w) = forced_oscillator(params.omega2(), f.dt, &f.samples);
    Ok((f.with_samples(v), f.with_samples(w)))
}

fn check_quadrature(quad: &MassQuadrature, xi: f64, dt: f64) -> Result<()> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(invalid(format!("xi must be nonnegative, got {xi}")));
    }
    for (j, &mu) in quad.nodes.iter().enumerate() {
        check_step(xi * xi + mu, dt, j)?;
    }
    Ok(())
}

/// Memory operator on one mode: `sum_j w_j R_{mu_j} f`, summed in node order.
pub fn apply_memory(quad: &MassQuadrature, xi: f64, f: &TimeSeries) -> Result<TimeSeries> {
    Ok(apply_memory_with_velocity(quad, xi, f)?.0)
}

/// Memory operator and its time derivative.
pub fn apply_memory_with_velocity(quad: &MassQuadrature, xi: f64, f: &TimeSeries) -> Result<(TimeSeries, TimeSeries)> {
    check_quadrature(quad, xi, f.dt)?;
    let mut out = vec![0.0; f.len()];
    let mut out_dot = vec![0.0; f.len()];
    for (&mu, &w) in quad.nodes.iter().zip(&quad.weights) {
        let (v, vd) = forced_oscillator(xi * xi + mu, f.dt, &f.samples);
        for i in 0..out.len() {
            out[i] += w * v[i];
            out_dot[i] += w * vd[i];
        }
    }
    Ok((f.with_samples(out), f.with_samples(out_dot)))
}

/// Double-resolvent memory `sum_j w_j mu_j R_{mu_j}(R_{mu_j} f)`.
pub fn apply_memory2(quad: &MassQuadrature, xi: f64, f: &TimeSeries) -> Result<TimeSeries> {
    check_quadrature(quad, xi, f.dt)?;
    let mut out = vec![0.0; f.len()];
    for (&mu, &w) in quad.nodes.iter().zip(&quad.weights) {
        let omega2 = xi * xi + mu;
        let (once, _) = forced_oscillator(omega2, f.dt, &f.samples);
        let (twice, _) = forced_oscillator(omega2, f.dt, &once);
        for (o, t) in out.iter_mut().zip(&twice) {
            *o += w * mu * t;
        }
    }
    Ok(f.with_samples(out))
}

/// Fourth-order first derivative on a uniform grid (one-sided at the ends).
pub fn derivative4(g: &[f64], dt: f64) -> Vec<f64> {
    let n = g.len();
    let mut d = vec![0.0; n];
    if n < 5 {
        return d;
    }
    let h12 = 12.0 * dt;
    for i in 2..n - 2 {
        d[i] = (g[i - 2] - 8.0 * g[i - 1] + 8.0 * g[i + 1] - g[i + 2]) / h12;
    }
    let fwd = |i: usize| (-25.0 * g[i] + 48.0 * g[i + 1] - 36.0 * g[i + 2] + 16.0 * g[i + 3] - 3.0 * g[i + 4]) / h12;
    let bwd = |i: usize| (25.0 * g[i] - 48.0 * g[i - 1] + 36.0 * g[i - 2] - 16.0 * g[i - 3] + 3.0 * g[i - 4]) / h12;
    d[0] = fwd(0);
    d[n - 1] = bwd(n - 1);
    d[1] = (-3.0 * g[0] - 10.0 * g[1] + 18.0 * g[2] - 6.0 * g[3] + g[4]) / h12;
    d[n - 2] = (3.0 * g[n - 1] + 10.0 * g[n - 2] - 18.0 * g[n - 3] + 6.0 * g[n - 4] - g[n - 5]) / h12;
    d
}

/// Scaling field on a pure time signal: `t g'(t)`.
fn scaling(g: &[f64], t0: f64, dt: f64) -> Vec<f64> {
    derivative4(g, dt)
        .into_iter()
        .enumerate()
        .map(|(i, d)| (t0 + i as f64 * dt) * d)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorResult {
    /// Sup-norm of the mismatch for the better sign.
    pub residual: f64,
    /// +1 or -1: the sign `s` in `[S, R] f = s (-2 R f + 2 mu R^2 f)`.
    pub sign: i8,
    /// Residual for the other sign, for reference.
    pub other: f64,
}

/// Mismatch between `[S, R_mu] f` and `s (-2 R_mu f + 2 mu R_mu^2 f)` with
/// `S = t d/dt`, minimised over `s = +-1`.
///
/// `f` is sampled on `[0, T]` with step `dt` by the caller (`f.dt` must
/// equal `dt`) and must vanish near both ends.
pub fn commutator_residual(mu: f64, f: &TimeSeries, dt: f64) -> Result<CommutatorResult> {
    if !(mu > 0.0) {
        return Err(invalid(format!("mu must be positive, got {mu}")));
    }
    if fabs(f.dt - dt) > 1e-12 * dt {
        return Err(invalid("dt does not match the sampling step of f"));
    }
    let n = f.len();
    if n < 8 {
        return Err(invalid("commutator test needs at least 8 samples"));
    }
    check_step(mu, dt, 0)?;
    let peak = f.sup_norm();
    if peak == 0.0 {
        return Ok(CommutatorResult { residual: 0.0, sign: 1, other: 0.0 });
    }
    let s = &f.samples;
    if fabs(s[0]) > 1e-12 * peak || fabs(s[n - 1]) > 1e-12 * peak {
        return Err(invalid("commutator source must vanish at both ends of the record"));
    }
    let second = (1..n - 1).map(|i| fabs(s[i - 1] - 2.0 * s[i] + s[i + 1])).fold(0.0, f64::max);
    if second > 0.5 * peak {
        return Err(Error::CommutatorInputNotSmooth);
    }
    let (rf, _) = forced_oscillator(mu, dt, s);
    let (rrf, _) = forced_oscillator(mu, dt, &rf);
    let s_rf = scaling(&rf, f.t0, dt);
    let sf = scaling(s, f.t0, dt);
    let (r_sf, _) = forced_oscillator(mu, dt, &sf);
    let mut plus = 0.0f64;
    let mut minus = 0.0f64;
    for i in 0..n {
        let comm = s_rf[i] - r_sf[i];
        let target = -2.0 * rf[i] + 2.0 * mu * rrf[i];
        plus = plus.max(fabs(comm - target));
        minus = minus.max(fabs(comm + target));
    }
    Ok(if plus <= minus {
        CommutatorResult { residual: plus, sign: 1, other: minus }
    } else {
        CommutatorResult { residual: minus, sign: -1, other: plus }
    })
}

/// `int f * d/dt (K^-1 f) dt` by the trapezoid rule (mode `xi`).
///
/// Equals the summed terminal Klein-Gordon energies
/// `sum_j w_j (v_j'(T)^2 + omega_j^2 v_j(T)^2) / 2` up to discretization
/// error, hence nonnegative.
pub fn positivity_functional(quad: &MassQuadrature, xi: f64, f: &TimeSeries) -> Result<f64> {
    let (_, kd) = apply_memory_with_velocity(quad, xi, f)?;
    Ok(trapezoid(f.dt, f.samples.iter().zip(&kd.samples).map(|(a, b)| a * b)))
}

/// `int f * K^-1 f dt`. Not sign-definite: high-frequency sources drive the
/// oscillators above resonance and make it negative.
pub fn direct_pairing(quad: &MassQuadrature, xi: f64, f: &TimeSeries) -> Result<f64> {
    let k = apply_memory(quad, xi, f)?;
    Ok(trapezoid(f.dt, f.samples.iter().zip(&k.samples).map(|(a, b)| a * b)))
}

/// Summed terminal energies of the oscillators driven by `f`.
pub fn terminal_energy(quad: &MassQuadrature, xi: f64, f: &TimeSeries) -> Result<f64> {
    check_quadrature(quad, xi, f.dt)?;
    let last = f.len().saturating_sub(1);
    let mut e = 0.0;
    for (&mu, &w) in quad.nodes.iter().zip(&quad.weights) {
        let omega2 = xi * xi + mu;
        let (v, vd) = forced_oscillator(omega2, f.dt, &f.samples);
        e += w * 0.5 * (vd[last] * vd[last] + omega2 * v[last] * v[last]);
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Achieved value of the bounded quantity divided by `int |f|`.
    pub ratio: f64,
    /// Claimed bound for the ratio.
    pub bound: f64,
    pub holds: bool,
}

/// `sup_t sqrt(mu) |R_mu f| / int |f|` at `xi = 0`, against the bound
/// `sqrt(2)` with relative slack `slack`.
pub fn mass_weighted_bound_check(mu: f64, f: &TimeSeries, slack: f64) -> Result<BoundReport> {
    let v = kg_retarded(ModeParams::new(mu, 0.0)?, f)?;
    let l1 = f.l1_norm();
    let ratio = if l1 == 0.0 { 0.0 } else { sqrt(mu) * v.sup_norm() / l1 };
    let bound = core::f64::consts::SQRT_2;
    Ok(BoundReport { ratio, bound, holds: ratio <= bound * (1.0 + slack) })
}

/// `sup_t omega |R f| / int |f|`, bounded by 1 up to discretization error.
pub fn duhamel_ratio(params: ModeParams, f: &TimeSeries) -> Result<f64> {
    let v = kg_retarded(params, f)?;
    let l1 = f.l1_norm();
    Ok(if l1 == 0.0 { 0.0 } else { sqrt(params.omega2()) * v.sup_norm() / l1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, exp, sin};
    use crate::quadrature::build_quadrature;
    use crate::spectral::{Family, SpectralDensity};

    fn bump(t: f64, center: f64, half_width: f64) -> f64 {
        let x = (t - center) / half_width;
        if fabs(x) >= 1.0 {
            0.0
        } else {
            exp(-1.0 / (1.0 - x * x))
        }
    }

    #[test]
    fn step_source_matches_closed_form() {
        let mut errs = Vec::new();
        for &dt in &[0.1, 0.05] {
            let f = TimeSeries::sample(0.0, dt, (10.0 / dt) as usize + 1, |_| 1.0).unwrap();
            let v = kg_retarded(ModeParams::new(1.0, 0.0).unwrap(), &f).unwrap();
            let err = (0..v.len()).map(|i| fabs(v.samples[i] - (1.0 - cos(v.time(i))))).fold(0.0, f64::max);
            assert!(err < 0.2 * dt.powi(4), "dt {dt}: {err}");
            errs.push(err);
        }
        assert!(errs[0] / errs[1] > 12.0);
    }

    #[test]
    fn zero_source_gives_zero() {
        let f = TimeSeries::new(0.0, 0.1, vec![0.0; 50]).unwrap();
        let v = kg_retarded(ModeParams::new(2.0, 1.0).unwrap(), &f).unwrap();
        assert!(v.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn late_source_leaves_early_output_exactly_zero() {
        let dt = 0.01;
        let f = TimeSeries::sample(0.0, dt, 1001, |t| bump(t, 7.0, 2.0)).unwrap();
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        let q = build_quadrature(&rho, 32, 1e-10).unwrap();
        let k = apply_memory(&q, 0.5, &f).unwrap();
        for i in 0..k.len() {
            if k.time(i) <= 5.0 {
                assert_eq!(k.samples[i].to_bits(), 0.0f64.to_bits());
            }
        }
        assert!(k.sup_norm() > 0.0);
    }

    #[test]
    fn stiff_mode_is_rejected() {
        let f = TimeSeries::new(0.0, 1.0, vec![1.0; 10]).unwrap();
        let err = kg_retarded(ModeParams::new(9.0, 0.0).unwrap(), &f).unwrap_err();
        assert_eq!(err.code(), "mode-step-unstable");
        let q = MassQuadrature::from_parts(vec![1.0, 16.0], vec![1.0, 1.0], Family::DiracComb).unwrap();
        assert!(matches!(apply_memory(&q, 0.0, &f), Err(Error::ModeStepUnstable { node: 1, .. })));
    }

    #[test]
    fn single_atom_memory_is_the_single_mode() {
        let rho = SpectralDensity::dirac_comb(&[(1.0, 1.0)]).unwrap();
        let q = build_quadrature(&rho, 1, 1e-10).unwrap();
        let f = TimeSeries::sample(0.0, 0.05, 201, |_| 1.0).unwrap();
        let k = apply_memory(&q, 0.0, &f).unwrap();
        let v = kg_retarded(ModeParams::new(1.0, 0.0).unwrap(), &f).unwrap();
        assert_eq!(k.samples, v.samples);
    }

    #[test]
    fn null_density_memory_is_zero() {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap().scaled(0.0);
        let q = build_quadrature(&rho, 32, 1e-10).unwrap();
        let f = TimeSeries::sample(0.0, 0.05, 201, |t| sin(t)).unwrap();
        assert!(apply_memory(&q, 1.0, &f).unwrap().samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn direct_pairing_is_indefinite() {
        // a source oscillating well above the mass makes the plain pairing negative
        let q = MassQuadrature::from_parts(vec![1.0], vec![1.0], Family::DiracComb).unwrap();
        let f = TimeSeries::sample(0.0, 0.01, 2001, |t| bump(t, 10.0, 9.0) * cos(4.0 * t)).unwrap();
        assert!(direct_pairing(&q, 0.0, &f).unwrap() < 0.0);
        assert!(positivity_functional(&q, 0.0, &f).unwrap() >= 0.0);
    }

    #[test]
    fn positivity_equals_terminal_energy() {
        let q = MassQuadrature::from_parts(vec![1.0], vec![1.0], Family::DiracComb).unwrap();
        let f = TimeSeries::sample(0.0, 0.01, 1001, |t| exp(-(t - 4.0) * (t - 4.0))).unwrap();
        let p = positivity_functional(&q, 0.0, &f).unwrap();
        let e = terminal_energy(&q, 0.0, &f).unwrap();
        assert!(fabs(p - e) < 1e-6 * e, "{p} {e}");
    }

    #[test]
    fn mass_weighted_ratio_shrinks_with_mass() {
        let f = TimeSeries::sample(0.0, 0.005, 2001, |t| bump(t, 2.0, 1.0)).unwrap();
        let light = mass_weighted_bound_check(1.0, &f, 0.02).unwrap();
        let heavy = mass_weighted_bound_check(100.0, &f, 0.02).unwrap();
        let four = mass_weighted_bound_check(4.0, &f, 0.02).unwrap();
        assert!(light.holds && heavy.holds && four.holds);
        assert!(heavy.ratio < 0.15 * light.ratio, "{light:?} {heavy:?} {four:?}");
        let zero = TimeSeries::new(0.0, 0.01, vec![0.0; 10]).unwrap();
        assert_eq!(mass_weighted_bound_check(4.0, &zero, 0.02).unwrap().ratio, 0.0);
    }

    #[test]
    fn derivative_is_fourth_order() {
        let err = |dt: f64| {
            let g: Vec<f64> = (0..=(2.0 / dt) as usize).map(|i| sin(i as f64 * dt)).collect();
            derivative4(&g, dt)
                .iter()
                .enumerate()
                .map(|(i, d)| fabs(d - cos(i as f64 * dt)))
                .fold(0.0, f64::max)
        };
        assert!(err(0.02) / err(0.01) > 14.0);
    }

    #[test]
    fn commutator_residual_small_with_consistent_sign() {
        let dt = 1e-3;
        let f = TimeSeries::sample(0.0, dt, 10001, |t| bump(t, 4.0, 2.0)).unwrap();
        let r = commutator_residual(1.0, &f, dt).unwrap();
        assert!(r.residual <= 1e-5 * f.sup_norm(), "{r:?}");
        assert_eq!(r.sign, -1);
        assert!(r.other > 1e3 * r.residual);
    }

    #[test]
    fn rough_commutator_input_is_rejected() {
        let mut s = vec![0.0; 100];
        s[50] = 1.0;
        let f = TimeSeries::new(0.0, 0.01, s).unwrap();
        assert_eq!(commutator_residual(1.0, &f, 0.01), Err(Error::CommutatorInputNotSmooth));
    }
}
