//! Post-processing of radial runs: decay-rate fits, the late-time memory
//! profile and the free-evolution Cauchy residual.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{exp, fabs, floor, log, sqrt, linear_fit, PI};
use crate::radial::{discrete_free_wave, RunOutput, Snapshot};

pub const MIN_FIT_SAMPLES: usize = 8;

/// Power law `value ~ amplitude (1 + t)^exponent` fitted in log-log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Least-squares fit of `ln value` against `ln(1 + t)` over samples with
/// `t` in the closed window and a strictly positive value.
pub fn decay_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    if !(lo <= hi) {
        return Err(invalid("fit window must satisfy t_lo <= t_hi"));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .iter()
        .filter(|(t, v)| *t >= lo && *t <= hi && *v > 0.0 && v.is_finite())
        .map(|(t, v)| (log(1.0 + t), log(*v)))
        .unzip();
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: xs.len() });
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(DecayFit { exponent: slope, amplitude: exp(intercept), r_squared: r2.clamp(0.0, 1.0), window })
}

/// `sqrt(int f^2 r^2 dr)` by the trapezoid rule on a uniform grid.
pub fn radial_l2(f: &[f64], dr: f64) -> f64 {
    let n = f.len();
    let mut s = 0.0;
    for (i, v) in f.iter().enumerate().skip(1) {
        let r = i as f64 * dr;
        let trap = if i + 1 == n { 0.5 } else { 1.0 };
        s += trap * v * v * r * r * dr;
    }
    sqrt(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryLimit {
    /// Average of `M(t, .)` over the last 10% of the run.
    pub profile: Vec<f64>,
    pub norm: f64,
    /// Fit of `||M(t) - M_inf||` over `[t_final / 2, 0.9 t_final]`.
    pub residual_fit: DecayFit,
    /// `||M_inf(10%) - M_inf(5%)||` between the two averaging windows.
    pub window_difference: f64,
    /// Fitted residual envelope at the start of the averaging window.
    pub envelope: f64,
}

impl MemoryLimit {
    pub fn stable(&self) -> bool {
        self.window_difference <= self.envelope
    }
}

fn average_profile(profiles: &[&(f64, Vec<f64>)]) -> Vec<f64> {
    let mut avg = vec![0.0; profiles[0].1.len()];
    for (_, m) in profiles {
        for (a, v) in avg.iter_mut().zip(m) {
            *a += v;
        }
    }
    let k = profiles.len() as f64;
    avg.iter_mut().for_each(|a| *a /= k);
    avg
}

/// Late-time memory profile and the rate at which `M(t)` approaches it.
pub fn memory_limit(run: &RunOutput) -> Result<MemoryLimit> {
    if !run.completed {
        return Err(invalid("memory limit needs a completed run"));
    }
    let t_end = run.t_final;
    let peak_mem = run.records.iter().fold(0.0f64, |m, r| m.max(r.mem_norm));
    let peak_u = run.records.iter().fold(0.0f64, |m, r| m.max(r.sup_u));
    // memory is quadratic in u, so noise is measured against sup_u^2
    if !(peak_mem > 10.0 * f64::EPSILON * peak_u * peak_u) {
        return Err(Error::MemoryBelowNoise);
    }
    let window = |frac: f64| -> Vec<&(f64, Vec<f64>)> {
        run.memory_profiles.iter().filter(|(t, _)| *t >= (1.0 - frac) * t_end - 0.5 * run.dt).collect()
    };
    let last10 = window(0.1);
    let last5 = window(0.05);
    if last10.is_empty() || last5.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, found: 0 });
    }
    let profile = average_profile(&last10);
    let alt = average_profile(&last5);
    let dr = run.grid.dr();
    let diff: Vec<f64> = profile.iter().zip(&alt).map(|(a, b)| a - b).collect();
    let series: Vec<(f64, f64)> = run
        .memory_profiles
        .iter()
        .map(|(t, m)| {
            let d: Vec<f64> = m.iter().zip(&profile).map(|(a, b)| a - b).collect();
            (*t, radial_l2(&d, dr))
        })
        .collect();
    let residual_fit = decay_fit(&series, (0.5 * t_end, 0.9 * t_end))?;
    let envelope = residual_fit.amplitude * libm::pow(1.0 + 0.9 * t_end, residual_fit.exponent);
    Ok(MemoryLimit {
        norm: radial_l2(&profile, dr),
        profile,
        residual_fit,
        window_difference: radial_l2(&diff, dr),
        envelope,
    })
}

/// Linear interpolation of grid samples `f(i dr)`, zero beyond the grid.
fn interp(f: &[f64], dr: f64, x: f64) -> f64 {
    let s = x / dr;
    let last = f.len() - 1;
    if !(s >= 0.0) || s > last as f64 {
        return 0.0;
    }
    let k = (floor(s) as usize).min(last - 1);
    let a = s - k as f64;
    (1.0 - a) * f[k] + a * f[k + 1]
}

/// Odd extension of `r v` to negative arguments.
fn odd(f: &[f64], dr: f64, x: f64) -> f64 {
    if x < 0.0 {
        -interp(f, dr, -x)
    } else {
        interp(f, dr, x)
    }
}

/// Evolves `(v, v_t)` freely for a time `tau` using d'Alembert's formula
/// on `V = r v`; returns `(V, V_t)` on the same grid.
pub fn free_evolve(v: &[f64], v_t: &[f64], dr: f64, tau: f64) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let g: Vec<f64> = (0..n).map(|i| i as f64 * dr * v[i]).collect();
    let h: Vec<f64> = (0..n).map(|i| i as f64 * dr * v_t[i]).collect();
    // primitive of h from 0; even in its argument since h is odd
    let mut k = vec![0.0; n];
    for i in 1..n {
        k[i] = k[i - 1] + 0.5 * dr * (h[i] + h[i - 1]);
    }
    let mut dg = vec![0.0; n];
    for i in 1..n - 1 {
        dg[i] = (g[i + 1] - g[i - 1]) / (2.0 * dr);
    }
    dg[0] = (g[1] - g[0]) / dr;
    let prim = |x: f64| interp(&k, dr, fabs(x));
    // g' of an odd function is even
    let slope = |x: f64| interp(&dg, dr, fabs(x));
    let mut out_v = vec![0.0; n];
    let mut out_t = vec![0.0; n];
    for i in 1..n - 1 {
        let r = i as f64 * dr;
        let (a, b) = (r + tau, r - tau);
        out_v[i] = 0.5 * (odd(&g, dr, a) + odd(&g, dr, b)) + 0.5 * (prim(a) - prim(b));
        out_t[i] = 0.5 * (slope(a) - slope(b)) + 0.5 * (odd(&h, dr, a) + odd(&h, dr, b));
    }
    (out_v, out_t)
}

/// Energy norm `sqrt(4 pi int (V_t^2 + V_r^2) dr)` of a rescaled pair.
fn energy_norm(v: &[f64], v_t: &[f64], dr: f64) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n - 1 {
        let vr = (v[i + 1] - v[i]) / dr;
        let vt = 0.5 * (v_t[i] + v_t[i + 1]);
        s += (vt * vt + vr * vr) * dr;
    }
    sqrt(4.0 * PI * s)
}

fn corrected(s: &Snapshot) -> (Vec<f64>, Vec<f64>) {
    let v = s.u.iter().zip(&s.phi).map(|(u, p)| u - p).collect();
    let vt = s.u_t.iter().zip(&s.phi_t).map(|(u, p)| u - p).collect();
    (v, vt)
}

/// How the memory-corrected field is propagated between snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeEvolution {
    /// d'Alembert's formula with linear interpolation.
    Exact,
    /// The solver's own stencil and time step with all sources off, so the
    /// scheme's phase error cancels from the residual.
    Discrete,
}

/// Energy-norm distance at `t2` between the run's memory-corrected field
/// `u - Phi` and the exact free evolution of the same field from `t1`.
pub fn scattering_residual(run: &RunOutput, t1: f64, t2: f64) -> Result<f64> {
    scattering_residual_with(run, t1, t2, FreeEvolution::Exact)
}

pub fn scattering_residual_with(run: &RunOutput, t1: f64, t2: f64, method: FreeEvolution) -> Result<f64> {
    if !(t2 > t1) {
        return Err(invalid("scattering residual needs t2 > t1"));
    }
    let s1 = run.snapshot_at(t1)?;
    let s2 = run.snapshot_at(t2)?;
    let dr = s1.dr;
    let (v1, vt1) = corrected(s1);
    let (v2, vt2) = corrected(s2);
    let n = v2.len();
    let (fv, ft) = match method {
        FreeEvolution::Exact => free_evolve(&v1, &vt1, dr, s2.t - s1.t),
        FreeEvolution::Discrete => {
            let scale = |f: &[f64]| -> Vec<f64> { (0..n).map(|i| i as f64 * dr * f[i]).collect() };
            let steps = libm::round((s2.t - s1.t) / run.dt) as usize;
            discrete_free_wave(&scale(&v1), &scale(&vt1), dr, run.dt, steps)
        }
    };
    let dv: Vec<f64> = (0..n).map(|i| i as f64 * dr * v2[i] - fv[i]).collect();
    let dt: Vec<f64> = (0..n).map(|i| i as f64 * dr * vt2[i] - ft[i]).collect();
    Ok(energy_norm(&dv, &dt, dr))
}

/// `D(t, 2t)` at each `t` and the decay rate `-d ln D / d ln t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDecay {
    pub samples: Vec<(f64, f64)>,
    pub rate: f64,
    pub r_squared: f64,
    pub decreasing: bool,
}

pub fn residual_decay(run: &RunOutput, times: &[f64], method: FreeEvolution) -> Result<ResidualDecay> {
    if times.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, found: times.len() });
    }
    let samples = times.iter().map(|&t| Ok((t, scattering_residual_with(run, t, 2.0 * t, method)?))).collect::<Result<Vec<_>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().map(|(t, d)| (log(*t), log(*d))).unzip();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    let decreasing = samples.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(ResidualDecay { samples, rate: -slope, r_squared: r2, decreasing })
}

/// `(t, sup_u)` from the diagnostics, for [`decay_fit`].
pub fn sup_series(run: &RunOutput) -> Vec<(f64, f64)> {
    run.records.iter().map(|r| (r.t, r.sup_u)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s: Vec<(f64, f64)> = (0..20).map(|k| (k as f64 * 5.0, 3.0 / (1.0 + k as f64 * 5.0))).collect();
        let fit = decay_fit(&s, (0.0, 100.0)).unwrap();
        assert!((fit.exponent + 1.0).abs() < 1e-6);
        assert!((fit.amplitude - 3.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        let s: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, if k % 2 == 0 { 1.0 } else { 0.0 })).collect();
        assert_eq!(decay_fit(&s, (0.0, 10.0)), Err(Error::InsufficientSamples { needed: 8, found: 5 }));
    }

    #[test]
    fn free_evolution_of_static_zero() {
        let z = vec![0.0; 50];
        let (v, t) = free_evolve(&z, &z, 0.1, 1.0);
        assert!(v.iter().chain(&t).all(|x| *x == 0.0));
    }
}
