//! Spherically symmetric wave evolution with retarded memory.
//!
//! The unknowns are rescaled by `r` so that each radial field obeys a 1-D
//! wave equation on `[0, r_max]`: `V = r u` for the wave field, `X_j = r chi_j`
//! for the massive modes of the mass quadrature, and `P = r Phi` for the
//! memory profile. All three vanish at `r = 0` (odd reflection) and at
//! `r_max` (Dirichlet).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{ceil, exp, fabs, log, sqrt, PI};
use crate::quadrature::MassQuadrature;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub r_max: f64,
    pub n_r: usize,
}

impl Grid {
    pub fn new(r_max: f64, n_r: usize) -> Result<Self> {
        if n_r < 64 {
            return Err(invalid(format!("n_r must be at least 64, got {n_r}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(invalid(format!("r_max must be positive, got {r_max}")));
        }
        Ok(Grid { r_max, n_r })
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr()
    }

    pub fn points(&self) -> usize {
        self.n_r + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityMode {
    /// `u_t = 0` initially: half the pulse travels in, half out.
    TimeSymmetric,
    /// `u_t = u_r + u / r`, so that `r u` is a function of `r + t`.
    Ingoing,
    /// `u_t = -u_r - u / r`, so that `r u` is a function of `r - t`.
    Outgoing,
}

/// Initial pulse `eps exp(-(r - r_c)^2 / sigma^2)`, smoothly cut off
/// between `3 sigma` and `4 sigma` from the centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataProfile {
    pub r_c: f64,
    pub sigma: f64,
    pub velocity: VelocityMode,
}

impl DataProfile {
    pub fn support_radius(&self) -> f64 {
        self.r_c + 4.0 * self.sigma
    }
}

/// Where the memory modes get their forcing from.
#[derive(Debug, Clone, Copy)]
pub enum SourceModel {
    /// `N2 = c_grad (u_t^2 + u_r^2) + d_quad u^2`.
    Nonlinear,
    /// `N2(t, r) = time(t) * space(r)`, independent of the wave field.
    Prescribed { time: fn(f64) -> f64, space: fn(f64) -> f64 },
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub epsilon: f64,
    /// Null-form coefficient in `F = a_null (u_t^2 - u_r^2) + b_bad u_t^2`.
    pub a_null: f64,
    pub b_bad: f64,
    pub c_grad: f64,
    pub d_quad: f64,
    pub quad: MassQuadrature,
    pub cfl: f64,
    pub t_final: f64,
    pub profile: DataProfile,
    pub delta0: f64,
    pub source: SourceModel,
}

pub const DEFAULT_EPSILON: f64 = 1e-2;
pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_DELTA0: f64 = 0.2;
pub const DEFAULT_R_C: f64 = 5.0;
pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_T_FINAL: f64 = 200.0;
pub const DEFAULT_N_R: usize = 2048;

impl ModelConfig {
    /// Default model: null-form self-interaction, gradient and quadratic
    /// memory sources, a time-symmetric pulse at `r = 5`.
    pub fn new(quad: MassQuadrature) -> Self {
        ModelConfig {
            epsilon: DEFAULT_EPSILON,
            a_null: 1.0,
            b_bad: 0.0,
            c_grad: 1.0,
            d_quad: 1.0,
            quad,
            cfl: DEFAULT_CFL,
            t_final: DEFAULT_T_FINAL,
            profile: DataProfile { r_c: DEFAULT_R_C, sigma: DEFAULT_SIGMA, velocity: VelocityMode::TimeSymmetric },
            delta0: DEFAULT_DELTA0,
            source: SourceModel::Nonlinear,
        }
    }

    /// Smallest `r_max` satisfying the causal padding.
    pub fn padded_r_max(&self) -> f64 {
        self.profile.support_radius() + self.t_final + 2.0
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let finite = [self.epsilon, self.a_null, self.b_bad, self.c_grad, self.d_quad];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(invalid("model coefficients must be finite"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid("epsilon must be nonnegative"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(invalid(format!("cfl must lie in (0, 0.9], got {}", self.cfl)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(invalid("t_final must be nonnegative"));
        }
        if !(self.delta0 > 0.0 && self.delta0 < 1.0) {
            return Err(invalid(format!("delta0 must lie in (0, 1), got {}", self.delta0)));
        }
        let p = &self.profile;
        if !(p.sigma > 0.0 && p.r_c.is_finite()) {
            return Err(invalid("sigma must be positive"));
        }
        if p.r_c < 4.0 * p.sigma {
            return Err(Error::PaddingViolated(format!(
                "pulse support must stay away from the origin: r_c = {} < 4 sigma = {}",
                p.r_c,
                4.0 * p.sigma
            )));
        }
        if grid.r_max < self.padded_r_max() - 1e-12 {
            return Err(Error::PaddingViolated(format!(
                "r_max = {} but support radius + t_final + 2 = {}",
                grid.r_max,
                self.padded_r_max()
            )));
        }
        let dt = time_step(self, grid);
        let stiff = dt * sqrt(self.quad.max_node() + (PI / grid.dr()) * (PI / grid.dr()));
        if stiff > crate::resolvent::MAX_OMEGA_DT {
            return Err(Error::ModeStepUnstable { node: self.quad.len().saturating_sub(1), omega_dt: stiff });
        }
        Ok(())
    }
}

/// Step size: the largest `dt <= cfl dr` that divides `t_final` evenly.
pub fn time_step(cfg: &ModelConfig, grid: &Grid) -> f64 {
    let target = cfg.cfl * grid.dr();
    if cfg.t_final <= 0.0 {
        return target;
    }
    cfg.t_final / ceil(cfg.t_final / target - 1e-9)
}

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        exp(-1.0 / x)
    }
}

/// Smooth cutoff: 1 for `d <= 3`, 0 for `d >= 4`.
fn cutoff(d: f64) -> f64 {
    let x = 4.0 - d;
    let a = psi(x);
    let b = psi(1.0 - x);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Initial displacement `u_0(r)`.
pub fn initial_displacement(cfg: &ModelConfig, r: f64) -> f64 {
    let p = &cfg.profile;
    let z = (r - p.r_c) / p.sigma;
    cfg.epsilon * exp(-z * z) * cutoff(fabs(z))
}

/// `G(r) = r u_0(r)` and its derivative, by central differences of width
/// `1e-6 sigma` (only used for initial velocities).
fn rescaled_data(cfg: &ModelConfig, r: f64) -> (f64, f64) {
    let h = 1e-6 * cfg.profile.sigma;
    let g = |x: f64| x * initial_displacement(cfg, x);
    (g(r), (g(r + h) - g(r - h)) / (2.0 * h))
}

/// Initial velocity `u_1(r)`.
pub fn initial_velocity(cfg: &ModelConfig, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let (_, dg) = rescaled_data(cfg, r);
    match cfg.profile.velocity {
        VelocityMode::TimeSymmetric => 0.0,
        VelocityMode::Ingoing => dg / r,
        VelocityMode::Outgoing => -dg / r,
    }
}

/// Exact solution of the free problem (`F = 0`, no memory) for the
/// configured data, from d'Alembert's formula for `r u` with odd extension.
pub fn free_wave_solution(cfg: &ModelConfig, t: f64, r: f64) -> f64 {
    let g = |x: f64| x * initial_displacement(cfg, fabs(x));
    let (a, b) = (r + t, r - t);
    let even = |x: f64| fabs(x) * initial_displacement(cfg, fabs(x));
    let v = match cfg.profile.velocity {
        VelocityMode::TimeSymmetric => 0.5 * (g(a) + g(b)),
        VelocityMode::Ingoing => 0.5 * (g(a) + g(b)) + 0.5 * (even(a) - even(b)),
        VelocityMode::Outgoing => 0.5 * (g(a) + g(b)) - 0.5 * (even(a) - even(b)),
    };
    if r == 0.0 {
        // d/dr of r u at the origin
        let h = 1e-6;
        return free_wave_solution(cfg, t, h);
    }
    v / r
}

/// Grid values of the rescaled fields, stored as one flat vector:
/// `[V | V_t | X_0 .. X_{m-1} | X_0,t .. X_{m-1},t | P | P_t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    points: usize,
    modes: usize,
    data: Vec<f64>,
}

impl FieldState {
    pub fn zeros(points: usize, modes: usize) -> Self {
        FieldState { t: 0.0, points, modes, data: vec![0.0; (2 * modes + 4) * points] }
    }

    fn block(&self, b: usize) -> &[f64] {
        &self.data[b * self.points..(b + 1) * self.points]
    }

    fn block_mut(&mut self, b: usize) -> &mut [f64] {
        &mut self.data[b * self.points..(b + 1) * self.points]
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn v(&self) -> &[f64] {
        self.block(0)
    }

    pub fn v_dot(&self) -> &[f64] {
        self.block(1)
    }

    pub fn x(&self, j: usize) -> &[f64] {
        self.block(2 + j)
    }

    pub fn x_dot(&self, j: usize) -> &[f64] {
        self.block(2 + self.modes + j)
    }

    pub fn p(&self) -> &[f64] {
        self.block(2 + 2 * self.modes)
    }

    pub fn p_dot(&self) -> &[f64] {
        self.block(3 + 2 * self.modes)
    }

    pub fn v_mut(&mut self) -> &mut [f64] {
        self.block_mut(0)
    }

    pub fn v_dot_mut(&mut self) -> &mut [f64] {
        self.block_mut(1)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `u` on the grid from `V = r u`, with the even extrapolation
/// `u(0) = (8 V_1 - V_2) / (6 dr)`.
pub fn unscale(v: &[f64], dr: f64) -> Vec<f64> {
    let mut u = vec![0.0; v.len()];
    unscale_into(v, dr, &mut u);
    u
}

fn unscale_into(v: &[f64], dr: f64, u: &mut [f64]) {
    for i in 1..v.len() {
        u[i] = v[i] / (i as f64 * dr);
    }
    u[0] = (8.0 * v[1] - v[2]) / (6.0 * dr);
}

/// Radial derivative of an even function sampled on the grid.
fn radial_derivative(u: &[f64], dr: f64, out: &mut [f64]) {
    let n = u.len() - 1;
    out[0] = 0.0;
    for i in 1..n {
        out[i] = (u[i + 1] - u[i - 1]) / (2.0 * dr);
    }
    out[n] = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * dr);
}

fn radial_second(u: &[f64], dr: f64, out: &mut [f64]) {
    let n = u.len() - 1;
    let h2 = dr * dr;
    out[0] = 2.0 * (u[1] - u[0]) / h2;
    for i in 1..n {
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
    }
    out[n] = (2.0 * u[n] - 5.0 * u[n - 1] + 4.0 * u[n - 2] - u[n - 3]) / h2;
}

/// Initial state: the configured pulse, all memory fields at rest.
pub fn initialize(cfg: &ModelConfig, grid: &Grid) -> Result<FieldState> {
    cfg.validate(grid)?;
    let mut s = FieldState::zeros(grid.points(), cfg.quad.len());
    for i in 1..grid.n_r {
        let r = grid.r(i);
        s.v_mut()[i] = r * initial_displacement(cfg, r);
        s.v_dot_mut()[i] = r * initial_velocity(cfg, r);
    }
    Ok(s)
}

/// Reusable buffers for right-hand sides and Runge-Kutta stages.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: ModelConfig,
    grid: Grid,
    dt: f64,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    u: Vec<f64>,
    ut: Vec<f64>,
    ur: Vec<f64>,
    rf: Vec<f64>,
    rn2: Vec<f64>,
    rm: Vec<f64>,
}

impl Stepper {
    pub fn new(cfg: &ModelConfig, grid: &Grid) -> Result<Self> {
        cfg.validate(grid)?;
        let size = (2 * cfg.quad.len() + 4) * grid.points();
        let n = grid.points();
        Ok(Stepper {
            cfg: cfg.clone(),
            grid: *grid,
            dt: time_step(cfg, grid),
            k: [vec![0.0; size], vec![0.0; size], vec![0.0; size], vec![0.0; size]],
            stage: vec![0.0; size],
            u: vec![0.0; n],
            ut: vec![0.0; n],
            ur: vec![0.0; n],
            rf: vec![0.0; n],
            rn2: vec![0.0; n],
            rm: vec![0.0; n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Pointwise nonlinearities and the memory sum for the state `y` at time `t`.
    fn sources(&mut self, t: f64, y: &[f64]) {
        let n = self.grid.points();
        let dr = self.grid.dr();
        let m = self.cfg.quad.len();
        unscale_into(&y[0..n], dr, &mut self.u);
        unscale_into(&y[n..2 * n], dr, &mut self.ut);
        radial_derivative(&self.u, dr, &mut self.ur);
        let c = &self.cfg;
        for i in 0..n {
            let r = i as f64 * dr;
            let (ut, ur, u) = (self.ut[i], self.ur[i], self.u[i]);
            self.rf[i] = r * (c.a_null * (ut * ut - ur * ur) + c.b_bad * ut * ut);
            self.rn2[i] = r * match c.source {
                SourceModel::Nonlinear => c.c_grad * (ut * ut + ur * ur) + c.d_quad * u * u,
                SourceModel::Prescribed { time, space } => time(t) * space(r),
            };
        }
        self.rm.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..m {
            let w = c.quad.weights[j];
            let x = &y[(2 + j) * n..(3 + j) * n];
            for (acc, xv) in self.rm.iter_mut().zip(x) {
                *acc += w * xv;
            }
        }
    }

    /// Time derivative of the flat state `y` into `dy`.
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) {
        self.sources(t, y);
        let n = self.grid.points();
        let m = self.cfg.quad.len();
        let inv_h2 = 1.0 / (self.grid.dr() * self.grid.dr());
        let lap = |f: &[f64], i: usize| (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv_h2;
        // position blocks advance with their velocities
        for b in [0usize, 2 * m + 2] {
            dy[b * n..(b + 1) * n].copy_from_slice(&y[(b + 1) * n..(b + 2) * n]);
        }
        for j in 0..m {
            let (src, dst) = ((2 + m + j) * n, (2 + j) * n);
            dy[dst..dst + n].copy_from_slice(&y[src..src + n]);
        }
        let v = &y[0..n];
        let acc = &mut dy[n..2 * n];
        acc[0] = 0.0;
        acc[n - 1] = 0.0;
        for i in 1..n - 1 {
            acc[i] = lap(v, i) + self.rf[i] + self.rm[i];
        }
        for j in 0..m {
            let mu = self.cfg.quad.nodes[j];
            let x = &y[(2 + j) * n..(3 + j) * n];
            let acc = &mut dy[(2 + m + j) * n..(3 + m + j) * n];
            acc[0] = 0.0;
            acc[n - 1] = 0.0;
            for i in 1..n - 1 {
                acc[i] = lap(x, i) - mu * x[i] + self.rn2[i];
            }
        }
        let p = &y[(2 * m + 2) * n..(2 * m + 3) * n];
        let acc = &mut dy[(2 * m + 3) * n..(2 * m + 4) * n];
        acc[0] = 0.0;
        acc[n - 1] = 0.0;
        for i in 1..n - 1 {
            acc[i] = lap(p, i) + self.rm[i];
        }
    }

    /// One classical Runge-Kutta step.
    pub fn step(&mut self, state: &mut FieldState) -> Result<()> {
        let dt = self.dt;
        let t = state.t;
        let mut k = core::mem::take(&mut self.k);
        let mut stage = core::mem::take(&mut self.stage);
        self.rhs(t, &state.data, &mut k[0]);
        for (s, (y, d)) in stage.iter_mut().zip(state.data.iter().zip(&k[0])) {
            *s = y + 0.5 * dt * d;
        }
        self.rhs(t + 0.5 * dt, &stage, &mut k[1]);
        for (s, (y, d)) in stage.iter_mut().zip(state.data.iter().zip(&k[1])) {
            *s = y + 0.5 * dt * d;
        }
        self.rhs(t + 0.5 * dt, &stage, &mut k[2]);
        for (s, (y, d)) in stage.iter_mut().zip(state.data.iter().zip(&k[2])) {
            *s = y + dt * d;
        }
        self.rhs(t + dt, &stage, &mut k[3]);
        for (i, y) in state.data.iter_mut().enumerate() {
            *y += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        self.k = k;
        self.stage = stage;
        state.t = t + dt;
        let n = self.grid.points();
        for b in [0usize, 2 * self.cfg.quad.len() + 2] {
            if let Some(i) = state.data[b * n..(b + 1) * n].iter().position(|v| !v.is_finite()) {
                return Err(Error::BlowUpDetected { t: state.t, r: self.grid.r(i) });
            }
        }
        Ok(())
    }

    /// Memory field `M = (sum_j w_j X_j) / r` of a state.
    pub fn memory(&mut self, state: &FieldState) -> Vec<f64> {
        self.sources(state.t, &state.data);
        unscale(&self.rm, self.grid.dr())
    }

    pub fn diagnostics(&mut self, state: &FieldState) -> DiagnosticsRecord {
        let n = self.grid.points();
        let dr = self.grid.dr();
        let mut dy = core::mem::take(&mut self.k[0]);
        self.rhs(state.t, &state.data, &mut dy);
        let u = self.u.clone();
        let ut = self.ut.clone();
        let ur = self.ur.clone();
        let utt = unscale(&dy[n..2 * n], dr);
        self.k[0] = dy;
        let mut utr = vec![0.0; n];
        radial_derivative(&ut, dr, &mut utr);
        let mut urr = vec![0.0; n];
        radial_second(&u, dr, &mut urr);
        let m = unscale(&self.rm, dr);
        let n2: Vec<f64> = {
            let mut s = unscale(&self.rn2, dr);
            // r N2 vanishes at the origin by construction; recover N2 there
            s[0] = (4.0 * s[1] - s[2]) / 3.0;
            s
        };
        let d0 = self.cfg.delta0;
        let mut e_std = 0.0;
        let mut e_ghost = 0.0;
        let mut flux = 0.0;
        let mut mem = 0.0;
        let mut src = 0.0;
        for i in 1..n {
            let r = i as f64 * dr;
            let trap = if i == n - 1 { 0.5 } else { 1.0 };
            let vol = trap * 4.0 * PI * r * r * dr;
            let angular = 2.0 * ur[i] * ur[i] / (r * r);
            let top = ut[i] * ut[i] + ur[i] * ur[i] + utt[i] * utt[i] + 2.0 * utr[i] * utr[i] + urr[i] * urr[i] + angular;
            let zero_order = u[i] * u[i] + ut[i] * ut[i] + ur[i] * ur[i];
            e_std += vol * (top + zero_order);
            let s = state.t - r;
            let w = exp(ghost_q(s, d0));
            e_ghost += vol * w * top;
            let good = (ut[i] - ur[i]) * (ut[i] - ur[i])
                + (utt[i] - utr[i]) * (utt[i] - utr[i])
                + (utr[i] - urr[i]) * (utr[i] - urr[i])
                + angular;
            flux += vol * ghost_q_prime(s, d0) * w * good;
            let shell = trap * r * r * dr;
            mem += shell * m[i] * m[i];
            src += shell * n2[i] * n2[i];
        }
        DiagnosticsRecord {
            t: state.t,
            e_std,
            e_ghost,
            flux,
            sup_u: u.iter().fold(0.0, |a, v| a.max(fabs(*v))),
            u_origin: u[0],
            mem_norm: sqrt(mem),
            src_norm: sqrt(src),
        }
    }
}

fn smoothstep5(x: f64) -> f64 {
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Ghost profile `q(s) = delta0 * S((clamp(s, -1, 1) + 1) / 2)` with the
/// quintic smoothstep `S`.
pub fn ghost_q(s: f64, delta0: f64) -> f64 {
    delta0 * smoothstep5(0.5 * (s.clamp(-1.0, 1.0) + 1.0))
}

pub fn ghost_q_prime(s: f64, delta0: f64) -> f64 {
    if s <= -1.0 || s >= 1.0 {
        return 0.0;
    }
    let x = 0.5 * (s + 1.0);
    delta0 * 0.5 * 30.0 * x * x * (1.0 - x) * (1.0 - x)
}

/// One step from `state` (convenience wrapper allocating a [`Stepper`]).
pub fn step(state: &FieldState, cfg: &ModelConfig, grid: &Grid) -> Result<FieldState> {
    let mut stepper = Stepper::new(cfg, grid)?;
    let mut next = state.clone();
    stepper.step(&mut next)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_std: f64,
    pub e_ghost: f64,
    pub flux: f64,
    pub sup_u: f64,
    pub u_origin: f64,
    pub mem_norm: f64,
    pub src_norm: f64,
}

/// Field profiles at one time, rescaled back to `u`, `Phi` and `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// Time the snapshot was requested for; `t` is the nearest step.
    pub requested: f64,
    pub dr: f64,
    pub u: Vec<f64>,
    pub u_t: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_t: Vec<f64>,
    pub memory: Vec<f64>,
}

impl Snapshot {
    fn capture(stepper: &mut Stepper, state: &FieldState, requested: f64) -> Self {
        let dr = stepper.grid.dr();
        Snapshot {
            t: state.t,
            requested,
            dr,
            u: unscale(state.v(), dr),
            u_t: unscale(state.v_dot(), dr),
            phi: unscale(state.p(), dr),
            phi_t: unscale(state.p_dot(), dr),
            memory: stepper.memory(state),
        }
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    /// Diagnostics every `cadence` steps (and always at the first and last).
    pub cadence: usize,
    pub snapshot_times: Vec<f64>,
    /// Memory profiles are kept at every record from this time on.
    pub memory_from: f64,
}

impl EvolveOptions {
    pub fn new(cfg: &ModelConfig, cadence: usize) -> Self {
        EvolveOptions { cadence, snapshot_times: Vec::new(), memory_from: 0.5 * cfg.t_final }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub grid: Grid,
    pub dt: f64,
    pub t_final: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    /// `(t, M(t, r_i))` at every record from `memory_from` on.
    pub memory_profiles: Vec<(f64, Vec<f64>)>,
    pub completed: bool,
    /// Blow-up that ended the run early.
    pub failure: Option<Error>,
}

impl RunOutput {
    /// Trapezoid integral of the recorded flux over time.
    pub fn integrated_flux(&self) -> f64 {
        self.records.windows(2).map(|w| 0.5 * (w[0].flux + w[1].flux) * (w[1].t - w[0].t)).sum()
    }

    pub fn snapshot_at(&self, t: f64) -> Result<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| fabs(s.requested - t) <= 1e-9 * t.abs().max(1.0))
            .ok_or(Error::SnapshotUnavailable(t))
    }

    pub fn final_state_time(&self) -> f64 {
        self.records.last().map(|r| r.t).unwrap_or(0.0)
    }
}

/// Marches to `t_final`, recording diagnostics every `cadence` steps.
pub fn evolve(cfg: &ModelConfig, grid: &Grid, cadence: usize) -> Result<RunOutput> {
    evolve_with(cfg, grid, &EvolveOptions::new(cfg, cadence))
}

pub fn evolve_with(cfg: &ModelConfig, grid: &Grid, opts: &EvolveOptions) -> Result<RunOutput> {
    Ok(evolve_state(cfg, grid, opts)?.0)
}

/// As [`evolve_with`], also returning the last state reached.
pub fn evolve_state(cfg: &ModelConfig, grid: &Grid, opts: &EvolveOptions) -> Result<(RunOutput, FieldState)> {
    if opts.cadence == 0 {
        return Err(invalid("cadence must be positive"));
    }
    let mut state = initialize(cfg, grid)?;
    let mut stepper = Stepper::new(cfg, grid)?;
    let dt = stepper.dt();
    let steps = if cfg.t_final > 0.0 { libm::round(cfg.t_final / dt) as usize } else { 0 };
    let mut out = RunOutput {
        grid: *grid,
        dt,
        t_final: cfg.t_final,
        records: Vec::new(),
        snapshots: Vec::new(),
        memory_profiles: Vec::new(),
        completed: false,
        failure: None,
    };
    let mut pending: Vec<f64> = opts.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    let record = |stepper: &mut Stepper, state: &FieldState, out: &mut RunOutput, force: bool, n: usize| {
        if force || n % opts.cadence == 0 {
            out.records.push(stepper.diagnostics(state));
            if state.t >= opts.memory_from - 0.5 * dt {
                out.memory_profiles.push((state.t, stepper.memory(state)));
            }
        }
    };
    let mut take_snapshots = |stepper: &mut Stepper, state: &FieldState, out: &mut RunOutput| {
        while let Some(&ts) = pending.first() {
            // ties between two steps go to the earlier one
            if state.t >= ts - 0.5 * dt * (1.0 + 1e-9) {
                out.snapshots.push(Snapshot::capture(stepper, state, ts));
                pending.remove(0);
            } else {
                break;
            }
        }
    };
    record(&mut stepper, &state, &mut out, true, 0);
    take_snapshots(&mut stepper, &state, &mut out);
    for n in 1..=steps {
        if let Err(e) = stepper.step(&mut state) {
            out.failure = Some(e);
            return Ok((out, state));
        }
        state.t = n as f64 * dt;
        record(&mut stepper, &state, &mut out, n == steps, n);
        take_snapshots(&mut stepper, &state, &mut out);
    }
    out.completed = true;
    Ok((out, state))
}

/// Advances `(V, V_t)` under the source-free wave equation with the same
/// stencil and Runge-Kutta step as the full solver.
pub fn discrete_free_wave(v: &[f64], v_dot: &[f64], dr: f64, dt: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let inv_h2 = 1.0 / (dr * dr);
    let accel = |x: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            out[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) * inv_h2;
        }
    };
    let (mut x, mut y) = (v.to_vec(), v_dot.to_vec());
    let mut ka = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let (mut sx, mut sy) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..steps {
        // k_v of each stage is the stage velocity, so only accelerations are stored
        accel(&x, &mut ka[0]);
        for i in 0..n {
            sx[i] = x[i] + 0.5 * dt * y[i];
        }
        accel(&sx, &mut ka[1]);
        let y2: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * dt * ka[0][i]).collect();
        for i in 0..n {
            sx[i] = x[i] + 0.5 * dt * y2[i];
        }
        accel(&sx, &mut ka[2]);
        let y3: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * dt * ka[1][i]).collect();
        for i in 0..n {
            sx[i] = x[i] + dt * y3[i];
        }
        accel(&sx, &mut ka[3]);
        for i in 0..n {
            sy[i] = y[i] + dt * ka[2][i];
        }
        for i in 0..n {
            x[i] += dt / 6.0 * (y[i] + 2.0 * y2[i] + 2.0 * y3[i] + sy[i]);
            y[i] += dt / 6.0 * (ka[0][i] + 2.0 * ka[1][i] + 2.0 * ka[2][i] + ka[3][i]);
        }
    }
    (x, y)
}

/// What the errors of a convergence study are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceReference {
    /// Differences between successive resolutions.
    SelfConvergence,
    /// The exact free-wave solution (only meaningful without sources).
    FreeWave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Sup-norm errors (or successive differences) at `t_final / 2`.
    pub errors: Vec<f64>,
    /// Order from the two finest error levels.
    pub observed_order: f64,
}

/// Order of accuracy from runs at `n_r, 2 n_r, ..` (`levels` resolutions),
/// comparing `u` at `t_final / 2` on the coarsest grid's points.
pub fn convergence_study(
    cfg: &ModelConfig,
    grid: &Grid,
    levels: usize,
    reference: ConvergenceReference,
) -> Result<ConvergenceReport> {
    let profiles = convergence_profiles(cfg, grid, levels)?;
    convergence_from_profiles(cfg, grid, &profiles, reference)
}

/// `u` at `t_final / 2` at each resolution, restricted to the coarse grid.
pub fn convergence_profiles(cfg: &ModelConfig, grid: &Grid, levels: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    if levels < 3 {
        return Err(invalid("a convergence study needs at least three levels"));
    }
    (0..levels).map(|l| half_time_profile(cfg, grid, l)).collect()
}

/// One level of a convergence study: `(t, u)` at `t_final / 2` on grid
/// `n_r 2^level`, sampled at the coarse points.
pub fn half_time_profile(cfg: &ModelConfig, grid: &Grid, level: usize) -> Result<(f64, Vec<f64>)> {
    cfg.validate(grid)?;
    let mut half = cfg.clone();
    half.t_final = 0.5 * cfg.t_final;
    let factor = 1usize << level;
    let fine = Grid::new(grid.r_max, grid.n_r * factor)?;
    let (run, state) = evolve_state(&half, &fine, &EvolveOptions { cadence: usize::MAX, snapshot_times: vec![], memory_from: f64::INFINITY })?;
    if let Some(e) = run.failure {
        return Err(e);
    }
    let u = unscale(state.v(), fine.dr());
    Ok((state.t, (0..=grid.n_r).map(|i| u[i * factor]).collect()))
}

pub fn convergence_from_profiles(
    cfg: &ModelConfig,
    grid: &Grid,
    profiles: &[(f64, Vec<f64>)],
    reference: ConvergenceReference,
) -> Result<ConvergenceReport> {
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max(fabs(x - y)));
    let errors: Vec<f64> = match reference {
        ConvergenceReference::SelfConvergence => profiles.windows(2).map(|w| sup(&w[0].1, &w[1].1)).collect(),
        ConvergenceReference::FreeWave => profiles
            .iter()
            .map(|(t, u)| {
                // origin excluded: there u is an extrapolation, not a grid value
                let exact: Vec<f64> = (1..u.len()).map(|i| free_wave_solution(cfg, *t, grid.r(i))).collect();
                sup(&u[1..], &exact)
            })
            .collect(),
    };
    if errors.windows(2).any(|w| !(w[1] < w[0])) || errors.iter().any(|e| !e.is_finite()) {
        return Err(Error::NotInAsymptoticRegime);
    }
    let k = errors.len();
    let observed_order = log(errors[k - 2] / errors[k - 1]) / core::f64::consts::LN_2;
    Ok(ConvergenceReport { errors, observed_order })
}
