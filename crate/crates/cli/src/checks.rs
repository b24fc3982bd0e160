//! Property checks of the memory operator on single-mode test beds.

use cetlab_core::quadrature::MassQuadrature;
use cetlab_core::resolvent::{
    apply_memory, apply_memory2, commutator_residual, duhamel_ratio, mass_weighted_bound_check, positivity_functional,
    ModeParams, TimeSeries,
};
use cetlab_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LINEARITY_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-12;
pub const BOUND_SLACK: f64 = 0.02;
pub const COMMUTATOR_MIN_ORDER: f64 = 2.0;
pub const COMMUTATOR_MASSES: [f64; 3] = [0.5, 1.0, 2.0];
pub const COMMUTATOR_STEPS: [f64; 3] = [0.04, 0.02, 0.01];

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantity.
    pub value: f64,
    /// What it is compared against.
    pub limit: f64,
    pub detail: String,
}

/// `sin^4` bump supported in `[t0, t0 + width]`.
pub fn bump(t: f64, t0: f64, width: f64) -> f64 {
    let x = (t - t0) / width;
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (std::f64::consts::PI * x).sin().powi(4)
    }
}

/// Base source and its memory images, for trace output.
pub struct Trace {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub kf: Vec<f64>,
    pub k2f: Vec<f64>,
}

pub struct MemoryBed {
    pub xi: f64,
    pub dt: f64,
    pub samples: usize,
    pub seeds: usize,
}

impl MemoryBed {
    fn horizon(&self) -> f64 {
        (self.samples - 1) as f64 * self.dt
    }

    fn base_source(&self) -> Result<TimeSeries> {
        let h = self.horizon();
        TimeSeries::sample(0.0, self.dt, self.samples, |t| bump(t, 0.1 * h, 0.15 * h))
    }
}

pub fn memory_trace(quad: &MassQuadrature, bed: &MemoryBed) -> Result<Trace> {
    let f = bed.base_source()?;
    let kf = apply_memory(quad, bed.xi, &f)?;
    let k2f = apply_memory2(quad, bed.xi, &f)?;
    Ok(Trace { t: (0..f.len()).map(|i| f.time(i)).collect(), f: f.samples, kf: kf.samples, k2f: k2f.samples })
}

pub fn causality(quad: &MassQuadrature, bed: &MemoryBed) -> Result<Verdict> {
    let f = bed.base_source()?;
    let first = f.samples.iter().position(|v| *v != 0.0).unwrap_or(f.len());
    let kf = apply_memory(quad, bed.xi, &f)?;
    let k2f = apply_memory2(quad, bed.xi, &f)?;
    let leaks = kf.samples[..first].iter().chain(&k2f.samples[..first]).filter(|v| **v != 0.0).count();
    Ok(Verdict {
        name: "causality",
        passed: leaks == 0,
        value: leaks as f64,
        limit: 0.0,
        detail: format!("nonzero samples before the source support ({first} samples checked)"),
    })
}

pub fn linearity(quad: &MassQuadrature, bed: &MemoryBed) -> Result<Verdict> {
    let h = bed.horizon();
    let f = bed.base_source()?;
    let g = TimeSeries::sample(0.0, bed.dt, bed.samples, |t| bump(t, 0.15 * h, 0.1 * h) * (3.0 * t).cos())?;
    let (a, b) = (0.7, -1.3);
    let combo = TimeSeries::new(0.0, bed.dt, f.samples.iter().zip(&g.samples).map(|(x, y)| a * x + b * y).collect())?;
    let kf = apply_memory(quad, bed.xi, &f)?;
    let kg = apply_memory(quad, bed.xi, &g)?;
    let kc = apply_memory(quad, bed.xi, &combo)?;
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..kc.len() {
        let expect = a * kf.samples[i] + b * kg.samples[i];
        diff = diff.max((kc.samples[i] - expect).abs());
        scale = scale.max(expect.abs());
    }
    let rel = if scale > 0.0 { diff / scale } else { diff };
    Ok(Verdict {
        name: "linearity",
        passed: rel <= LINEARITY_TOL,
        value: rel,
        limit: LINEARITY_TOL,
        detail: String::from("relative sup mismatch of K(a f + b g) against a K f + b K g"),
    })
}

pub fn positivity(quad: &MassQuadrature, bed: &MemoryBed) -> Result<Verdict> {
    let h = bed.horizon();
    let mut worst = f64::INFINITY;
    for seed in 0..bed.seeds as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parts: Vec<(f64, f64, f64)> = (0..4)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..0.5 * h), rng.gen_range(0.025 * h..0.15 * h)))
            .collect();
        let f = TimeSeries::sample(0.0, bed.dt, bed.samples, |t| parts.iter().map(|(c, s, w)| c * bump(t, *s, *w)).sum())?;
        let l1 = f.l1_norm();
        if l1 == 0.0 {
            continue;
        }
        worst = worst.min(positivity_functional(quad, bed.xi, &f)? / (l1 * l1));
    }
    Ok(Verdict {
        name: "positivity",
        passed: worst >= -POSITIVITY_TOL,
        value: worst,
        limit: -POSITIVITY_TOL,
        detail: format!("minimum of the functional over (int |f|)^2 across {} seeded sources", bed.seeds),
    })
}

pub fn duhamel(quad: &MassQuadrature, bed: &MemoryBed) -> Result<Verdict> {
    let f = bed.base_source()?;
    let mut worst = 0.0f64;
    for &mu in &quad.nodes {
        worst = worst.max(duhamel_ratio(ModeParams::new(mu, bed.xi)?, &f)?);
    }
    let limit = 1.0 + BOUND_SLACK;
    Ok(Verdict {
        name: "duhamel",
        passed: worst <= limit,
        value: worst,
        limit,
        detail: String::from("max over mass nodes of omega sup|R f| / int|f|"),
    })
}

pub fn mass_weighted(quad: &MassQuadrature, bed: &MemoryBed) -> Result<Verdict> {
    let f = bed.base_source()?;
    let mut worst = 0.0f64;
    let mut bound = std::f64::consts::SQRT_2;
    for &mu in &quad.nodes {
        let r = mass_weighted_bound_check(mu, &f, BOUND_SLACK)?;
        worst = worst.max(r.ratio);
        bound = r.bound;
    }
    let limit = bound * (1.0 + BOUND_SLACK);
    Ok(Verdict {
        name: "mass-weighted",
        passed: worst <= limit,
        value: worst,
        limit,
        detail: String::from("max over mass nodes of sqrt(mu) sup|R f| / int|f| at xi = 0"),
    })
}

fn commutator_bump(t: f64) -> f64 {
    let x = (t - 4.0) / 2.0;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - x * x).powi(4)
    }
}

/// Observed order of the commutator residual under step halving and the
/// sign that fits, for each test mass.
pub fn commutator() -> Result<Verdict> {
    let mut min_order = f64::INFINITY;
    let mut signs = Vec::new();
    let mut rows = Vec::new();
    for mu in COMMUTATOR_MASSES {
        let mut residuals = Vec::new();
        for dt in COMMUTATOR_STEPS {
            let n = (12.0 / dt).round() as usize + 1;
            let f = TimeSeries::sample(0.0, dt, n, commutator_bump)?;
            let r = commutator_residual(mu, &f, dt)?;
            signs.push(r.sign);
            residuals.push(r.residual);
        }
        for w in residuals.windows(2) {
            min_order = min_order.min((w[0] / w[1]).log2());
        }
        let shown: Vec<String> = residuals.iter().map(|r| format!("{r:.3e}")).collect();
        rows.push(format!("mu {mu}: {}", shown.join(", ")));
    }
    let consistent = signs.iter().all(|s| *s == signs[0]);
    Ok(Verdict {
        name: "commutator",
        passed: min_order >= COMMUTATOR_MIN_ORDER && consistent,
        value: min_order,
        limit: COMMUTATOR_MIN_ORDER,
        detail: format!("sign {} consistent {consistent}; {}", signs[0], rows.join("; ")),
    })
}

pub fn all_memory_checks(quad: &MassQuadrature, bed: &MemoryBed) -> Result<Vec<Verdict>> {
    Ok(vec![
        causality(quad, bed)?,
        linearity(quad, bed)?,
        positivity(quad, bed)?,
        duhamel(quad, bed)?,
        mass_weighted(quad, bed)?,
        commutator()?,
    ])
}
