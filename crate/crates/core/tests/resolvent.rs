use cetlab_core::quadrature::build_quadrature;
use cetlab_core::resolvent::*;
use cetlab_core::spectral::{spectral_constants, SpectralDensity};

fn bump(t: f64, center: f64, half_width: f64) -> f64 {
    let x = (t - center) / half_width;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - x * x).powi(4)
    }
}

/// RK4 on the cascade `y1'' + y1 = f`, `y2'' + y2 = y1` with the source
/// evaluated in closed form at every stage.
fn cascade_reference(f: impl Fn(f64) -> f64, h: f64, steps: usize, every: usize) -> Vec<f64> {
    let rhs = |t: f64, y: [f64; 4]| [y[1], f(t) - y[0], y[3], y[0] - y[2]];
    let mut y = [0.0; 4];
    let mut out = vec![0.0];
    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = rhs(t, y);
        let add = |a: [f64; 4], k: [f64; 4], c: f64| [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2], a[3] + c * k[3]];
        let k2 = rhs(t + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = rhs(t + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = rhs(t + h, add(y, k3, h));
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (n + 1) % every == 0 {
            out.push(y[2]);
        }
    }
    out
}

#[test]
fn double_resolvent_matches_cascade() {
    let rho = SpectralDensity::dirac_comb(&[(1.0, 1.0)]).unwrap();
    let quad = build_quadrature(&rho, 32, 1e-10).unwrap();
    let dt = 0.01;
    let n = 2001;
    let src = |t: f64| bump(t, 1.0, 0.25);
    let f = TimeSeries::sample(0.0, dt, n, src).unwrap();
    let out = apply_memory2(&quad, 0.0, &f).unwrap();
    let reference = cascade_reference(src, dt / 10.0, (n - 1) * 10, 10);
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = out.samples.iter().zip(&reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err <= 1e-6 * scale, "err {err} scale {scale}");
}

#[test]
fn double_resolvent_growth_bound() {
    let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
    let consts = spectral_constants(&rho, 1e-10).unwrap();
    let quad = build_quadrature(&rho, 32, 1e-10).unwrap();
    let f = TimeSeries::sample(0.0, 0.01, 3001, |t| bump(t, 2.0, 1.0)).unwrap();
    let out = apply_memory2(&quad, 0.0, &f).unwrap();
    let horizon = 30.0;
    assert!(out.sup_norm() <= consts.c_p1 * f.l1_norm() * horizon);
    let zero = TimeSeries::new(0.0, 0.01, vec![0.0; 50]).unwrap();
    assert!(apply_memory2(&quad, 0.0, &zero).unwrap().samples.iter().all(|v| *v == 0.0));
}

#[test]
fn memory_sup_bounds() {
    let f = TimeSeries::sample(0.0, 0.01, 4001, |t| bump(t, 3.0, 2.0) - 0.5 * bump(t, 8.0, 1.0)).unwrap();
    // every node has omega >= 1, where the l1 form of the bound applies
    let comb = SpectralDensity::dirac_comb(&[(0.5, 1.0), (0.3, 2.5), (0.2, 9.0)]).unwrap();
    let quad = build_quadrature(&comb, 32, 1e-10).unwrap();
    let l1 = spectral_constants(&comb, 1e-10).unwrap().l1;
    assert!(apply_memory(&quad, 0.0, &f).unwrap().sup_norm() <= l1 * f.l1_norm());
    // general form: sum_j w_j / omega_j, which is c_mhalf at xi = 0
    let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
    let quad = build_quadrature(&rho, 32, 1e-10).unwrap();
    let c_mhalf = spectral_constants(&rho, 1e-10).unwrap().c_mhalf;
    assert!(apply_memory(&quad, 0.0, &f).unwrap().sup_norm() <= c_mhalf * f.l1_norm() * (1.0 + 1e-3));
}

#[test]
fn commutator_converges_at_second_order_or_better() {
    let mut signs = Vec::new();
    for mu in [0.5, 1.0, 2.0] {
        let mut residuals = Vec::new();
        for dt in [0.04, 0.02, 0.01] {
            let n = (12.0 / dt) as usize + 1;
            let f = TimeSeries::sample(0.0, dt, n, |t| bump(t, 4.0, 2.0)).unwrap();
            let r = commutator_residual(mu, &f, dt).unwrap();
            signs.push(r.sign);
            residuals.push(r.residual);
        }
        for w in residuals.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 2.0, "mu {mu}: {residuals:?}");
        }
    }
    for center in [3.0, 5.0, 7.0] {
        let f = TimeSeries::sample(0.0, 0.01, 1201, |t| bump(t, center, 1.5)).unwrap();
        signs.push(commutator_residual(1.0, &f, 0.01).unwrap().sign);
    }
    assert!(signs.iter().all(|s| *s == signs[0]), "{signs:?}");
}
