use cetlab_core::spectral::{spectral_constants, SpectralDensity};

fn lorentzian(alpha: f64, gamma: f64, mu0: f64, mu: f64) -> f64 {
    alpha * gamma / ((mu - mu0) * (mu - mu0) + gamma * gamma)
}

/// `int rho / sqrt(mu)` as `2 int rho(s^2) ds` by Simpson on [0, 100] plus
/// the Lorentzian tail `alpha gamma int mu^(-5/2)` beyond.
#[test]
fn breit_wigner_inverse_root_moment_against_simpson() {
    let (alpha, gamma, mu0) = (1.0, 0.1, 1.0);
    let rho = SpectralDensity::breit_wigner(alpha, gamma, mu0).unwrap();
    let c = spectral_constants(&rho, 1e-10).unwrap();
    let (top, n) = (100.0f64, 2_000_000usize);
    let h = top / n as f64;
    let g = |s: f64| 2.0 * lorentzian(alpha, gamma, mu0, s * s);
    let mut sum = g(0.0) + g(top);
    for i in 1..n {
        sum += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let tail = alpha * gamma * 2.0 / 3.0 * top.powi(-3);
    let oracle = sum * h / 3.0 + tail;
    assert!(((c.c_mhalf - oracle) / oracle).abs() < 1e-8, "{} vs {oracle}", c.c_mhalf);
}

#[test]
fn breit_wigner_mass_against_simpson() {
    let rho = SpectralDensity::breit_wigner(2.0, 0.3, 1.5).unwrap();
    let c = spectral_constants(&rho, 1e-10).unwrap();
    let (top, n) = (1e4f64, 4_000_000usize);
    let h = top / n as f64;
    let g = |m: f64| lorentzian(2.0, 0.3, 1.5, m);
    let mut sum = g(0.0) + g(top);
    for i in 1..n {
        sum += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let tail = 2.0 * 0.3 / (top - 1.5);
    let oracle = sum * h / 3.0 + tail;
    assert!(((c.l1 - oracle) / oracle).abs() < 1e-8, "{} vs {oracle}", c.l1);
}
