use cetlab_core::averaging::{
    averaged_symbol, decay_bound_check, envelope_ratio, DEFAULT_SLACK, DEFAULT_T_GRID, DEFAULT_XI_GRID,
};
use cetlab_core::spectral::{spectral_constants, SpectralDensity, DEFAULT_TOL};

fn default_rho() -> SpectralDensity {
    SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap()
}

/// Composite Simpson over mu in (0, 60] with 10^6 panels, directly in the
/// original variable (no substitution).
fn brute_force(t: f64, xi: f64) -> f64 {
    let n = 1_000_000usize;
    let b = 60.0;
    let h = b / n as f64;
    let g = |mu: f64| {
        let w = (xi * xi + mu).sqrt();
        mu * (-mu).exp() * (t * w).sin() / w
    };
    let mut s = g(b);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn symbol_matches_brute_force_oracle() {
    let v = averaged_symbol(&default_rho(), 20.0, 1.0, 1e-10).unwrap();
    let oracle = brute_force(20.0, 1.0);
    assert!((v - oracle).abs() <= 1e-8, "{v} vs {oracle}");
}

#[test]
fn default_grid_report() {
    let rho = default_rho();
    let c = spectral_constants(&rho, DEFAULT_TOL).unwrap();
    let rep = decay_bound_check(&rho, &c, &DEFAULT_T_GRID, &DEFAULT_XI_GRID, DEFAULT_SLACK).unwrap();
    assert!((rep.bound_constant - 2.0 / std::f64::consts::E).abs() < 1e-14);
    println!("worst {} exponent {} r2 {}", rep.worst_ratio, rep.fitted_exponent, rep.fit_r_squared);
    println!("sups {:?}", rep.sup_over_xi());
    assert!(rep.within(DEFAULT_SLACK));
    assert!(rep.envelope_holds);
    // the t = 200 supremum is at most half the t = 100 one, with 20% slack
    let sups = rep.sup_over_xi();
    assert!(sups[7] <= 0.5 * sups[6] * 1.2);
}

#[test]
fn single_atom_shows_no_decay() {
    let rho = SpectralDensity::dirac_comb(&[(1.0, 1.0)]).unwrap();
    let r = envelope_ratio(&rho, 0.0, 100.0, 900.0, 100.0, 4001, 1e-10).unwrap();
    assert!(r >= 0.5);
}
