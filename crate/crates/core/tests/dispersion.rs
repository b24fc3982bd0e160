use cetlab_core::dispersion::{mode_stability_scan, self_energy, solve_branch, DEFAULT_K_GRID};
use cetlab_core::spectral::SpectralDensity;

#[test]
fn self_energy_matches_brute_force_oracle() {
    let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
    let (omega, k) = (2.0f64, 1.0f64);
    let n = 1_000_000usize;
    let b = 60.0;
    let h = b / n as f64;
    let g = |mu: f64| mu * (-mu).exp() * k * k / (omega * omega - k * k + mu);
    let mut s = g(0.0) + g(b);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let oracle = s * h / 3.0;
    let v = self_energy(&rho, omega, k, 1e-12).unwrap();
    assert!((v - oracle).abs() <= 1e-9, "{v} vs {oracle}");
}

#[test]
fn self_energy_decreases_in_frequency() {
    let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
    let k = 1.3;
    let mut prev = f64::INFINITY;
    for i in 0..40 {
        let w = k + 0.05 + 0.1 * i as f64;
        let s = self_energy(&rho, w, k, 1e-12).unwrap();
        assert!(s >= 0.0 && s < prev);
        prev = s;
    }
}

#[test]
fn branch_is_self_consistent() {
    let rho = SpectralDensity::breit_wigner(1.0, 0.1, 1.0).unwrap();
    for &k in &[0.5, 1.0, 3.0] {
        let p = solve_branch(&rho, k, 1e-10).unwrap();
        let s = self_energy(&rho, p.omega, k, 1e-13).unwrap();
        assert!(p.omega >= k);
        assert!((p.omega * p.omega - k * k - s).abs() <= 1e-9, "{p:?}");
    }
}

#[test]
fn scans() {
    let t = std::time::Instant::now();
    let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
    let scan = mode_stability_scan(&rho, &DEFAULT_K_GRID, 1e-12).unwrap();
    println!("powerlaw max_im {} gaps {:?} {:?} in {:?}", scan.max_im, scan.gaps, scan.roots, t.elapsed());
    let comb = SpectralDensity::dirac_comb(&[(0.5, 1.0), (0.25, 4.0)]).unwrap();
    let scan = mode_stability_scan(&comb, &DEFAULT_K_GRID, 1e-12).unwrap();
    println!("comb max_im {} gaps {:?} {:?}", scan.max_im, scan.gaps, scan.roots);
}
