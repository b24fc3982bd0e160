use cetlab_core::averaging::averaged_symbol;
use cetlab_core::dispersion::self_energy;
use cetlab_core::pheno::{phase_shift, tail_crossing};
use cetlab_core::quadrature::build_quadrature;
use cetlab_core::resolvent::{apply_memory, duhamel_ratio, positivity_functional, ModeParams, TimeSeries};
use cetlab_core::spectral::{eval_density, gamma, numeric_constants, spectral_constants, SpectralDensity};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn density() -> impl Strategy<Value = SpectralDensity> {
    prop_oneof![
        (0.1f64..5.0, 0.1f64..3.0, 0.2f64..4.0).prop_map(|(a, b, l)| SpectralDensity::power_law_exp(a, b, l).unwrap()),
        (0.1f64..5.0, 0.05f64..1.0, 1.5f64..5.0).prop_map(|(a, g, m)| SpectralDensity::breit_wigner(a, g, m).unwrap()),
        prop::collection::vec((0.01f64..2.0, 0.01f64..3.0), 1..5).prop_map(|steps| {
            // masses as running sums of positive gaps, so they ascend
            let atoms: Vec<(f64, f64)> = steps
                .iter()
                .scan(0.0, |m, (w, gap)| {
                    *m += gap;
                    Some((*w, *m))
                })
                .collect();
            SpectralDensity::dirac_comb(&atoms).unwrap()
        }),
    ]
}

/// Smooth bump supported in `[t0, t0 + width]`.
fn bump(t: f64, t0: f64, width: f64) -> f64 {
    let x = (t - t0) / width;
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (std::f64::consts::PI * x).sin().powi(4)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn numeric_constants_match_closed_forms(a in 0.2f64..4.0, b in 0.3f64..3.0, l in 0.3f64..3.0) {
        let rho = SpectralDensity::power_law_exp(a, b, l).unwrap();
        let tol = 1e-10;
        let exact = spectral_constants(&rho, tol).unwrap();
        let num = numeric_constants(&rho, tol).unwrap();
        prop_assert!(rel(num.l1, exact.l1) <= 10.0 * tol);
        prop_assert!(rel(num.c_m1, exact.c_m1) <= 10.0 * tol);
        prop_assert!(rel(num.c_p1, exact.c_p1) <= 10.0 * tol);
        prop_assert!(rel(num.c_mhalf, exact.c_mhalf) <= 10.0 * tol);
        prop_assert!(rel(num.c_prime.unwrap(), exact.c_prime.unwrap()) <= 10.0 * tol);
    }

    #[test]
    fn constants_are_linear_in_amplitude(rho in density(), c in 0.01f64..100.0) {
        let base = spectral_constants(&rho, 1e-10).unwrap();
        let scaled = spectral_constants(&rho.scaled(c), 1e-10).unwrap();
        let pairs = [
            (base.l1, scaled.l1),
            (base.c_m1, scaled.c_m1),
            (base.c_p1, scaled.c_p1),
            (base.c_mhalf, scaled.c_mhalf),
            (base.c_prime.unwrap_or(0.0), scaled.c_prime.unwrap_or(0.0)),
        ];
        for (b, s) in pairs {
            if b.is_finite() {
                prop_assert!(rel(s, c * b) <= 1e-12, "{} vs {}", s, c * b);
            } else {
                prop_assert!(s.is_infinite());
            }
        }
    }

    #[test]
    fn cauchy_schwarz(rho in density()) {
        let k = spectral_constants(&rho, 1e-10).unwrap();
        if k.c_m1.is_finite() {
            prop_assert!(k.c_mhalf * k.c_mhalf <= k.c_m1 * k.l1 * (1.0 + 1e-10));
        }
    }

    #[test]
    fn gauss_rules_are_exact_for_polynomials(a in 0.2f64..3.0, b in 0.3f64..3.0, l in 0.5f64..2.0, n in 2usize..33) {
        let rho = SpectralDensity::power_law_exp(a, b, l).unwrap();
        let q = build_quadrature(&rho, n, 1e-10).unwrap();
        prop_assert!(q.weights.iter().all(|w| *w > 0.0));
        for p in 0..2 * n {
            let exact = a * l.powf(b + p as f64 + 1.0) * gamma(b + p as f64 + 1.0);
            prop_assert!(rel(q.moment(p as f64), exact) <= 1e-12, "n {} p {}: {} vs {}", n, p, q.moment(p as f64), exact);
        }
    }

    #[test]
    fn inverse_moment_error_never_grows(b in 1.0f64..3.0, l in 0.5f64..2.0) {
        let rho = SpectralDensity::power_law_exp(1.0, b, l).unwrap();
        let exact = l.powf(b) * gamma(b);
        let mut prev = f64::INFINITY;
        for n in [4usize, 8, 16, 32, 64] {
            let err = rel(build_quadrature(&rho, n, 1e-10).unwrap().moment(-1.0), exact);
            prop_assert!(err <= prev);
            prev = err;
        }
    }

    #[test]
    fn memory_is_linear_and_causal(
        a in -3.0f64..3.0, b in -3.0f64..3.0, t0 in 1.0f64..4.0, xi in 0.0f64..2.0, seed in 0u64..1000
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (w1, w2) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        let quad = build_quadrature(&rho, 16, 1e-10).unwrap();
        let dt = 0.01;
        let f = TimeSeries::sample(0.0, dt, 1000, |t| bump(t, t0, w1)).unwrap();
        let g = TimeSeries::sample(0.0, dt, 1000, |t| bump(t, t0 + 0.5, w2) * (3.0 * t).cos()).unwrap();
        let h = TimeSeries::sample(0.0, dt, 1000, |t| a * bump(t, t0, w1) + b * bump(t, t0 + 0.5, w2) * (3.0 * t).cos()).unwrap();
        let (rf, rg, rh) = (apply_memory(&quad, xi, &f).unwrap(), apply_memory(&quad, xi, &g).unwrap(), apply_memory(&quad, xi, &h).unwrap());
        let scale = rh.sup_norm().max(a.abs() * rf.sup_norm() + b.abs() * rg.sup_norm());
        for i in 0..rh.len() {
            prop_assert!((rh.samples[i] - (a * rf.samples[i] + b * rg.samples[i])).abs() <= 1e-12 * scale);
            if f.time(i) <= t0 {
                prop_assert!(rf.samples[i] == 0.0);
            }
        }
    }

    #[test]
    fn positivity_functional_nonnegative(seed in 0u64..10_000, xi in 0.0f64..2.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        let quad = build_quadrature(&rho, 16, 1e-10).unwrap();
        let amps: Vec<(f64, f64, f64)> = (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.0), rng.gen_range(0.5..3.0))).collect();
        let f = TimeSeries::sample(0.0, 0.01, 1000, |t| amps.iter().map(|(c, s, w)| c * bump(t, *s, *w)).sum()).unwrap();
        let l1 = f.l1_norm();
        prop_assert!(positivity_functional(&quad, xi, &f).unwrap() >= -1e-12 * l1 * l1);
    }

    #[test]
    fn duhamel_bound_is_uniform(mu in 0.05f64..20.0, xi in 0.0f64..3.0, t0 in 0.0f64..3.0, w in 0.5f64..4.0) {
        let f = TimeSeries::sample(0.0, 0.005, 2400, |t| bump(t, t0, w)).unwrap();
        let ratio = duhamel_ratio(ModeParams::new(mu, xi).unwrap(), &f).unwrap();
        prop_assert!(ratio <= 1.0 + 1e-3, "{}", ratio);
    }

    #[test]
    fn averaged_symbol_is_even_in_xi(t in 1.0f64..50.0, xi in 0.0f64..4.0) {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        prop_assert_eq!(averaged_symbol(&rho, t, xi, 1e-10).unwrap(), averaged_symbol(&rho, t, -xi, 1e-10).unwrap());
    }

    #[test]
    fn self_energy_nonnegative_above_light_cone(k in 0.05f64..5.0, gap in 0.0f64..5.0) {
        let rho = SpectralDensity::power_law_exp(1.0, 1.0, 1.0).unwrap();
        prop_assert!(self_energy(&rho, k + gap, k, 1e-10).unwrap() >= 0.0);
    }

    #[test]
    fn densities_are_nonnegative(a in 0.01f64..10.0, b in 0.0f64..4.0, l in 0.1f64..10.0, g in 0.01f64..1.0, m in 1.1f64..10.0) {
        let families = [
            SpectralDensity::power_law_exp(a, b, l).unwrap(),
            SpectralDensity::breit_wigner(a, g, m * g).unwrap(),
        ];
        for rho in &families {
            for i in 0..10_000 {
                let mu = 10f64.powf(-8.0 + 12.0 * i as f64 / 9_999.0);
                prop_assert!(eval_density(rho, mu).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn pheno_homogeneity(d in 1e-3f64..1e6, w in 1e-3f64..1e4, l1 in 1e-20f64..1e3, c in 1e-3f64..1e3) {
        prop_assert!(rel(phase_shift(c * d, w, l1).unwrap(), c * phase_shift(d, w, l1).unwrap()) <= 1e-15);
        prop_assert!(rel(tail_crossing(c * l1).unwrap(), c.powf(-1.0 / 6.0) * tail_crossing(l1).unwrap()) <= 1e-14);
    }
}
