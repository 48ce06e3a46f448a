//! Property tests on structural invariants of the propagators, norms and quadrature.

use halfline_nls::line::free_propagate;
use halfline_nls::nls::power_map;
use halfline_nls::quadrature::{filon_cubic, filon_linear};
use halfline_nls::sobolev::*;
use proptest::prelude::*;

fn line_grid() -> Grid1D {
    Grid1D::half_line(16.0, 257).unwrap().symmetric_extension().unwrap()
}

/// Modulated Gaussian `a e^{-(x-c)²/w²} e^{ikx}`, well resolved on `line_grid`.
fn packet(a: f64, c: f64, w: f64, k: f64) -> GridFunction {
    GridFunction::from_fn(line_grid(), |x| {
        let r = (x - c) / w;
        C64::from_polar(a * (-r * r).exp(), k * x)
    })
}

fn packet_strategy() -> impl Strategy<Value = GridFunction> {
    (0.1..2.0f64, -3.0..3.0f64, 0.7..2.0f64, -3.0..3.0f64).prop_map(|(a, c, w, k)| packet(a, c, w, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn free_evolution_is_unitary(u in packet_strategy(), t in 0.0..0.5f64) {
        let v = free_propagate(&u, t).unwrap();
        prop_assert!((v.periodic_l2_norm() - u.periodic_l2_norm()).abs() < 1e-12 * u.periodic_l2_norm().max(1.0));
    }

    #[test]
    fn free_evolution_is_a_group(u in packet_strategy(), t1 in 0.0..0.3f64, t2 in 0.0..0.3f64) {
        let a = free_propagate(&free_propagate(&u, t1).unwrap(), t2).unwrap();
        let b = free_propagate(&u, t1 + t2).unwrap();
        prop_assert!(a.sub(&b).max_abs() < 1e-12);
    }

    #[test]
    fn backward_evolution_undoes_forward(u in packet_strategy(), t in 0.0..0.5f64) {
        let back = free_propagate(&free_propagate(&u, t).unwrap(), -t).unwrap();
        prop_assert!(back.sub(&u).max_abs() < 1e-12);
    }

    #[test]
    fn sobolev_norm_is_monotone_in_s(u in packet_strategy(), s in 0.0..2.5f64, ds in 0.05..1.0f64) {
        let lo = sobolev_norm_line(&u, SobolevIndex::new(s).unwrap()).unwrap();
        let hi = sobolev_norm_line(&u, SobolevIndex::new(s + ds).unwrap()).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-12));
    }

    #[test]
    fn sobolev_norm_is_invariant_under_free_evolution(u in packet_strategy(), s in 0.0..2.0f64, t in 0.0..0.5f64) {
        let s = SobolevIndex::new(s).unwrap();
        let before = sobolev_norm_line(&u, s).unwrap();
        let after = sobolev_norm_line(&free_propagate(&u, t).unwrap(), s).unwrap();
        prop_assert!((after - before).abs() < 1e-10 * before);
    }

    #[test]
    fn extensions_agree_with_the_data_on_the_half_line(a in 0.1..2.0f64, w in 0.5..2.0f64, hestenes in any::<bool>()) {
        let half = Grid1D::half_line(16.0, 257).unwrap();
        let u0 = GridFunction::from_fn(half, |x| C64::new(a * (-(x / w) * (x / w)).exp(), 0.0));
        let rule = if hestenes { ReflectionRule::Hestenes } else { ReflectionRule::Even };
        let ext = extend_initial_data_with(&u0, rule).unwrap();
        let origin = half.n() - 1;
        for i in 0..half.n() - 1 {
            prop_assert_eq!(ext.values()[origin + i], u0.values()[i]);
        }
    }

    #[test]
    fn hestenes_coefficients_match_polynomials(c0 in -1.0..1.0f64, c1 in -1.0..1.0f64, c2 in -1.0..1.0f64, c3 in -1.0..1.0f64) {
        // a cubic reflected by the four-term rule is the same cubic
        let p = |x: f64| c0 + x * (c1 + x * (c2 + x * c3));
        let n = 65;
        let dx = 0.01;
        let samples: Vec<C64> = (0..n).map(|i| C64::new(p(i as f64 * dx), 0.0)).collect();
        let ext = extend_half_line(&samples, ReflectionRule::Hestenes);
        for i in 1..=(n - 1) / 4 {
            prop_assert!((ext[n - 1 - i].re - p(-(i as f64) * dx)).abs() < 1e-11);
        }
    }

    #[test]
    fn filon_rules_are_linear(vals in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6..20), omega in -50.0..50.0f64, c in -2.0..2.0f64) {
        let a: Vec<C64> = vals.iter().map(|&(r, i)| C64::new(r, i)).collect();
        let scaled: Vec<C64> = a.iter().map(|v| v * c).collect();
        for rule in [filon_linear, filon_cubic] {
            let lhs = rule(&scaled, 0.0, 0.05, omega);
            let rhs = rule(&a, 0.0, 0.05, omega) * c;
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn filon_cubic_is_exact_on_cubics(c in prop::array::uniform4(-1.0..1.0f64), omega in -80.0..80.0f64) {
        let p = |t: f64| c[0] + t * (c[1] + t * (c[2] + t * c[3]));
        let dt = 0.1;
        let samples: Vec<C64> = (0..=10).map(|k| C64::new(p(k as f64 * dt), 0.0)).collect();
        let got = filon_cubic(&samples, 0.0, dt, omega);
        // reference by dense Gauss-Legendre on the smooth integrand
        let (x, w) = halfline_nls::quadrature::gauss_legendre(64);
        let mut reference = C64::new(0.0, 0.0);
        for k in 0..20 {
            let (lo, hi) = (k as f64 * 0.05, (k + 1) as f64 * 0.05);
            for (xi, wi) in x.iter().zip(&w) {
                let t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi;
                reference += C64::from_polar(p(t), omega * t) * (0.5 * (hi - lo) * wi);
            }
        }
        prop_assert!((got - reference).norm() < 1e-11, "{} vs {}", got, reference);
    }

    #[test]
    fn power_map_is_gauge_covariant(r in 0.0..2.0f64, phase in 0.0..6.28f64, p in 1.0..4.0f64, k in -2.0..2.0f64) {
        // f(e^{iθ}u) = e^{iθ} f(u), |f(u)| = |k||u|^{p+1}
        let u = C64::new(r, 0.0);
        let rot = C64::from_polar(1.0, phase);
        let a = power_map(u * rot, p, k);
        prop_assert!((a - power_map(u, p, k) * rot).norm() < 1e-12);
        prop_assert!((a.norm() - k.abs() * r.powf(p + 1.0)).abs() < 1e-12 * (1.0 + r.powf(p + 1.0)));
    }
}
