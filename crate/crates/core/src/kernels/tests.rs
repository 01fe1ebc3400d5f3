use super::*;
use crate::distributions::{builtin_models, RadialModel};
use crate::special::{erfc, normal_sf};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn kappa_and_lambda_values() {
    for d in 2..8 {
        assert!((kappa(d, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(kappa(d, 1.0).unwrap(), 0.0);
        assert_eq!(lambda_d(d, 0.0).unwrap(), 1.0);
    }
    assert!((kappa(3, 0.3).unwrap() - 0.35).abs() < 1e-14);
    assert!((kappa(2, 0.5).unwrap() - (0.5f64).acos() / std::f64::consts::PI).abs() < 1e-14);
    assert_eq!(lambda_d(2, 0.7).unwrap(), 1.0);
    assert_eq!(lambda_d(2, 1.0).unwrap(), 1.0);
    assert!((lambda_d(4, 0.6).unwrap() - 0.64).abs() < 1e-15);
    assert!(kappa(3, 1.2).is_err());
    assert!(lambda_d(3, -0.1).is_err());
}

#[test]
fn cap_angle_is_monotone() {
    for d in [2, 3, 5] {
        let mut prev = 0.0;
        for i in 1..=100 {
            let v = cap_angle(d, std::f64::consts::PI * i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
        assert!((cap_angle(d, std::f64::consts::FRAC_PI_2) - 0.5).abs() < 1e-15);
    }
}

#[test]
fn gaussian_marginal_is_standard_normal() {
    for d in [2, 3, 5] {
        let m = RadialModel::gaussian(d).unwrap();
        for x in [1e-3, 0.3, 1.0, 2.0, 4.0, 8.0] {
            let g = marginal_survival(&m, x, &cfg().relative_only()).unwrap().value;
            let exact = normal_sf(x);
            assert!(((g - exact) / exact).abs() < 1e-8, "d={d} x={x}: {g} vs {exact}");
        }
    }
    let m = RadialModel::gaussian(2).unwrap();
    assert!((marginal_survival(&m, 1.0, &cfg()).unwrap().value - 0.158655).abs() < 1e-6);
}

#[test]
fn t_and_ball_marginals() {
    let c = cfg().relative_only();
    for d in [2, 3, 4] {
        for k in [1.0, 3.0] {
            let m = RadialModel::student_t(k, d).unwrap();
            for x in [0.1, 1.0, 10.0, 1000.0] {
                let g = marginal_survival(&m, x, &c).unwrap().value;
                let exact = 0.5 * beta_reg(0.5 * k, 0.5, k / (k + x * x));
                assert!(((g - exact) / exact).abs() < 1e-8, "t d={d} k={k} x={x}");
            }
        }
        let m = RadialModel::uniform_ball(d).unwrap();
        for x in [0.1, 0.5, 0.9, 0.999] {
            let g = marginal_survival(&m, x, &c).unwrap().value;
            let exact = 0.5 * beta_reg(0.5 * (d as f64 + 1.0), 0.5, (1.0 - x) * (1.0 + x));
            assert!(((g - exact) / exact).abs() < 1e-8, "ball d={d} x={x}");
        }
    }
}

#[test]
fn pair_norm_closed_forms() {
    let c = cfg();
    for d in [2, 3, 4, 5] {
        let m = RadialModel::gaussian(d).unwrap();
        for i in 0..=50 {
            let x = 0.1 * i as f64;
            let k = pair_norm_survival(&m, x, &c).unwrap().value;
            assert!((k - (-0.5 * x * x).exp()).abs() < 1e-8, "d={d} x={x}");
        }
        let t = RadialModel::student_t(2.5, d).unwrap();
        let ball = RadialModel::uniform_ball(d).unwrap();
        let beta = RadialModel::beta_type(1.5, d).unwrap();
        for x in [0.05, 0.3, 0.7, 0.95] {
            let kt = pair_norm_survival(&t, 3.0 * x, &c).unwrap().value;
            assert!((kt - (1.0 + 9.0 * x * x / 2.5).powf(-1.25)).abs() < 1e-9);
            let kb = pair_norm_survival(&ball, x, &c).unwrap().value;
            assert!((kb - (1.0 - x * x).powf(0.5 * d as f64)).abs() < 1e-9);
            let kq = pair_norm_survival(&beta, x, &c).unwrap().value;
            assert!((kq - (1.0 - x * x).powf(1.5 + 0.5 * d as f64)).abs() < 1e-9);
        }
    }
    let disk = RadialModel::uniform_ball(2).unwrap();
    assert!((pair_norm_survival(&disk, 0.5, &c).unwrap().value - 0.75).abs() < 1e-15);
}

#[test]
fn gaussian_plane_distance_is_erfc() {
    // (2/pi) int_0^{pi/2} exp(-d x^2 / (2 cos^2)) = erfc(x sqrt(d/2))
    let c = cfg().relative_only();
    for d in [2, 3, 4] {
        let m = RadialModel::gaussian(d).unwrap();
        for x in [0.01, 0.5, 1.0, 2.0, 3.5] {
            let h = plane_distance_survival(&m, x, &c).unwrap().value;
            let exact = erfc(x * (0.5 * d as f64).sqrt());
            assert!(((h - exact) / exact).abs() < 1e-8, "d={d} x={x}: {h} vs {exact}");
        }
    }
}

fn h_two_dim_oracle(m: &RadialModel, x: f64) -> f64 {
    // (2/pi) int_x arccos(x/y) d(F^2), cosine map on bounded support, y = x / t beyond.
    let c = QuadratureConfig::default().with_rel_tol(1e-12);
    let f = |y: f64| (x / y).acos() * 2.0 * m.survival(y) * m.density(y);
    let v = if m.is_bounded() {
        let s = m.support_upper();
        integrate(
            |t| {
                let y = x + (s - x) * 0.5 * (1.0 - (std::f64::consts::PI * t).cos());
                f(y) * (s - x) * 0.5 * std::f64::consts::PI * (std::f64::consts::PI * t).sin()
            },
            0.0,
            1.0,
            &c,
        )
        .value
    } else {
        integrate(f, x, 2.0 * x + 1.0, &c).value
            + integrate(|t| if t == 0.0 { 0.0 } else { f((2.0 * x + 1.0) / t) * (2.0 * x + 1.0) / (t * t) }, 0.0, 1.0, &c).value
    };
    std::f64::consts::FRAC_2_PI * v
}

#[test]
fn plane_distance_two_dim_reduction() {
    for m in builtin_models(2).unwrap() {
        for x in [0.05, 0.4, 0.8] {
            let h = plane_distance_survival(&m, x, &cfg().with_rel_tol(1e-11)).unwrap().value;
            let o = h_two_dim_oracle(&m, x);
            assert!((h - o).abs() < 1e-8, "{m:?} x={x}: {h} vs {o}");
        }
    }
}

#[test]
fn plane_distance_without_substitution_agrees() {
    let m = RadialModel::student_t(3.0, 3).unwrap();
    let plain = QuadratureConfig { singularity_substitution: false, ..cfg() };
    for x in [0.2, 1.5] {
        let a = plane_distance_survival(&m, x, &cfg()).unwrap().value;
        let b = plane_distance_survival(&m, x, &plain).unwrap().value;
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
}

#[test]
fn pair_plane_reductions() {
    let c = cfg();
    let g3 = RadialModel::gaussian(3).unwrap();
    let f0 = pair_plane_survival(&g3, 0.7, &c).unwrap().value;
    assert!((f0 - (-0.49f64).exp()).abs() < 1e-8, "{f0}");

    // d = 2: the line is the hyperplane, and the nested arccos form agrees.
    let disk = RadialModel::uniform_ball(2).unwrap();
    let x = 0.5;
    let f0 = pair_plane_survival(&disk, x, &c.with_rel_tol(1e-11)).unwrap().value;
    let h = plane_distance_survival(&disk, x, &c.with_rel_tol(1e-11)).unwrap().value;
    assert!((f0 - h).abs() < 1e-8, "{f0} vs {h}");
    let tight = QuadratureConfig::default().with_rel_tol(1e-12);
    let nested = integrate(
        |y| {
            let inner = integrate(|z| (x / z).acos() * disk.density(z), x, y, &tight).value;
            disk.density(y) * inner
        },
        x,
        1.0,
        &tight,
    )
    .value
        * 4.0
        / std::f64::consts::PI;
    assert!((f0 - nested).abs() < 1e-8, "{f0} vs {nested}");
}

#[test]
fn f0_integrand_geometry() {
    let (x, y, z) = (0.4, 2.0, 1.1);
    let f = F0Integrand::new(x, y, z).unwrap();
    assert!(f.a1 > 0.0 && f.a2 < 0.0);
    assert!((f.a1 / z - (f.theta2 - f.theta1).cos()).abs() < 1e-14);
    assert!((f.a2 / z - (f.theta2 + f.theta1).cos()).abs() < 1e-14);
    // c_4 int_{a2/z}^{a1/z} (1 - u^2)^{1/2} du with c_4 = 2 / pi
    let direct = integrate(|u| (1.0 - u * u).sqrt(), f.a2 / z, f.a1 / z, &cfg().with_rel_tol(1e-13)).value
        * std::f64::consts::FRAC_2_PI;
    assert!((direct - f.band(4)).abs() < 1e-12, "{direct} vs {}", f.band(4));
    assert!(F0Integrand::new(1.0, 0.5, 0.7).is_err());
}

#[test]
fn pair_plane_weight_is_lambda_product() {
    let c = cfg().with_rel_tol(1e-11);
    for d in [2, 3, 4, 5, 7] {
        for (x, y, z) in [(0.3, 1.0, 0.5), (1.0, 3.0, 2.9), (0.01, 10.0, 0.02), (0.5, 0.6, 0.6)] {
            let j = pair_plane_weight(d, x, y, z, &c).unwrap().value;
            let expect = lambda_d(d, x / y).unwrap() * lambda_d(d, x / z).unwrap();
            assert!((j - expect).abs() < 1e-9 * expect.max(1e-3), "d={d} {x},{y},{z}: {j} vs {expect}");
        }
    }
}

#[test]
fn pair_plane_identity_spot_checks() {
    let c = cfg().with_rel_tol(1e-8);
    for (m, x) in [
        (RadialModel::gaussian(3).unwrap(), 0.8),
        (RadialModel::uniform_ball(2).unwrap(), 0.4),
        (RadialModel::student_t(3.0, 4).unwrap(), 1.3),
    ] {
        let lhs = pair_plane_identity_lhs(&m, x, &c).unwrap().value;
        let k = pair_norm_survival(&m, x, &c).unwrap().value;
        assert!((lhs - k * k).abs() < 1e-6, "{m:?}: {lhs} vs {}", k * k);
    }
}

#[test]
fn h_function_values() {
    assert!((h_closed_form(0, 0.6).unwrap() - std::f64::consts::PI / 0.8).abs() < 1e-12);
    assert!((h_closed_form(1, 0.5).unwrap() - 4.0 / 3.0).abs() < 1e-12);
    assert!((h_quadrature(0, 0.6, &cfg()).unwrap() - 3.926991).abs() < 1e-6);
    assert!((h_quadrature(1, 0.5, &cfg()).unwrap() - 1.333333).abs() < 1e-6);
    for n in 0..=8 {
        for i in 1..=9 {
            let c = i as f64 / 10.0;
            let a = h_closed_form(n, c).unwrap();
            let b = h_quadrature(n, c, &cfg().with_rel_tol(1e-12)).unwrap();
            assert!(((a - b) / a).abs() < 1e-8, "n={n} c={c}");
        }
    }
    assert!(h_closed_form(2, 1.0).is_err());
    assert!(h_quadrature(2, 0.0, &cfg()).is_err());
    let plain = QuadratureConfig { singularity_substitution: false, ..cfg() };
    assert!(((h_quadrature(3, 0.4, &plain).unwrap() - h_closed_form(3, 0.4).unwrap()) / h_closed_form(3, 0.4).unwrap()).abs() < 1e-8);
}

#[test]
fn kernels_boundaries_and_monotone() {
    let c = cfg();
    for d in [2, 3] {
        for m in builtin_models(d).unwrap() {
            assert_eq!(marginal_survival(&m, 0.0, &c).unwrap().value, 0.5);
            for kind in [KernelKind::K, KernelKind::H, KernelKind::F0] {
                assert_eq!(evaluate(kind, &m, 0.0, &c).unwrap().value, 1.0);
            }
            let top = if m.is_bounded() { m.support_upper() } else { 6.0 * m.median_radius() };
            for kind in [KernelKind::G, KernelKind::K, KernelKind::H] {
                let mut prev = f64::INFINITY;
                for i in 0..=30 {
                    let v = evaluate(kind, &m, top * i as f64 / 30.0, &c).unwrap();
                    assert!(v.value <= prev + v.abs_error_estimate + 1e-12, "{kind} {m:?} i={i}");
                    assert!(v.value >= -v.abs_error_estimate && v.value <= 1.0 + v.abs_error_estimate);
                    prev = v.value;
                }
                if m.is_bounded() {
                    assert_eq!(evaluate(kind, &m, top, &c).unwrap().value, 0.0);
                }
            }
        }
    }
    assert!(marginal_survival(&RadialModel::gaussian(2).unwrap(), -1.0, &c).is_err());
}

#[test]
fn edge_asymptotics_of_ball() {
    use crate::expectation::{coefficient_a, coefficient_b};
    let ball = RadialModel::uniform_ball(3).unwrap();
    let xt: f64 = 1e-3;
    let g = marginal_survival(&ball, 1.0 - xt, &cfg().relative_only()).unwrap().value;
    let approx = coefficient_a(1.0, 3) * 3.0 * xt.powf(2.0);
    assert!((g / approx - 1.0).abs() < 0.05, "{g} vs {approx}");
    let disk = RadialModel::uniform_ball(2).unwrap();
    let h = plane_distance_survival(&disk, 1.0 - xt, &cfg().relative_only()).unwrap().value;
    let approx = coefficient_b(1.0, 2) * 4.0 * xt.powf(2.5);
    assert!((h / approx - 1.0).abs() < 0.05, "{h} vs {approx}");
}
