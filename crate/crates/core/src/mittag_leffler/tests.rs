use super::*;
use crate::fractional::LowerTerm;
use rug::ops::Pow;
use rug::Float;

const PREC: u32 = 320;

/// Brute force `Σ_{l_1+l_2 ≤ deg}` in extended precision with one Gamma call per term.
fn brute_force_two(a: [f64; 2], b: f64, z: [f64; 2], deg: u32) -> f64 {
    let mut sum = Float::with_val(PREC, 0);
    for l1 in 0..=deg {
        for l2 in 0..=(deg - l1) {
            let mut binom = Float::with_val(PREC, 1);
            for j in 1..=l2 {
                binom *= l1 + j;
                binom /= j;
            }
            let x = Float::with_val(PREC, b) + Float::with_val(PREC, a[0]) * l1 + Float::with_val(PREC, a[1]) * l2;
            let p1 = Float::with_val(PREC, z[0]).pow(l1);
            let p2 = Float::with_val(PREC, z[1]).pow(l2);
            sum += binom * p1 * p2 / x.gamma();
        }
    }
    sum.to_f64()
}

fn brute_force_one(a: f64, b: f64, z: f64, deg: u32) -> f64 {
    let mut sum = Float::with_val(PREC, 0);
    for k in 0..=deg {
        let x = Float::with_val(PREC, b) + Float::with_val(PREC, a) * k;
        sum += Float::with_val(PREC, z).pow(k) / x.gamma();
    }
    sum.to_f64()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn exponential() {
    let p = MLParams::new(vec![1.0], 1.0, vec![1.0]).unwrap();
    let v = ml_multinomial(&p, 1e-14).unwrap();
    assert!(rel(v.value, std::f64::consts::E) < 1e-14);
    assert!(v.tail_estimate <= 1e-14);
    for i in 0..=20 {
        let z = -5.0 + 0.5 * i as f64;
        let p = MLParams::new(vec![1.0], 1.0, vec![z]).unwrap();
        assert!(rel(ml_multinomial(&p, 1e-15).unwrap().value, z.exp()) < 1e-12, "z={z}");
    }
}

#[test]
fn zero_arguments() {
    let p = MLParams::new(vec![0.4, 1.3, 2.0], 2.5, vec![0.0; 3]).unwrap();
    let v = ml_multinomial(&p, 1e-14).unwrap();
    assert!(rel(v.value, 1.0 / crate::specfun::gamma(2.5).unwrap()) < 1e-15);
}

#[test]
fn two_argument_brute_force() {
    let p = MLParams::new(vec![0.7, 1.5], 1.5, vec![0.3, -2.0]).unwrap();
    let v = ml_multinomial(&p, 1e-15).unwrap();
    let oracle = brute_force_two([0.7, 1.5], 1.5, [0.3, -2.0], 400);
    assert!(rel(v.value, oracle) < 1e-11, "{} vs {}", v.value, oracle);
}

#[test]
fn two_param_classical_values() {
    for t in [0.5, 1.0, 2.0_f64] {
        let v = ml_two_param(2.0, 1.0, -t * t, 1e-15).unwrap();
        assert!((v - t.cos()).abs() < 1e-12);
    }
    let v = ml_two_param(1.0, 2.0, 1.0, 1e-15).unwrap();
    assert!(rel(v, std::f64::consts::E - 1.0) < 1e-14);
    let v = ml_two_param(0.5, 1.0, -1.0, 1e-15).unwrap();
    assert!(rel(v, brute_force_one(0.5, 1.0, -1.0, 400)) < 1e-13);
}

#[test]
fn large_negative_argument_uses_extended_precision() {
    // E_{2,1}(−γ²) = cos γ
    let p = MLParams::new(vec![2.0], 1.0, vec![-1600.0]).unwrap();
    let v = ml_multinomial(&p, 1e-15).unwrap();
    assert!(v.precision_bits > 53);
    assert!((v.value - 40f64.cos()).abs() < 1e-12);
    let w = ml_two_param(2.0, 1.0, -1600.0, 1e-15).unwrap();
    assert!((w - 40f64.cos()).abs() < 1e-12);
}

#[test]
fn small_exponent_reduction() {
    let a = ml_two_param(0.3, 2.3, -10.0, 1e-15).unwrap();
    let p = MLParams::new(vec![0.3], 2.3, vec![-10.0]).unwrap();
    let b = ml_multinomial(&p, 1e-15).unwrap().value;
    assert!(rel(b, a) < 1e-12, "{a} {b}");
}

#[test]
fn reduction_grid_small() {
    for a in [0.8, 1.0, 1.7] {
        for b in [0.5, 1.0, 2.3] {
            for z in [-3.0, -1.0, 0.0, 1.0, 3.0] {
                let two = ml_two_param(a, b, z, 1e-15).unwrap();
                let p = MLParams::new(vec![a], b, vec![z]).unwrap();
                let multi = ml_multinomial(&p, 1e-15).unwrap().value;
                assert!(rel(multi, two) < 1e-12, "a={a} b={b} z={z}");
            }
        }
    }
}

#[test]
fn permutation_symmetry() {
    let a = [0.6, 1.2, 1.9];
    let z = [0.4, -1.1, -2.5];
    let base = MLParams::new(a.to_vec(), 1.3, z.to_vec()).unwrap();
    let v0 = ml_multinomial(&base, 1e-15).unwrap().value;
    for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
        let p = MLParams::new(perm.iter().map(|&i| a[i]).collect(), 1.3, perm.iter().map(|&i| z[i]).collect()).unwrap();
        assert!(rel(ml_multinomial(&p, 1e-15).unwrap().value, v0) < 1e-13);
    }
}

#[test]
fn liu_identity_fixed_cases() {
    let cases: [(f64, Vec<(f64, f64)>, f64, f64); 3] = [
        (1.4, vec![(0.8, 0.5), (-0.3, 0.9)], 9.0, 1.3),
        (0.9, vec![(1.2, 0.4)], 25.0, 0.8),
        (2.0, vec![(-2.0, 1.0), (0.5, 0.3), (1.0, 0.7)], 60.0, 1.9),
    ];
    for (alpha, lt, g2, t) in cases {
        let terms: Vec<LowerTerm> = lt.iter().map(|&(lambda, order)| LowerTerm { lambda, order }).collect();
        let op = TimeOperator::new(alpha, terms.clone()).unwrap();
        let mut lhs = 1.0;
        for term in &terms {
            let rho = 1.0 + alpha - term.order;
            lhs += term.lambda * t.powf(alpha - term.order) * operator_ml(&op, g2, t, rho, 1e-15).unwrap().value;
        }
        lhs += -g2 * t.powf(alpha) * operator_ml(&op, g2, t, 1.0 + alpha, 1e-15).unwrap().value;
        let rhs = u0_bar(&op, g2, t).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "alpha={alpha}: {lhs} vs {rhs}");
    }
}

#[test]
fn u0_bar_cases() {
    let op = TimeOperator::leading_only(2.0).unwrap();
    for g in [1.0, 5.0, 20.0_f64] {
        for i in 0..=8 {
            let t = 0.25 * i as f64;
            assert!((u0_bar(&op, g * g, t).unwrap() - (g * t).cos()).abs() < 1e-10);
        }
    }
    let op = TimeOperator::new(1.0, vec![LowerTerm { lambda: -1.0, order: 0.5 }]).unwrap();
    assert_eq!(u0_bar(&op, 4.0, 0.0).unwrap(), 1.0);
    let p = MLParams::new(vec![0.5, 1.0], 1.0, vec![-(0.7f64.sqrt()), -4.0 * 0.7]).unwrap();
    let direct = ml_multinomial(&p, DEFAULT_TOL).unwrap().value;
    let oracle = brute_force_two([0.5, 1.0], 1.0, [-(0.7f64.sqrt()), -2.8], 400);
    assert!(rel(u0_bar(&op, 4.0, 0.7).unwrap(), direct) < 1e-14);
    assert!(rel(direct, oracle) < 1e-12);
}

#[test]
fn homogeneous_response_drops_the_lower_order_sum() {
    let op = TimeOperator::leading_only(2.0).unwrap();
    assert!((homogeneous_response(&op, 25.0, 0.9).unwrap() - 4.5f64.cos()).abs() < 1e-12);
    let op =
        TimeOperator::new(1.3, vec![LowerTerm { lambda: 0.8, order: 0.6 }, LowerTerm { lambda: -1.5, order: 0.2 }])
            .unwrap();
    let (g2, t) = (12.0, 0.8f64);
    let mut gap = 0.0;
    for term in op.terms() {
        let e = 1.3 - term.order;
        gap += term.lambda * t.powf(e) * operator_ml(&op, g2, t, 1.0 + e, 1e-15).unwrap().value;
    }
    let h = homogeneous_response(&op, g2, t).unwrap();
    assert!((u0_bar(&op, g2, t).unwrap() - h - gap).abs() < 1e-12);
    assert_eq!(homogeneous_response(&op, g2, 0.0).unwrap(), 1.0);
}

#[test]
fn rejects_bad_parameters() {
    assert!(MLParams::new(vec![], 1.0, vec![]).is_err());
    assert!(MLParams::new(vec![1.0], 1.0, vec![1.0, 2.0]).is_err());
    assert!(MLParams::new(vec![0.0], 1.0, vec![1.0]).is_err());
    assert!(MLParams::new(vec![1.0], -1.0, vec![1.0]).is_err());
    let p = MLParams::new(vec![1.0], 1.0, vec![1.0]).unwrap();
    assert!(ml_multinomial(&p, 1e-17).is_err());
    assert!(ml_two_param(-1.0, 1.0, 1.0, 1e-14).is_err());
    let op = TimeOperator::leading_only(1.0).unwrap();
    assert!(u0_bar(&op, 0.0, 1.0).is_err());
    assert!(u0_bar(&op, 1.0, -1.0).is_err());
}

#[test]
fn out_of_envelope_is_reported() {
    let p = MLParams::new(vec![0.1], 1.0, vec![-200.0]).unwrap();
    assert!(matches!(ml_multinomial(&p, 1e-14), Err(Error::MlNonConvergence { .. })));
}
