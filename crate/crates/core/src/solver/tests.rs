use super::*;
use crate::fourier_bessel::{SpaceProfile, TimeProfile};
use crate::fractional::LowerTerm;
use crate::mittag_leffler::operator_ml;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn nu(v: f64) -> BesselOrder {
    BesselOrder::new(v).unwrap()
}

fn ones(t_end: f64, n: usize) -> SampledFunction {
    SampledFunction::from_fn(t_end, n, |_| 1.0).unwrap()
}

/// `∫_0^t z^{α−1} E_{…,α} dz = t^α E_{…,α+1}`.
fn step_response(op: &TimeOperator, g2: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t.powf(op.alpha()) * operator_ml(op, g2, t, op.alpha() + 1.0, 1e-15).unwrap().value
}

#[test]
fn flipped_basis_matches_direct_evaluation() {
    for nodes in &STENCILS {
        for q in 0..4 {
            let c = lagrange_flipped(nodes, q);
            for v in [0.0, 0.3, 1.0] {
                let poly = c[0] + v * (c[1] + v * (c[2] + v * c[3]));
                assert!((poly - lagrange(nodes, q, 1.0 - v)).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn convolution_examples() {
    let op = TimeOperator::new(1.4, vec![LowerTerm { lambda: -0.7, order: 0.5 }]).unwrap();
    let zero = SampledFunction::from_fn(1.0, 64, |_| 0.0).unwrap();
    assert_eq!(mode_convolution(&op, 3.0, &zero, 0.7).unwrap(), 0.0);
    let one = ones(1.0, 64);
    assert_eq!(mode_convolution(&op, 3.0, &one, 0.0).unwrap(), 0.0);
    assert!(mode_convolution(&op, 3.0, &one, 1.5).is_err());
    for alpha in [0.4, 1.0, 1.7, 2.0] {
        let op = TimeOperator::leading_only(alpha).unwrap();
        for g in [2.0, 9.0f64] {
            for t in [0.3, 1.0] {
                let got = mode_convolution(&op, g, &one, t).unwrap();
                let want = step_response(&op, g * g, t);
                assert!((got - want).abs() < 1e-8 * want.abs(), "alpha={alpha} g={g} t={t}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn grid_convolution_matches_closed_forms() {
    let cases = [
        TimeOperator::leading_only(0.3).unwrap(),
        TimeOperator::leading_only(0.9).unwrap(),
        TimeOperator::leading_only(1.5).unwrap(),
        TimeOperator::leading_only(2.0).unwrap(),
        TimeOperator::new(1.2, vec![LowerTerm { lambda: 0.6, order: 0.9 }, LowerTerm { lambda: -2.0, order: 0.3 }])
            .unwrap(),
    ];
    for op in &cases {
        for g in [3.0, 80.0, 220.0f64] {
            let f = ones(1.3, 128);
            let kernel = OperatorKernel::new(op, g * g, op.alpha(), 1.3).unwrap();
            let got = grid_convolution(&kernel, &f).unwrap();
            let scale = got.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for j in [1, 2, 7, 64, 128] {
                let want = step_response(op, g * g, f.t(j));
                assert!(
                    (got[j] - want).abs() < 1e-10 * scale,
                    "alpha={} g={g} j={j}: {} vs {want}",
                    op.alpha(),
                    got[j]
                );
            }
        }
    }
}

#[test]
fn grid_convolution_agrees_with_jacobi_rule() {
    let op = TimeOperator::new(0.7, vec![LowerTerm { lambda: -0.5, order: 0.35 }]).unwrap();
    let f = SampledFunction::from_fn(2.0, 64, |t| (3.0 * t).sin() + t * t).unwrap();
    let g = 5.0;
    let kernel = OperatorKernel::new(&op, g * g, 0.7, 2.0).unwrap();
    let grid = grid_convolution(&kernel, &f).unwrap();
    for j in [1, 5, 33, 64] {
        let gj = mode_convolution(&op, g, &f, f.t(j)).unwrap();
        assert!((grid[j] - gj).abs() < 1e-8 * gj.abs().max(1e-3), "j={j}: {} vs {gj}", grid[j]);
    }
}

#[test]
fn wave_mode_is_duhamel_integral() {
    let op = TimeOperator::leading_only(2.0).unwrap();
    let g = 40.0f64;
    let w = 3.0f64;
    let f = SampledFunction::from_fn(1.0, 512, |t| (w * t).cos()).unwrap();
    let mode = solve_mode(&op, 1, g, &f, 0.0, 1.0).unwrap();
    assert_eq!(mode.amplitude, 0.0);
    for j in (0..=512).step_by(37) {
        let t = f.t(j);
        let want = ((w * t).cos() - (g * t).cos()) / (g * g - w * w);
        assert!((mode.u_k.values()[j] - want).abs() < 1e-9 * 1.0 / (g * g), "t={t}");
    }
}

#[test]
fn nonresonance_examples() {
    let zeros = bessel_zeros(nu(1.0), 6).unwrap();
    let op = TimeOperator::new(1.5, vec![LowerTerm { lambda: -1.0, order: 0.5 }]).unwrap();
    let r = nonresonance_check(&op, 0.0, 1.0, &zeros).unwrap();
    assert!(r.margins.iter().all(|m| m.margin == 1.0));

    let u0 = homogeneous_response(&op, zeros.gamma(1).powi(2), 1.0).unwrap();
    let m = -1.0 / u0;
    match nonresonance_check(&op, m, 1.0, &zeros) {
        Err(Error::Resonance { modes }) => {
            assert_eq!(modes.len(), 1);
            assert_eq!(modes[0].k, 1);
            assert!((modes[0].forbidden_m - m).abs() < 1e-12 * m.abs());
        }
        other => panic!("expected resonance, got {other:?}"),
    }
    assert!(nonresonance_check(&op, m * (1.0 + 1e-3), 1.0, &zeros).is_ok());

    // cos(γ_1 T) = 0
    let wave = TimeOperator::leading_only(2.0).unwrap();
    let t_end = std::f64::consts::FRAC_PI_2 / zeros.gamma(1);
    let r = nonresonance_check(&wave, 2.5, t_end, &zeros).unwrap();
    assert!(r.margins[0].u0_at_t.abs() < 1e-12);
    assert!(r.margins[0].forbidden_m.abs() > 1e11);
    assert!((r.margins[0].margin - 1.0).abs() < 1e-11);
}

#[test]
fn single_ml_response_is_selectable() {
    let zeros = bessel_zeros(nu(1.0), 2).unwrap();
    let op = TimeOperator::new(0.8, vec![LowerTerm { lambda: -0.5, order: 0.4 }]).unwrap();
    let r = nonresonance_check_with(&op, 0.5, 1.0, &zeros, MARGIN_TOL, Response::SingleMl).unwrap();
    let want = u0_bar(&op, zeros.gamma(1).powi(2), 1.0).unwrap();
    assert_eq!(r.margins[0].u0_at_t, want);
    assert_eq!(Response::default(), Response::Caputo);
}

#[test]
fn mode_trivial_cases() {
    let op = TimeOperator::new(0.6, vec![LowerTerm { lambda: 1.0, order: 0.2 }]).unwrap();
    let f = SampledFunction::from_fn(1.0, 64, |t| 1.0 + t).unwrap();
    let free = solve_mode(&op, 1, 4.0, &f, 0.0, 1.0).unwrap();
    assert_eq!(free.amplitude, 0.0);
    assert_eq!(free.u_k.values(), free.forced.values());

    let zero = SampledFunction::from_fn(1.0, 64, |_| 0.0).unwrap();
    let quiet = solve_mode(&op, 1, 4.0, &zero, 0.7, 1.0).unwrap();
    assert_eq!(quiet.amplitude, 0.0);
    assert!(quiet.u_k.values().iter().all(|v| *v == 0.0));

    assert!(solve_mode(&op, 1, 4.0, &f, 0.0, 2.0).is_err());
    let u0 = homogeneous_response(&op, 16.0, 1.0).unwrap();
    assert!(matches!(solve_mode(&op, 1, 4.0, &f, -1.0 / u0, 1.0), Err(Error::Resonance { .. })));
}

#[test]
fn nonlocal_identity_for_random_modes() {
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..12 {
        let alpha: f64 = rng.random_range(0.2..2.0);
        let n = rng.random_range(0..=2);
        let terms = (0..n)
            .map(|_| LowerTerm {
                lambda: rng.random_range(-2.0..2.0),
                order: rng.random_range(0.05..alpha.min(1.0) * 0.95),
            })
            .collect();
        let op = TimeOperator::new(alpha, terms).unwrap();
        let t_end = rng.random_range(0.3..2.0);
        let g = rng.random_range(2.0..60.0);
        let m = rng.random_range(-3.0..3.0);
        let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(0.5..4.0));
        let f = SampledFunction::from_fn(t_end, 128, |t| a + (b * t).sin()).unwrap();
        let mode = solve_mode(&op, 1, g, &f, m, t_end).unwrap();
        let u = mode.u_k.values();
        let scale = mode.u_k.max_abs().max(mode.forced.max_abs());
        assert!((u[0] + m * u[128]).abs() <= 1e-9 * scale, "alpha={alpha} m={m}");
        assert!((u[0] - mode.amplitude).abs() <= 1e-12 * scale);
    }
}

#[test]
fn wave_residual_converges() {
    let op = TimeOperator::leading_only(2.0).unwrap();
    let g = 7.0f64;
    let mut res = Vec::new();
    for n in [256, 512, 1024] {
        let mode = solve_mode(&op, 1, g, &ones(1.0, n), 0.0, 1.0).unwrap();
        for j in (0..=n).step_by(n / 8) {
            let want = (1.0 - (g * mode.u_k.t(j)).cos()) / (g * g);
            assert!((mode.u_k.values()[j] - want).abs() < 1e-12);
        }
        res.push(verify_mode(&op, &mode, 1e-2).observed);
    }
    let order = (res[0] / res[2]).log2() / 2.0;
    assert!(order > 1.5, "residuals {res:?}");
}

#[test]
fn fractional_residual_sits_at_the_origin() {
    let op = TimeOperator::new(0.8, vec![LowerTerm { lambda: -0.5, order: 0.4 }]).unwrap();
    let g = bessel_zeros(nu(1.0), 1).unwrap().gamma(1);
    let mut late = Vec::new();
    for n in [256, 1024] {
        let f = SampledFunction::from_fn(1.0, n, |t| 1.0 + t).unwrap();
        let mode = solve_mode(&op, 1, g, &f, 0.5, 1.0).unwrap();
        let r = verify_mode(&op, &mode, 1e-2);
        assert_eq!(r.worst_node, 1, "{r:?}");
        let profile = mode_residual_profile(&op, &mode).unwrap();
        late.push(profile[n / 4..].iter().fold(0.0f64, |a, v| a.max(v.abs())));

        let published = solve_mode_with(&op, 1, g, &f, 0.5, 1.0, MARGIN_TOL, Response::SingleMl).unwrap();
        let p = mode_residual_profile(&op, &published).unwrap();
        let p_late = p[n / 4..].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(p_late > 100.0 * late.last().unwrap(), "{p_late} vs {late:?}");
    }
    assert!(late[1] < 1e-4 && late[1] < late[0] / 4.0, "{late:?}");

    let zero = SampledFunction::from_fn(1.0, 256, |_| 0.0).unwrap();
    let quiet = solve_mode(&op, 1, 3.0, &zero, 0.0, 1.0).unwrap();
    assert_eq!(verify_mode(&op, &quiet, 1e-12).observed, 0.0);
    let coarse = solve_mode(&op, 1, 3.0, &ones(1.0, 64), 0.0, 1.0).unwrap();
    assert!(verify_mode(&op, &coarse, 1.0).observed.is_nan());
}

fn spec(op: TimeOperator, nu_v: f64, m: f64, source: SourceFunction, modes: usize, n: usize) -> ProblemSpec {
    ProblemSpec {
        nu: nu(nu_v),
        op,
        m,
        t_end: 1.0,
        source,
        modes,
        t_intervals: n,
        x_grid: (1..=20).map(|i| i as f64 / 20.0).collect(),
    }
}

fn quick() -> SolveOptions {
    SolveOptions { pde_probe: false, ..SolveOptions::default() }
}

#[test]
fn zero_source_gives_zero_field() {
    let s = spec(TimeOperator::leading_only(0.5).unwrap(), 1.0, 0.3, SourceFunction::zero(), 8, 64);
    let g = assemble_with(&s, &quick()).unwrap();
    assert!(g.values.iter().all(|v| *v == 0.0));
    assert_eq!(g.diagnostics.nonlocal_defect, 0.0);
    assert!(g.checks_passed());
}

#[test]
fn single_mode_source() {
    let zeros = bessel_zeros(nu(1.5), 2).unwrap();
    let space = SpaceProfile::BesselMode { nu: nu(1.5), gamma: zeros.gamma(2) };
    let src =
        SourceFunction::separable(TimeProfile::Sine { amplitude: 1.0, omega: 2.0, phase: 0.3 }, space, false).unwrap();
    let op = TimeOperator::new(0.9, vec![LowerTerm { lambda: -0.4, order: 0.5 }]).unwrap();
    let g = assemble(&spec(op.clone(), 1.5, 0.8, src, 8, 256)).unwrap();
    let peak = g.modes[1].max_abs();
    assert!(peak > 0.0);
    for mode in g.modes.iter().filter(|m| m.k != 2) {
        assert!(mode.max_abs() < 1e-10 * peak, "mode {}", mode.k);
    }
    assert!(g.diagnostics.boundary_defect <= 1e-12 * g.diagnostics.max_abs_u);
    let profile = mode_residual_profile(&op, &g.modes[1]).unwrap();
    let late = profile[64..].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(late < 1e-3, "{late}");
    let pde = g.diagnostics.pde_residual.as_ref().unwrap();
    assert!(pde.passed, "{pde:?}");
    assert!(g.diagnostics.nonlocal_passed() && g.diagnostics.boundary_passed());
}

#[test]
fn linear_in_the_source() {
    let op = TimeOperator::new(0.9, vec![LowerTerm { lambda: 0.5, order: 0.3 }]).unwrap();
    let a = SourceFunction::separable(TimeProfile::Constant(1.0), SpaceProfile::PowerBump { p: 4.0, q: 3.0 }, true)
        .unwrap();
    let b = SourceFunction::separable(
        TimeProfile::Exp { amplitude: 2.0, rate: -1.0 },
        SpaceProfile::Polynomial(vec![0.0, 0.0, 1.0, -1.0]),
        false,
    )
    .unwrap();
    let sum = SourceFunction::Sum(vec![(1.0, a.clone()), (-3.0, b.clone())]);
    let ga = assemble_with(&spec(op.clone(), 2.0, -0.6, a, 12, 64), &quick()).unwrap();
    let gb = assemble_with(&spec(op.clone(), 2.0, -0.6, b, 12, 64), &quick()).unwrap();
    let gs = assemble_with(&spec(op, 2.0, -0.6, sum, 12, 64), &quick()).unwrap();
    let scale = gs.diagnostics.max_abs_u;
    for ((x, y), z) in ga.values.iter().zip(&gb.values).zip(&gs.values) {
        assert!((x - 3.0 * y - z).abs() < 1e-13 * scale);
    }
}

#[test]
fn classical_wave_limit() {
    let op = TimeOperator::leading_only(2.0).unwrap();
    let src = SourceFunction::separable(
        TimeProfile::Polynomial(vec![1.0, 0.0, -1.0]),
        SpaceProfile::PowerBump { p: 4.0, q: 3.0 },
        true,
    )
    .unwrap();
    let g = assemble_with(&spec(op, 1.0, 0.0, src, 16, 128), &quick()).unwrap();
    for mode in &g.modes {
        for j in [16, 77, 128] {
            let t = mode.u_k.t(j);
            let rule = GaussRule::legendre(200).unwrap();
            let want = rule.integrate(0.0, t, |z| (mode.gamma * z).sin() / mode.gamma * mode.f_k.interpolate(t - z));
            let scale = mode.f_k.max_abs() / mode.gamma.powi(2);
            assert!((mode.u_k.values()[j] - want).abs() <= 1e-7 * scale.max(1e-300), "k={} t={t}", mode.k);
        }
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let op = TimeOperator::new(1.6, vec![LowerTerm { lambda: -1.0, order: 0.8 }]).unwrap();
    let src = SourceFunction::separable(
        TimeProfile::Sine { amplitude: 1.0, omega: 5.0, phase: 0.0 },
        SpaceProfile::PowerBump { p: 4.0, q: 3.0 },
        true,
    )
    .unwrap();
    let s = spec(op, 0.5, 1.2, src, 10, 64);
    let one = assemble_with(&s, &quick()).unwrap();
    let four = assemble_with(&s, &SolveOptions { threads: 4, ..quick() }).unwrap();
    assert_eq!(one.values, four.values);
}

#[test]
fn decay_of_compliant_modes() {
    let op = TimeOperator::new(1.5, vec![LowerTerm { lambda: -0.5, order: 0.5 }]).unwrap();
    let src = SourceFunction::separable(TimeProfile::Constant(1.0), SpaceProfile::PowerBump { p: 4.0, q: 3.0 }, true)
        .unwrap();
    let g = assemble_with(&spec(op, 1.0, 0.5, src, 32, 64), &quick()).unwrap();
    let fit = g.diagnostics.tail.fitted_exponent.unwrap();
    assert!(fit <= -1.3, "fitted {fit}");
    // |U_k| γ_k^p stays bounded: no growth from the first half of k ≥ 5 to the second
    for p in [1.5, 3.0] {
        let w: Vec<f64> = g.modes[4..].iter().map(|m| m.max_abs() * m.gamma.powf(p)).collect();
        let half = w.len() / 2;
        let early = w[..half].iter().fold(0.0f64, |a, v| a.max(*v));
        let late = w[half..].iter().fold(0.0f64, |a, v| a.max(*v));
        assert!(late <= early, "p={p}: {w:?}");
    }
}

#[test]
fn rejects_bad_specs() {
    let op = TimeOperator::leading_only(1.0).unwrap();
    let mut s = spec(op, 1.0, 0.0, SourceFunction::zero(), 8, 64);
    s.modes = 90;
    assert!(matches!(assemble(&s), Err(Error::InvalidProblem(_))));
    s.modes = 8;
    s.x_grid = vec![0.0];
    assert!(matches!(assemble(&s), Err(Error::InvalidProblem(_))));
    s.x_grid = vec![0.5];
    s.t_end = -1.0;
    assert!(matches!(assemble(&s), Err(Error::InvalidProblem(_))));
}
