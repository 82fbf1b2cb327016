use super::*;
use crate::boundary::{make_atom, AtomExpansion, Profile};
use crate::kernels::KernelEvaluator;
use crate::numerics::GaussLegendre;

fn cfg(rel: f64) -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: rel,
        ..Default::default()
    }
}

fn unit_atom() -> crate::boundary::Atom {
    make_atom(1.0, vec![0.0, 0.0], 0.0, 0.5, 2.0, Profile::Poly3).unwrap()
}

fn source(atom: crate::boundary::Atom, dir: usize) -> TangentialSource {
    TangentialSource::from_atoms(&AtomExpansion::single(atom, dir)).unwrap()
}

fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= rel * scale)
}

#[test]
fn zero_data_gives_zero() {
    let s = Solver::new(cfg(1e-8)).unwrap();
    let src = TangentialSource::zero(3);
    let pt = SpaceTimePoint::new(vec![0.1, 0.2], 0.5, 1.0);
    let v = s.evaluate(&src, &pt, DerivOrder::new(1, 1, 0)).unwrap();
    assert!(v.iter().all(|x| *x == 0.0));
    let r = s.residual_check(&src, &pt, 0.05).unwrap();
    assert_eq!(r.momentum_norm(), 0.0);
    assert!(s
        .trace_recovery(&src, &[0.0, 0.0], 1.0, &[0.2, 0.1])
        .unwrap()
        .iter()
        .all(|t| t.tangential == 0.0 && t.normal == 0.0));
}

#[test]
fn matches_direct_kernel_quadrature() {
    // After the pulse the space-time integrand is smooth, so a tensor
    // Gauss rule over the atom support converges fast.
    let atom = make_atom(0.5, vec![0.2, -0.1], 0.0, 0.5, 2.0, Profile::Poly3).unwrap();
    let src = source(atom.clone(), 1);
    let s = Solver::new(cfg(1e-9)).unwrap();
    let (x, xn, t) = ([0.4, 0.3], 0.6, 1.0);
    let v = s.evaluate(&src, &SpaceTimePoint::new(x.to_vec(), xn, t), DerivOrder::ZERO).unwrap();
    let kev = KernelEvaluator::new(cfg(1e-10)).unwrap();
    let gl = GaussLegendre::new(8);
    let l = atom.half_side();
    let mut acc = [0.0; 4];
    for (y1, w1) in gl.mapped(0.2 - l, 0.2 + l) {
        for (y2, w2) in gl.mapped(-0.1 - l, -0.1 + l) {
            for (sv, ws) in gl.mapped(0.0, 0.25) {
                let w = w1 * w2 * ws * atom.value(&[y1, y2], sv);
                let q = SpaceTimePoint::new(vec![x[0] - y1, x[1] - y2], xn, t - sv);
                for i in 1..=3 {
                    acc[i - 1] += w * kev.k_kernel(i, 1, &q, DerivOrder::ZERO).unwrap();
                }
                acc[3] += w * kev.pressure_kernel_smooth(1, &q, DerivOrder::ZERO).unwrap();
            }
        }
    }
    for k in 0..4 {
        assert!((v[k] - acc[k]).abs() <= 1e-6 * acc[k].abs(), "{k}: {} vs {}", v[k], acc[k]);
    }
}

#[test]
fn linear_in_the_data() {
    let s = Solver::new(cfg(1e-8)).unwrap();
    let a1 = unit_atom();
    let a2 = make_atom(0.5, vec![0.7, -0.2], 0.3, 0.5, 2.0, Profile::Poly4).unwrap();
    let mut e = AtomExpansion::single(a1.clone(), 1);
    e.push(a2.clone(), -2.5, 2);
    e.coeffs[0] = 1.5;
    let pt = SpaceTimePoint::new(vec![0.3, 0.1], 0.4, 0.8);
    let sum = s.evaluate(&TangentialSource::from_atoms(&e).unwrap(), &pt, DerivOrder::ZERO).unwrap();
    let v1 = s.evaluate(&source(a1, 1), &pt, DerivOrder::ZERO).unwrap();
    let v2 = s.evaluate(&source(a2, 2), &pt, DerivOrder::ZERO).unwrap();
    let comb: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| 1.5 * a - 2.5 * b).collect();
    assert!(close(&sum, &comb, 10.0 * 1e-8), "{sum:?} vs {comb:?}");
}

#[test]
fn translation_and_parabolic_scaling() {
    let s = Solver::new(cfg(1e-9)).unwrap();
    let a = unit_atom();
    let pt = SpaceTimePoint::new(vec![0.5, -0.25], 0.7, 0.8);
    let base = s.evaluate(&source(a.clone(), 1), &pt, DerivOrder::ZERO).unwrap();

    let mut shifted = a.clone();
    shifted.center_tan = vec![1.0, 2.0];
    let spt = SpaceTimePoint::new(vec![1.5, 1.75], 0.7, 0.8);
    let sv = s.evaluate(&source(shifted, 1), &spt, DerivOrder::ZERO).unwrap();
    assert!(close(&base, &sv, 1e-7));

    let lam = 2.0;
    let big = a.dilate(lam);
    let bv = s.evaluate(&source(big.clone(), 1), &pt.dilate(lam), DerivOrder::ZERO).unwrap();
    let factor = big.amplitude() / a.amplitude();
    // velocity keeps the data scale, pressure picks up 1/λ
    for k in 0..3 {
        assert!((bv[k] - factor * base[k]).abs() <= 1e-7 * base[0].abs(), "{k}");
    }
    assert!((bv[3] * lam - factor * base[3]).abs() <= 1e-7 * base[3].abs().max(base[0].abs()));
}

#[test]
fn stokes_residual_is_second_order() {
    let s = Solver::new(cfg(1e-11)).unwrap();
    let src = source(unit_atom(), 1);
    let pt = SpaceTimePoint::new(vec![0.0, 0.0], 1.0, 1.0);
    let r1 = s.residual_check(&src, &pt, 0.05).unwrap();
    let r2 = s.residual_check(&src, &pt, 0.025).unwrap();
    assert!(r1.momentum_norm() <= 1e-2, "{}", r1.momentum_norm());
    let ratio = r1.momentum_norm() / r2.momentum_norm();
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    assert!(r1.divergence_norm() <= 1e-3);
    assert!(matches!(s.residual_check(&src, &pt, 0.3), Err(Error::Contract(_))));
}

#[test]
fn pressure_is_harmonic() {
    let s = Solver::new(cfg(1e-11)).unwrap();
    let src = source(unit_atom(), 2);
    let (h, xn, t) = (0.02, 0.8, 0.6);
    let xs = vec![vec![0.3 - h, 0.3, 0.3 + h], vec![-0.2 - h, -0.2, -0.2 + h]];
    let plane = s.evaluate_plane(&src, &xs, xn, t, DerivOrder::ZERO).unwrap();
    let p = |i: usize| plane[i][3];
    let up = s.evaluate(&src, &SpaceTimePoint::new(vec![0.3, -0.2], xn + h, t), DerivOrder::ZERO).unwrap()[3];
    let dn = s.evaluate(&src, &SpaceTimePoint::new(vec![0.3, -0.2], xn - h, t), DerivOrder::ZERO).unwrap()[3];
    let lap = (p(1) + p(7) + p(3) + p(5) + up + dn - 6.0 * p(4)) / (h * h);
    let parts = ((p(3) - 2.0 * p(4) + p(5)).abs() + (p(1) - 2.0 * p(4) + p(7)).abs() + (up - 2.0 * p(4) + dn).abs())
        / (h * h);
    assert!(lap.abs() <= 1e-3 * parts, "lap {lap} vs {parts}");
}

#[test]
fn jet_derivatives_match_differences() {
    let s = Solver::new(cfg(1e-11)).unwrap();
    let src = source(unit_atom(), 1);
    let pt = SpaceTimePoint::new(vec![0.2, 0.1], 0.6, 0.7);
    let h = 1e-3;
    let shift = |dxn: f64, dx1: f64, dt: f64| {
        s.evaluate(
            &src,
            &SpaceTimePoint::new(vec![0.2 + dx1, 0.1], 0.6 + dxn, 0.7 + dt),
            DerivOrder::ZERO,
        )
        .unwrap()
    };
    let checks = [
        (DerivOrder::new(1, 0, 0), (h, 0.0, 0.0)),
        (DerivOrder::new(0, 1, 0), (0.0, h, 0.0)),
        (DerivOrder::new(0, 0, 1), (0.0, 0.0, h)),
    ];
    for (d, (a, b, c)) in checks {
        let jet = s.evaluate(&src, &pt, d).unwrap();
        let (p, m) = (shift(a, b, c), shift(-a, -b, -c));
        for k in 0..4 {
            let fd = (p[k] - m[k]) / (2.0 * h);
            assert!((jet[k] - fd).abs() <= 1e-4 * jet[k].abs().max(1e-3 * jet[0].abs()), "{d} {k}: {} vs {fd}", jet[k]);
        }
    }
    // a third-order derivative against a difference of second-order jets
    let d3 = s.evaluate(&src, &pt, DerivOrder::new(1, 2, 0)).unwrap();
    let d2 = DerivOrder::new(0, 2, 0);
    let up = s.evaluate(&src, &SpaceTimePoint::new(vec![0.2, 0.1], 0.6 + h, 0.7), d2).unwrap();
    let dn = s.evaluate(&src, &SpaceTimePoint::new(vec![0.2, 0.1], 0.6 - h, 0.7), d2).unwrap();
    let fd = (up[0] - dn[0]) / (2.0 * h);
    assert!((d3[0] - fd).abs() <= 1e-4 * d3[0].abs(), "{} vs {fd}", d3[0]);
}

#[test]
fn boundary_trace_is_recovered() {
    let s = Solver::new(cfg(1e-8)).unwrap();
    let atom = unit_atom();
    let sup = AtomExpansion::single(atom.clone(), 1).peak();
    let src = source(atom, 1);
    let heights = [0.4, 0.2, 0.1, 0.05];
    // trailing edge of the pulse
    let rows = s.trace_recovery(&src, &[0.0, 0.0], 0.9, &heights).unwrap();
    assert!(rows.windows(2).all(|w| w[1].tangential < w[0].tangential));
    assert!(rows[3].tangential <= 0.05 * sup);
    assert!(rows.iter().all(|r| r.normal <= 1e-2 * sup));
    // at the peak the error is first order in h
    let rows = s.trace_recovery(&src, &[0.1, 0.05], 0.5, &[0.01, 0.005]).unwrap();
    let order = (rows[0].tangential / rows[1].tangential).log2();
    assert!((0.8..1.2).contains(&order), "order {order}");
}

#[test]
fn sampled_field_matches_atom() {
    let atom = make_atom(1.0, vec![0.0, 0.0], 0.0, 0.5, 2.0, Profile::Poly3).unwrap();
    let e = AtomExpansion::single(atom.clone(), 2);
    let g = BoundaryField::from_fn(3, 1.0, 1.0 / 16.0, 1.0 / 16.0, 1.0, |y, s| e.value(y, s)).unwrap();
    let s = Solver::new(cfg(1e-7)).unwrap();
    let pt = SpaceTimePoint::new(vec![0.2, -0.3], 0.5, 0.7);
    let exact = s.evaluate(&source(atom, 2), &pt, DerivOrder::ZERO).unwrap();
    let grid = s.evaluate(&TangentialSource::from_field(&g).unwrap(), &pt, DerivOrder::ZERO).unwrap();
    assert!(close(&exact, &grid, 1e-2), "{exact:?} vs {grid:?}");

    // general data: with g_n = 0 the full solve reduces to the tangential one
    let full = s.full_solve(&g, &pt, &[DerivOrder::new(1, 0, 0)]).unwrap();
    assert!(close(&full.u, &grid[..3], 1e-9));
    let mut bad = g.clone();
    bad.set(3, 10, 2, 1.0);
    assert!(matches!(TangentialSource::from_field(&bad), Err(Error::Contract(_))));
}

#[test]
fn csv_layout() {
    let s = Solver::new(cfg(1e-7)).unwrap();
    let src = source(unit_atom(), 1);
    let pt = SpaceTimePoint::new(vec![0.0, 0.0], 1.0, 1.0);
    let smp = s.evaluate_tangential(&src, &pt, &[DerivOrder::new(0, 1, 0)]).unwrap();
    let csv = samples_to_csv(&[smp]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "x1,x2,xn,t,u1,u2,u3,p,l0k1m0_u1,l0k1m0_u2,l0k1m0_u3");
    assert_eq!(lines.next().unwrap().split(',').count(), 11);
}
