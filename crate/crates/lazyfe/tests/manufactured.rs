use lazyfe::core::fields::{gradient, FieldRef, Value};
use lazyfe::core::tensors::Point;
use lazyfe::manufactured::{inflow_profile, PoissonSolution, Solution, StokesSolution};
use proptest::prelude::*;

fn eval<const D: usize>(f: &FieldRef<D>, x: [f64; D]) -> Value<D> {
    f.evaluate(&Point::new(x))
}

/// Central difference of the automatic gradient, component `c` along `j`.
fn second_difference<const D: usize>(g: &FieldRef<D>, x: [f64; D], c: usize, j: usize) -> f64 {
    let h = 1e-5;
    let (mut a, mut b) = (x, x);
    a[j] += h;
    b[j] -= h;
    (eval(g, a).component(c) - eval(g, b).component(c)) / (2.0 * h)
}

fn point3() -> impl Strategy<Value = [f64; 3]> {
    [0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poisson_gradient_matches_autodiff(x in point3(), k in 1usize..=4, sine in any::<bool>()) {
        let s = PoissonSolution::new(if sine { Solution::Sine } else { Solution::Polynomial }, k);
        let u = s.field::<3>();
        prop_assert!((eval(&u, x).component(0) - s.value(&x)).abs() < 1e-12);
        let g = eval(&gradient(&u).unwrap(), x);
        let hand = s.gradient(&x);
        for i in 0..3 {
            prop_assert!((g.component(i) - hand[i]).abs() < 1e-11);
        }
        let flux = eval(&s.flux::<3>(), x);
        prop_assert!((flux.component(2) - hand[2]).abs() < 1e-15);
    }

    #[test]
    fn poisson_source_is_negative_laplacian(x in point3(), k in 1usize..=4, sine in any::<bool>()) {
        let s = PoissonSolution::new(if sine { Solution::Sine } else { Solution::Polynomial }, k);
        let g = gradient(&s.field::<3>()).unwrap();
        let fd: f64 = (0..3).map(|j| second_difference(&g, x, j, j)).sum();
        let f = eval(&s.source::<3>(), x).component(0);
        prop_assert!((f + fd).abs() < 1e-5 * (1.0 + f.abs()), "f={} -lap={}", f, -fd);
    }

    #[test]
    fn stokes_data_consistent(x in point3()) {
        let s = StokesSolution { zero: false };
        let gu = gradient(&s.velocity_field::<3>()).unwrap();
        let gp = eval(&gradient(&s.pressure_field::<3>()).unwrap(), x);
        let f = eval(&s.forcing_field::<3>(), x);
        for c in 0..3 {
            // Gradient entries are stored as ∂_j u_c at (j, c).
            let lap: f64 = (0..3).map(|j| {
                let (mut a, mut b) = (x, x);
                a[j] += 1e-5;
                b[j] -= 1e-5;
                let at = |p| match eval(&gu, p) { Value::Tensor(t) => t.0[j][c], _ => unreachable!() };
                (at(a) - at(b)) / 2e-5
            }).sum();
            prop_assert!((f.component(c) - (gp.component(c) - lap)).abs() < 1e-5);
        }
        let div = match eval(&gu, x) { Value::Tensor(t) => t.0[0][0] + t.0[1][1] + t.0[2][2], _ => unreachable!() };
        prop_assert!((eval(&s.divergence_field::<3>(), x).component(0) - div).abs() < 1e-12);
        let u = s.velocity(&x);
        let uf = eval(&s.velocity_field::<3>(), x);
        for c in 0..3 {
            prop_assert!((uf.component(c) - u[c]).abs() < 1e-14);
        }
    }
}

#[test]
fn zero_solutions_vanish() {
    let x = [0.3, 0.7, 0.1];
    let p = PoissonSolution::new(Solution::Zero, 2);
    assert_eq!(eval(&p.source::<3>(), x).component(0), 0.0);
    let s = StokesSolution { zero: true };
    assert_eq!(s.forcing::<3>(), [0.0; 3]);
    assert_eq!(s.pressure(&x), 0.0);
}

#[test]
fn inflow_vanishes_on_channel_walls() {
    let f = inflow_profile::<3>();
    for x in [[0.0, 0.4, 0.0], [0.5, 0.4, 0.0], [0.2, 0.0, 0.0], [0.2, 1.0, 0.0]] {
        assert!(eval(&f, x).max_abs_diff(&Value::Vector(Default::default())) < 1e-15);
    }
    let peak = eval(&f, [0.25, 0.5, 0.0]);
    assert_eq!([peak.component(0), peak.component(1), peak.component(2)], [0.0, 0.0, 1.0]);
}
