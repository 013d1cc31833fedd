use proptest::prelude::*;
use trace_stability::transport::*;

fn bump(c: [f64; 4]) -> impl Fn(f64, f64) -> f64 + Sync {
    move |a, b| (-((a - c[0]).powi(2) + (b - c[1]).powi(2)) / (c[2] * c[2])).exp() * c[3]
}

fn params() -> impl Strategy<Value = [f64; 4]> {
    (-1.5..1.5f64, -1.5..1.5f64, 0.6..1.3f64, -1.0..1.0f64).prop_map(|(a, b, w, s)| [a, b, w, s])
}

proptest! {
    #[test]
    fn one_dimensional_extremiser_simplifies(x in -50.0..50.0f64, v in -50.0..50.0f64) {
        let full = (1.0 + x * x) * (1.0 + v * v) - (x * v).powi(2);
        let short = 1.0 + x * x + v * v;
        // The expanded product cancels x²v²; its rounding is relative to that size.
        prop_assert!((full - short).abs() <= 1e-15 * (1.0 + x * x) * (1.0 + v * v));
        let f = extremiser_f(1, &[x], &[v]);
        prop_assert!((f - 1.0 / short).abs() <= 1e-15 * f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn adjointness_on_resolved_pairs(a in params(), b in params(), c in params()) {
        let grid = PhaseGrid::square(1, 12.0, 192).unwrap();
        let (fa, fb, gc) = (bump(a), bump(b), bump(c));
        let f = TransportFunction::phase_from_fn(grid, |x, v| fa(x[0], v[0]) + 0.5 * fb(x[0], v[0]));
        let g = TransportFunction::spacetime_from_fn(grid, |t, x| gc(t, x[0]));
        let lhs = velocity_average(&f).unwrap().pair(&g).unwrap();
        let rhs = f.pair(&xray_adjoint(&g).unwrap()).unwrap();
        let scale = f.norm(1.5) * g.norm(3.0) * sharp_ratio_1d();
        prop_assert!((lhs - rhs).abs() <= 1e-5 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn probe_distance_scales_with_the_step(seed in 0u64..1000) {
        let lab = TransportLab::new(PhaseGrid::square(1, 40.0, 128).unwrap(), false).unwrap();
        let pts = local_stability_probe(&lab, &lab.gaussian_direction(seed), &[0.05, 0.1]).unwrap();
        prop_assert!(pts.iter().all(|p| p.deficit > 0.0));
        let growth = pts[1].dist_sq / pts[0].dist_sq;
        prop_assert!((growth - 4.0).abs() < 0.5, "{growth}");
    }
}

#[test]
fn two_dimensional_extremiser_matches_the_expanded_form() {
    let (x, v) = ([0.3, -1.2], [2.0, 0.7]);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let base = (1.0 + dot(&x, &x)) * (1.0 + dot(&v, &v)) - dot(&x, &v).powi(2);
    assert!((extremiser_f(2, &x, &v) - base.powf(-1.5)).abs() < 1e-15);
}
