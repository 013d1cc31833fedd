use std::collections::BTreeMap;

use trace_stability::harmonic::{Mode, ProfileSet, RadialGrid, TraceModel};
use trace_stability::quad::sphere_rule;
use trace_stability::spectrum::{build_spectrum, lambda_homogeneous_closed};
use trace_stability::weight::WeightSpec;

fn model(w: WeightSpec, k_max: usize) -> TraceModel {
    let sp = build_spectrum(&w, 10, 1e-10).unwrap();
    TraceModel::new(&sp, RadialGrid::standard(), k_max).unwrap()
}

fn hom3() -> TraceModel {
    model(WeightSpec::homogeneous(3, 1.0).unwrap(), 10)
}

fn single(tm: &TraceModel, mode: Mode) -> ProfileSet {
    ProfileSet::new(tm.n(), tm.grid.clone(), vec![mode]).unwrap()
}

fn kernel_mode(tm: &TraceModel, k: usize, m: usize) -> Mode {
    let kern = tm.kernel(k).unwrap();
    Mode { k, m, samples: kern.values.clone(), tail: Some(1.0) }
}

#[test]
fn b_coefficient_examples() {
    let tm = hom3();
    let zero = Mode { k: 0, m: 1, samples: vec![0.0; tm.grid.len()], tail: None };
    assert_eq!(tm.b_coefficient(&zero).unwrap(), 0.0);
    assert!((tm.b_coefficient(&kernel_mode(&tm, 0, 1)).unwrap() - 1.0).abs() < 1e-12);
    let ind = Mode { k: 0, m: 1, samples: tm.grid.sample(|r| if r < 1.0 { 1.0 } else { 0.0 }), tail: None };
    assert!((tm.b_coefficient(&ind).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn a_coefficient_examples() {
    let tm = hom3();
    for k in 0..4 {
        let lk = lambda_homogeneous_closed(3, 1.0, k).unwrap();
        let mode = kernel_mode(&tm, k, 1);
        let a = tm.a_coefficient(&mode).unwrap();
        let b = tm.b_coefficient(&mode).unwrap();
        assert!((a - lk * lk).abs() < 1e-12 && (b - lk).abs() < 1e-12, "k {k}");
    }
    let bumpy = tm.grid.sample(|r| (-(r - 3.0) * (r - 3.0)).exp() * r.sin());
    let orth = Mode { k: 2, m: 1, samples: tm.orthogonal_to_kernel(2, &bumpy).unwrap(), tail: None };
    assert!(tm.a_coefficient(&orth).unwrap() < 1e-24);
    let raw = Mode { k: 2, m: 1, samples: bumpy, tail: None };
    let l2 = lambda_homogeneous_closed(3, 1.0, 2).unwrap();
    assert!(tm.a_coefficient(&raw).unwrap() < l2 * tm.b_coefficient(&raw).unwrap() * (1.0 - 1e-6));
}

#[test]
fn deficit_report_examples() {
    let tm = hom3();
    let r = tm.deficit_report(&single(&tm, kernel_mode(&tm, 0, 1))).unwrap();
    assert!(r.deficit.abs() < 1e-12 && r.dist_sq < 1e-12 && r.ratio.is_infinite());

    let r = tm.deficit_report(&single(&tm, tm.unit_kernel_mode(1, 2, 1.0).unwrap())).unwrap();
    assert!((r.deficit - 2.0 / 3.0).abs() < 1e-12);
    assert!((r.dist_sq - 1.0).abs() < 1e-12);
    assert!((r.ratio - r.constant).abs() < 1e-12 && r.satisfied);

    let g = Mode { k: 0, m: 1, samples: tm.grid.sample(|r| (-r).exp()), tail: None };
    let r = tm.deficit_report(&single(&tm, g)).unwrap();
    assert!(r.dist_sq > 0.0 && (r.ratio - 1.0).abs() < 1e-9 && r.ratio > r.constant);
}

#[test]
fn equality_cases() {
    let tm = hom3();
    let ps = tm.equality_case(1.0, &BTreeMap::new()).unwrap();
    assert!(tm.deficit_report(&ps).unwrap().deficit.abs() < 1e-12);

    let y: BTreeMap<_, _> = [((1, 1), 1.0)].into_iter().collect();
    let r = tm.deficit_report(&tm.equality_case(0.0, &y).unwrap()).unwrap();
    assert!((r.ratio - 2.0 / 3.0).abs() < 1e-12);

    let r = tm.deficit_report(&tm.equality_case(1.0, &y).unwrap()).unwrap();
    assert!((r.deficit - 2.0 / 3.0).abs() < 1e-12 && (r.dist_sq - 1.0).abs() < 1e-12);
    assert!((r.deficit - r.constant * r.dist_sq).abs() <= 1e-8 * r.sum_b);

    let bad: BTreeMap<_, _> = [((2, 1), 1.0)].into_iter().collect();
    assert!(tm.equality_case(1.0, &bad).is_err());
}

#[test]
fn extremising_sequences() {
    let tm = hom3();
    let r = tm.extremising_sequence(&[1]).unwrap();
    assert!((r[0] - 2.0 / 3.0).abs() < 1e-12);
    let r = tm.extremising_sequence(&[1, 2, 3]).unwrap();
    assert!(r[0] < r[1] && r[1] < r[2]);
    for (i, k) in [1, 2, 3].iter().enumerate() {
        assert!((r[i] - (1.0 - lambda_homogeneous_closed(3, 1.0, *k).unwrap())).abs() < 1e-12);
    }
    assert!(tm.extremising_sequence(&[0]).is_err());
}

#[test]
fn reverse_inequality_examples() {
    let tm = hom3();
    let c = tm.reverse_deficit_check(&single(&tm, kernel_mode(&tm, 0, 1))).unwrap();
    assert!(c.holds && c.margin.abs() < 1e-12);
    let ps = single(&tm, tm.unit_kernel_mode(3, 1, 1.0).unwrap());
    let r = tm.deficit_report(&ps).unwrap();
    assert!(r.deficit <= tm.lambda0() * r.sum_b);
    for seed in 0..20 {
        let ps = tm.random_profile_set(seed).unwrap();
        let c = tm.reverse_deficit_check(&ps).unwrap();
        assert!(c.holds && c.margin >= -1e-12);
    }
}

#[test]
fn trace_evaluation() {
    let tm = hom3();
    let ps = single(&tm, kernel_mode(&tm, 0, 1));
    let a = tm.trace_evaluate(&ps, &[0.0, 0.0, 1.0]).unwrap();
    let b = tm.trace_evaluate(&ps, &[0.6, 0.0, 0.8]).unwrap();
    assert!((a - b).norm() < 1e-14 && a.norm() > 0.0);

    // (k=1, m=1) is the zonal harmonic ∝ z
    let ps = single(&tm, kernel_mode(&tm, 1, 1));
    let at = |x: [f64; 3]| tm.trace_evaluate(&ps, &x).unwrap();
    let top = at([0.0, 0.0, 1.0]);
    let tilted = at([0.8, 0.0, 0.6]);
    assert!((tilted - top * 0.6).norm() < 1e-14);
    assert!(at([1.0, 0.0, 0.0]).norm() < 1e-14);

    let rule = sphere_rule(40, 80);
    for seed in [3, 17, 29] {
        let ps = tm.random_profile_set(seed).unwrap();
        let surface: f64 = rule.iter().map(|(x, w)| w * tm.trace_evaluate(&ps, x).unwrap().norm_sqr()).sum();
        let sum_a = tm.deficit_report(&ps).unwrap().sum_a;
        let expect = sum_a / (2.0 * std::f64::consts::PI).powi(3);
        assert!(((surface - expect) / expect).abs() < 1e-5, "seed {seed}: {surface} vs {expect}");
    }

    let tm2 = model(WeightSpec::inhomogeneous(2, 1.0).unwrap(), 6);
    let n_pts = 512;
    for seed in [1, 2] {
        let ps = tm2.random_profile_set(seed).unwrap();
        let surface: f64 = (0..n_pts)
            .map(|i| {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / n_pts as f64;
                tm2.trace_evaluate(&ps, &[phi.cos(), phi.sin()]).unwrap().norm_sqr()
            })
            .sum::<f64>()
            * 2.0
            * std::f64::consts::PI
            / n_pts as f64;
        let expect = tm2.deficit_report(&ps).unwrap().sum_a / (2.0 * std::f64::consts::PI).powi(2);
        assert!(((surface - expect) / expect).abs() < 1e-5);
    }

    let tm4 = model(WeightSpec::homogeneous(4, 1.0).unwrap(), 3);
    let ps = single(&tm4, kernel_mode(&tm4, 0, 1));
    assert!(tm4.trace_evaluate(&ps, &[1.0, 0.0, 0.0, 0.0]).is_err());
}

#[test]
fn json_round_trip() {
    let tm = hom3();
    let ps = tm.random_profile_set(5).unwrap();
    let js = ps.to_json();
    assert!(js["grid"]["r_max"].as_f64() == Some(200.0) && js["grid"]["panels"].as_u64() == Some(1600));
    let back = ProfileSet::from_json(&js).unwrap();
    assert_eq!(back, ps);
    let mut bad = js.clone();
    bad["modes"][0]["m"] = serde_json::json!(99);
    assert!(ProfileSet::from_json(&bad).is_err());
}
