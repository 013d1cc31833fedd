use std::time::Instant;

use trace_stability::quad::integrate_adaptive;
use trace_stability::specfun::{bessel_ik, Order};
use trace_stability::spectrum::{
    bessel_square_integral, build_spectrum, homogeneous_constant_closed, lambda_homogeneous_closed,
    lambda_inhomogeneous_s1, lambda_legendre_form, lambda_quadrature, stability_constant, watson_integral,
    CertificateMethod, LegendreForm,
};
use trace_stability::weight::{CustomWeight, PowerWeight, WeightSpec};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn homogeneous_closed_form_examples() {
    // (2/π)∫ sin²r / r² dr = 1, integrated directly on a long interval plus its 1/r tail
    let direct = integrate_adaptive(|r: f64| (r.sin() / r).powi(2), 1e-12, 2000.0, 2000, 1e-13, 100_000).value;
    let tail = 0.5 / 2000.0; // mean of sin² is 1/2
    assert!(((2.0 / std::f64::consts::PI) * (direct + tail) - 1.0).abs() < 1e-6);
    assert!((lambda_homogeneous_closed(3, 1.0, 0).unwrap() - 1.0).abs() < 1e-14);
    assert!((lambda_homogeneous_closed(3, 1.0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    let q = lambda_quadrature(&WeightSpec::homogeneous(3, 1.0).unwrap(), 10, 1e-10).unwrap();
    assert!(rel(q.value, lambda_homogeneous_closed(3, 1.0, 10).unwrap()) < 1e-6);
}

#[test]
fn quadrature_examples() {
    let e = lambda_quadrature(&WeightSpec::homogeneous(3, 1.0).unwrap(), 0, 1e-8).unwrap();
    assert!((e.value - 1.0).abs() < 1e-8 && e.error <= 1e-8);
    let e = lambda_quadrature(&WeightSpec::inhomogeneous(2, 1.0).unwrap(), 3, 1e-8).unwrap();
    let (i, k) = bessel_ik(Order::new(3.0).unwrap(), 1.0).unwrap();
    assert!((e.value - i * k).abs() < 1e-8, "{} vs {}", e.value, i * k);
    let e = lambda_quadrature(&WeightSpec::homogeneous(3, 1.25).unwrap(), 0, 1e-8).unwrap();
    assert!((e.value - lambda_homogeneous_closed(3, 1.25, 0).unwrap()).abs() < 1e-7);
}

#[test]
fn closed_forms_have_quadrature_twins() {
    let start = Instant::now();
    for n in 2..=5 {
        for &s in &[0.6, 0.9, 1.3, 2.1] {
            if s >= n as f64 / 2.0 {
                continue;
            }
            let w = WeightSpec::homogeneous(n, s).unwrap();
            for &k in &[0, 1, 2, 5, 12, 25] {
                let closed = lambda_homogeneous_closed(n, s, k).unwrap();
                let q = lambda_quadrature(&w, k, 1e-10).unwrap().value;
                assert!(rel(q, closed) < 1e-6, "n {n} s {s} k {k}: {q} vs {closed}");
            }
        }
        let w = WeightSpec::inhomogeneous(n, 1.0).unwrap();
        for &k in &[0, 1, 4, 15] {
            let closed = lambda_inhomogeneous_s1(n, k).unwrap();
            let q = lambda_quadrature(&w, k, 1e-12).unwrap().value;
            assert!(rel(q, closed) < 1e-6, "inhom n {n} k {k}: {q} vs {closed}");
        }
        for &tau in &[1.2, 2.0, 3.7] {
            for &k in &[1, 3, 9] {
                let closed = watson_integral(n, k, tau).unwrap();
                let q = bessel_square_integral(Order::for_harmonic(n, k).nu(), &PowerWeight(tau), 1e-10).unwrap();
                assert!(rel(q.value, closed) < 1e-6, "watson n {n} k {k} tau {tau}");
            }
        }
    }
    println!("quadrature twin grid: {:?}", start.elapsed());
}

#[test]
fn inhomogeneous_s1_examples() {
    assert!((lambda_inhomogeneous_s1(2, 0).unwrap() - 0.5330446749562686).abs() < 1e-12);
    assert!((lambda_inhomogeneous_s1(2, 1).unwrap() - 0.3401733509048675).abs() < 1e-12);
    for n in 2..=6 {
        let mut prev = f64::INFINITY;
        for k in 0..80 {
            let v = lambda_inhomogeneous_s1(n, k).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        assert!(prev < 1e-2);
    }
}

#[test]
fn watson_decays() {
    for &tau in &[1.1, 2.0, 3.0] {
        let mut prev = f64::INFINITY;
        for k in 1..400 {
            let v = watson_integral(3, k, tau).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 0.6 * watson_integral(3, 1, tau).unwrap());
    }
}

#[test]
fn legendre_form_matches_bessel_product() {
    let w = WeightSpec::inhomogeneous(3, 1.0).unwrap();
    let form = LegendreForm::calibrate(&w).unwrap();
    for k in 0..=8 {
        let (i, kk) = bessel_ik(Order::for_harmonic(3, k), 1.0).unwrap();
        let v = form.lambda(k).unwrap();
        assert!(rel(v, i * kk) < 1e-7, "k {k}: {v} vs {}", i * kk);
    }
    // the Fourier transform of (1+|x|²)^{-1} on R³ is 2π² e^{-|ξ|}/|ξ|
    let pi = std::f64::consts::PI;
    assert!(rel(form.scale, 2.0 * pi * pi) < 1e-8, "{}", form.scale);
}

#[test]
fn legendre_form_matches_quadrature() {
    for &(n, s) in &[(3, 2.0), (2, 1.5), (4, 1.5), (4, 2.5)] {
        let w = WeightSpec::inhomogeneous(n, s).unwrap();
        let form = LegendreForm::calibrate(&w).unwrap();
        for k in 0..=2 {
            let q = lambda_quadrature(&w, k, 1e-12).unwrap().value;
            assert!(rel(form.lambda(k).unwrap(), q) < 1e-6, "n {n} s {s} k {k}");
        }
        assert!(form.lambda(1).unwrap() < form.lambda(0).unwrap());
    }
    assert!(lambda_legendre_form(&WeightSpec::inhomogeneous(3, 1.5).unwrap(), 0).is_err());
}

#[test]
fn spectrum_examples() {
    let sp = build_spectrum(&WeightSpec::homogeneous(3, 1.0).unwrap(), 10, 1e-10).unwrap();
    assert_eq!(sp.k_set, vec![1]);
    assert!((sp.lambda_star - 1.0 / 3.0).abs() < 1e-14);
    assert!((stability_constant(&sp).value - 2.0 / 3.0).abs() < 1e-14);
    assert!((homogeneous_constant_closed(3, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    assert_eq!(sp.certificate.method, CertificateMethod::MonotoneDecrease);

    let sp = build_spectrum(&WeightSpec::inhomogeneous(2, 1.0).unwrap(), 10, 1e-10).unwrap();
    assert_eq!(sp.k_set, vec![1]);
    let c = stability_constant(&sp).value;
    assert!((c - 0.19287132405140112).abs() < 1e-12, "{c}");

    let sp = build_spectrum(&WeightSpec::homogeneous(4, 0.75).unwrap(), 10, 1e-10).unwrap();
    assert!(sp.values[1..].windows(2).all(|p| p[1] < p[0]));
}

#[test]
fn general_inhomogeneous_spectra_are_certified() {
    for n in 2..=4 {
        for &s in &[0.6, 1.5, 2.0, 3.3] {
            let start = Instant::now();
            let sp = build_spectrum(&WeightSpec::inhomogeneous(n, s).unwrap(), 10, 1e-10).unwrap();
            assert_eq!(sp.k_set, vec![1], "n {n} s {s}");
            assert!(sp.certificate.tail_bound < sp.lambda_star);
            println!(
                "n={n} s={s}: lambda_1 = {:.6}, C' = {:.6}, certificate {:?} ({:?})",
                sp.values[1],
                stability_constant(&sp).value,
                sp.certificate.method,
                start.elapsed()
            );
        }
    }
}

#[test]
fn inhomogeneous_decay_to_half() {
    for n in 2..=4 {
        for &s in &[1.0, 2.0] {
            let w = WeightSpec::inhomogeneous(n, s).unwrap();
            let l1 = lambda_quadrature(&w, 1, 1e-10).unwrap().value;
            let l40 = lambda_quadrature(&w, 40, 1e-10).unwrap().value;
            assert!(l40 < 0.5 * l1, "n {n} s {s}: {l40} vs {l1}");
        }
    }
}

#[test]
fn slow_decay_near_the_critical_exponent() {
    // λ_k ~ k^{1-2s}: at s = 0.6 the ratio λ_K/λ_1 falls only like K^{-0.2}
    for n in 2..=4 {
        let w = WeightSpec::inhomogeneous(n, 0.6).unwrap();
        let l1 = lambda_quadrature(&w, 1, 1e-10).unwrap().value;
        let ratios: Vec<f64> = [40, 80, 120]
            .iter()
            .map(|&k| lambda_quadrature(&w, k, 1e-10).unwrap().value / l1)
            .collect();
        println!("n={n} s=0.6: lambda_K/lambda_1 at K = 40, 80, 120: {ratios:?}");
        assert!(ratios.windows(2).all(|p| p[1] < p[0]));
        assert!(ratios[0] > 0.5 && ratios[2] < 0.5);
        let slope = (ratios[2] / ratios[0]).ln() / 3f64.ln();
        assert!((slope + 0.2).abs() < 0.03, "log-log slope {slope}");
    }
}

#[test]
fn custom_weight_matches_its_closed_form_twin() {
    // tabulate (1+r²)^{-1} and compare with the exact Bessel product
    let r: Vec<f64> = (0..161).map(|i| 10f64.powf(-3.0 + 0.03125 * i as f64)).collect();
    let w: Vec<f64> = r.iter().map(|x| 1.0 / (1.0 + x * x)).collect();
    let cw = CustomWeight::new(r, w, 0.0, 2.0).unwrap();
    let spec = WeightSpec::custom(3, cw).unwrap();
    for k in 0..4 {
        let q = lambda_quadrature(&spec, k, 1e-8).unwrap().value;
        let exact = lambda_inhomogeneous_s1(3, k).unwrap();
        assert!(rel(q, exact) < 1e-4, "k {k}: {q} vs {exact}");
    }
    let sp = build_spectrum(&spec, 12, 1e-8).unwrap();
    assert_eq!(sp.k_set, vec![1]);
}

#[test]
fn export_formats() {
    let sp = build_spectrum(&WeightSpec::homogeneous(3, 1.0).unwrap(), 3, 1e-10).unwrap();
    let js = sp.to_json();
    for key in ["n", "weight", "tol", "lambda", "lambda_star", "K_set", "certificate"] {
        assert!(js.get(key).is_some(), "missing {key}");
    }
    let csv = sp.to_csv();
    assert!(csv.starts_with("k,lambda_k\n0,"), "{csv}");
    let first: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - 1.0).abs() < 1e-14);
    assert_eq!(csv.lines().count(), 5);
}
