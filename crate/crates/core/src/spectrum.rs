//! The sequence λ_k(w) = ∫₀^∞ J_{k+(n-2)/2}(r)² r w(r) dr, the sharp constant
//! λ₀, the runner-up λ⋆ = sup_{k≥1} λ_k and the stability constant λ₀ − λ⋆.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_adaptive, integrate_breaks, Estimate, GaussRule};
use crate::specfun::{bessel_ik, bessel_jy, gamma_ratio, j_unchecked, legendre_unchecked, ln_gamma, Order};
use crate::weight::{sphere_area, RadialWeight, WeightKind, WeightSpec};

/// Numerical envelope for sup_{ν,r} |J_ν(r)| r^{1/3}.
pub const LANDAU_ENVELOPE: f64 = 0.8;
/// k ≥ 1 belongs to the candidate set when λ_k ≥ λ⋆ (1 − MEMBERSHIP_TOL).
pub const MEMBERSHIP_TOL: f64 = 1e-9;

const HEAD_CUTOFF: f64 = 1e-6;
const TAIL_PANELS: usize = 20;

fn homogeneous_range(n: usize, s: f64) -> Result<()> {
    if n < 2 || !(s > 0.5 && s < n as f64 / 2.0) {
        return Err(domain(format!("homogeneous weight needs s in (1/2, n/2), got s = {s}, n = {n}")));
    }
    Ok(())
}

/// 2^{1-2s} Γ(2s-1) / Γ(s)².
fn homogeneous_prefactor(s: f64) -> Result<f64> {
    Ok(((1.0 - 2.0 * s) * 2f64.ln() + ln_gamma(2.0 * s - 1.0)? - 2.0 * ln_gamma(s)?).exp())
}

/// λ_k for w(r) = r^{-2s} by the Γ-ratio formula.
pub fn lambda_homogeneous_closed(n: usize, s: f64, k: usize) -> Result<f64> {
    homogeneous_range(n, s)?;
    let (nf, kf) = (n as f64, k as f64);
    Ok(homogeneous_prefactor(s)? * gamma_ratio(kf + (nf - 2.0 * s) / 2.0, kf - 1.0 + (nf + 2.0 * s) / 2.0)?)
}

/// The closed-form stability constant for w(r) = r^{-2s}, written as the
/// difference of the two Γ-ratios at k = 0 and k = 1.
pub fn homogeneous_constant_closed(n: usize, s: f64) -> Result<f64> {
    homogeneous_range(n, s)?;
    let nf = n as f64;
    let a = gamma_ratio((nf - 2.0 * s) / 2.0, (nf + 2.0 * s - 2.0) / 2.0)?;
    let b = gamma_ratio((nf - 2.0 * s + 2.0) / 2.0, (nf + 2.0 * s) / 2.0)?;
    Ok(homogeneous_prefactor(s)? * (a - b))
}

/// λ_k for w(r) = (1 + r²)^{-1}: I_ν(1) K_ν(1) with ν = k + (n-2)/2.
pub fn lambda_inhomogeneous_s1(n: usize, k: usize) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("n >= 2 required, got {n}")));
    }
    let (i, kk) = bessel_ik(Order::for_harmonic(n, k), 1.0)?;
    Ok(i * kk)
}

/// ∫₀^∞ J_ν(r)² r^{1-τ} dr with ν = k + (n-2)/2, in closed form.
pub fn watson_integral(n: usize, k: usize, tau: f64) -> Result<f64> {
    if !(tau > 1.0) || !tau.is_finite() {
        return Err(domain(format!("tau > 1 required, got {tau}")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let a = kf + (nf - tau) / 2.0;
    if !(a > 0.0) {
        return Err(domain(format!(
            "integral diverges at the origin: k + (n - tau)/2 = {a} <= 0"
        )));
    }
    let pref = ((1.0 - tau) * 2f64.ln() + ln_gamma(tau - 1.0)? - 2.0 * ln_gamma(tau / 2.0)?).exp();
    Ok(pref * gamma_ratio(a, kf + (nf + tau) / 2.0 - 1.0)?)
}

/// Unwrapped phase θ of J + iY, its derivative, and the squared modulus.
fn phase(order: Order, r: f64) -> Result<(f64, f64, f64)> {
    let nu = order.nu();
    let (j, y) = bessel_jy(order, r)?;
    let m2 = j * j + y * y;
    let raw = y.atan2(j);
    let debye = (r * r - nu * nu).sqrt() - nu * (nu / r).acos() - PI / 4.0;
    let theta = raw + 2.0 * PI * ((debye - raw) / (2.0 * PI)).round();
    Ok((theta, 2.0 / (PI * r * m2), m2))
}

fn solve_phase(order: Order, target: f64, guess: f64) -> Result<f64> {
    let mut r = guess;
    for _ in 0..60 {
        let (theta, dtheta, _) = phase(order, r)?;
        let step = (target - theta) / dtheta;
        r += step;
        if step.abs() <= 1e-11 * r {
            return Ok(r);
        }
    }
    Err(Error::Convergence(format!("phase point {target} of order {} not located", order.nu())))
}

/// ∫₀^∞ J_ν(r)² r w(r) dr with an absolute error estimate.
///
/// Splits into an analytic head near the origin, adaptive Gauss–Kronrod up to
/// R₀ = max(4ν + 30, start of the weight's tail expansion), and a tail where
/// r J² = r(J² + Y²)/2 + r(J² − Y²)/2: the first part is integrated term by
/// term from its asymptotic series, the second is summed over half-periods of
/// cos 2θ and accelerated by repeated averaging.
pub fn bessel_square_integral<W: RadialWeight + ?Sized>(nu: f64, w: &W, tol: f64) -> Result<Estimate> {
    let order = Order::new(nu)?;
    if !(tol > 0.0) {
        return Err(domain(format!("tol must be positive, got {tol}")));
    }
    let alpha = 2.0 * nu + 1.0 - w.head_exponent();
    if !(alpha > -1.0) {
        return Err(domain(format!("integrand ~ r^{alpha} is not integrable at the origin")));
    }
    let tail = w.tail_expansion();
    if !(tail.leading_exponent() > 1.0) {
        return Err(domain("weight must decay faster than 1/r for the integral to converge"));
    }
    let f = |r: f64| {
        let j = j_unchecked(nu, r);
        j * j * r * w.value(r)
    };

    let delta = HEAD_CUTOFF.min(0.5 * w.head_valid_below());
    let head = f(delta) * delta / (alpha + 1.0);
    // J_ν² and the weight deviate from their leading powers by O(δ²) relative terms
    let head_err = head.abs() * delta * delta * (10.0 + w.head_exponent().abs() + 0.5 * tail.leading_exponent());

    let r0 = (4.0 * nu + 30.0).max(tail.from).ceil();
    let mut breaks = vec![delta];
    let mut x = delta * 2.0;
    while x < 1.0 {
        breaks.push(x);
        x *= 2.0;
    }
    let mut x = 1.0;
    while x < r0 {
        breaks.push(x);
        x += 1.0;
    }
    breaks.push(r0);
    let mid = integrate_breaks(f, &breaks, 0.25 * tol, 200_000);

    // (1/π) Σ d_k r^{-2k} = r(J² + Y²)/2, integrated against Σ c_i r^{-e_i}
    let mu = 4.0 * nu * nu;
    let mut mean = 0.0;
    let mut mean_err = 0.0;
    let mut d = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let kf = k as f64;
            d *= (2.0 * kf - 1.0) / (2.0 * kf) * (mu - (2.0 * kf - 1.0).powi(2)) / 4.0;
        }
        let mut contrib = 0.0;
        for &(c, e) in &tail.terms {
            let p = 2.0 * k as f64 + e - 1.0;
            contrib += c * r0.powf(-p) / p;
        }
        contrib *= d / PI;
        if contrib.abs() > prev {
            mean_err = prev;
            break;
        }
        mean += contrib;
        prev = contrib.abs();
        mean_err = prev;
        if d == 0.0 || contrib.abs() <= 1e-18 * mean.abs() {
            mean_err = contrib.abs();
            break;
        }
    }

    let rule = GaussRule::new(20);
    let g = |r: f64| -> f64 {
        match bessel_jy(order, r) {
            Ok((j, y)) => 0.5 * r * w.value(r) * (j * j - y * y),
            Err(_) => f64::NAN,
        }
    };
    let (theta0, _, _) = phase(order, r0)?;
    let mut target = PI / 4.0 + (((theta0 - PI / 4.0) / (PI / 2.0)).floor() + 1.0) * (PI / 2.0);
    let mut left = r0;
    let mut guess = r0 + (target - theta0);
    let mut partial = 0.0;
    let mut sums = Vec::with_capacity(TAIL_PANELS + 1);
    for _ in 0..=TAIL_PANELS {
        let right = solve_phase(order, target, guess)?;
        partial += rule.integrate(left, right, g);
        sums.push(partial);
        guess = right + PI / 2.0;
        left = right;
        target += PI / 2.0;
    }
    let mut osc_err = f64::INFINITY;
    while sums.len() > 1 {
        if sums.len() == 2 {
            osc_err = (sums[1] - sums[0]).abs();
        }
        sums = sums.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    }
    let osc = sums[0];

    let value = head + mid.value + mean + osc;
    let error = head_err + mid.error + mean_err + osc_err;
    if !value.is_finite() || !(error <= tol) {
        return Err(Error::Convergence(format!(
            "Bessel-square integral of order {nu}: error bound {error:.3e} exceeds tol {tol:.3e}"
        )));
    }
    Ok(Estimate { value, error })
}

/// λ_k(w) by quadrature of its defining integral.
pub fn lambda_quadrature(weight: &WeightSpec, k: usize, tol: f64) -> Result<Estimate> {
    weight.validate()?;
    bessel_square_integral(Order::for_harmonic(weight.n, k).nu(), weight, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMethod {
    ClosedForm,
    BesselProduct,
    Quadrature,
}

/// λ_k by the most accurate method available for the weight.
pub fn lambda_best(weight: &WeightSpec, k: usize, tol: f64) -> Result<(f64, f64, LambdaMethod)> {
    match weight.kind {
        WeightKind::Homogeneous { s } => {
            Ok((lambda_homogeneous_closed(weight.n, s, k)?, 0.0, LambdaMethod::ClosedForm))
        }
        WeightKind::Inhomogeneous { s: 1.0 } => {
            Ok((lambda_inhomogeneous_s1(weight.n, k)?, 0.0, LambdaMethod::BesselProduct))
        }
        _ => {
            let e = lambda_quadrature(weight, k, tol)?;
            Ok((e.value, e.error, LambdaMethod::Quadrature))
        }
    }
}

/// The alternative representation of λ_k through the radial profile F_w of ŵ,
/// an integral against the degree-k Legendre polynomial on S^{n-1}. F_w is
/// known only up to a positive constant, which is fixed by matching λ₀.
#[derive(Debug, Clone)]
pub struct LegendreForm {
    pub weight: WeightSpec,
    pub scale: f64,
}

impl LegendreForm {
    /// Calibrate against quadrature at k = 0 and confirm the calibration at k = 1.
    pub fn calibrate(weight: &WeightSpec) -> Result<Self> {
        weight.validate()?;
        let unit = Self { weight: weight.clone(), scale: 1.0 };
        let raw0 = unit.raw(0)?;
        let q0 = lambda_quadrature(weight, 0, 1e-11)?.value;
        let form = Self { weight: weight.clone(), scale: q0 / raw0 };
        let l1 = form.lambda(1)?;
        let q1 = lambda_quadrature(weight, 1, 1e-11)?.value;
        let rel = ((l1 - q1) / q1).abs();
        if rel > 1e-6 {
            return Err(Error::Inconsistency(format!(
                "profile calibrated at k = 0 disagrees with quadrature at k = 1 (relative {rel:.3e})"
            )));
        }
        Ok(form)
    }

    fn raw(&self, k: usize) -> Result<f64> {
        let n = self.weight.n;
        let profile = self.weight.unnormalized_profile().ok_or_else(|| {
            Error::Unsupported(format!("no F_w profile available for {}", self.weight.label()))
        })?;
        // t = cos φ, 1 - t = 2 sin²(φ/2)
        let integrand = |phi: f64| {
            let half = (0.5 * phi).sin();
            let u = 2.0 * half * half;
            profile(u) * legendre_unchecked(n, k, phi.cos()) * phi.sin().powi(n as i32 - 2)
        };
        let est = integrate_adaptive(integrand, 0.0, PI, 8 + 4 * k, 1e-15, 20_000);
        let pref = sphere_area(n - 2) / (2.0 * PI).powi(n as i32);
        Ok(pref * est.value)
    }

    pub fn lambda(&self, k: usize) -> Result<f64> {
        Ok(self.scale * self.raw(k)?)
    }
}

/// λ_k through the Legendre representation, calibrated on the fly.
pub fn lambda_legendre_form(weight: &WeightSpec, k: usize) -> Result<f64> {
    LegendreForm::calibrate(weight)?.lambda(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CertificateMethod {
    /// λ_k is strictly decreasing for k ≥ 1, so sup_{k>K} λ_k = λ_{K+1}.
    MonotoneDecrease,
    /// λ_k ≤ L^{2/p'} (∫J² r^{-ε})^{1/p} (∫w^{p'} r^{p'-2/3+ε(p'-1)})^{1/p'}.
    HolderSplit { p: f64, p_prime: f64, eps: f64, landau_constant: f64 },
    /// w(r) ≤ scale · r^{-2s'} pointwise, so λ_k ≤ scale · ∫J² r^{1-2s'}.
    PowerComparison { s_prime: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    /// The horizon K: the bound covers every k > K.
    pub horizon: usize,
    /// Proven upper bound on sup_{k>K} λ_k.
    pub tail_bound: f64,
    #[serde(flatten)]
    pub method: CertificateMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderExponents {
    pub p_prime: f64,
    pub eps: f64,
}

impl HolderExponents {
    pub fn p(&self) -> f64 {
        self.p_prime / (self.p_prime - 1.0)
    }

    /// Finite weight integral for (1+r²)^{-s} requires s > 1/2 + 1/(6p') + ε/(2p).
    pub fn admissible_for(&self, s: f64) -> bool {
        s > 0.5 + 1.0 / (6.0 * self.p_prime) + self.eps / (2.0 * self.p())
    }

    /// p' = 6 with ε = min(1, 3(s − 1/2))/2, or a larger p' closer to s = 1/2.
    pub fn for_inhomogeneous(s: f64) -> Self {
        let first = Self { p_prime: 6.0, eps: 0.5 * (3.0 * (s - 0.5)).min(1.0) };
        if first.admissible_for(s) {
            return first;
        }
        Self { p_prime: (1.0 / (s - 0.5)).max(6.0), eps: 0.5 * (s - 0.5).min(1.0) }
    }

    fn b(&self) -> f64 {
        self.p_prime - 2.0 / 3.0 + self.eps * (self.p_prime - 1.0)
    }
}

fn ln_beta(a: f64, b: f64) -> Result<f64> {
    Ok(ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?)
}

/// ∫₀^∞ w(r)^{p'} r^b dr, or None when it diverges or is not available.
fn holder_weight_integral(weight: &WeightSpec, e: HolderExponents) -> Option<f64> {
    let b = e.b();
    let pp = e.p_prime;
    match &weight.kind {
        WeightKind::Homogeneous { .. } => None,
        WeightKind::Inhomogeneous { s } => {
            let a = s * pp;
            let h = 0.5 * (b + 1.0);
            if a - h <= 0.0 {
                return None;
            }
            Some(0.5 * ln_beta(h, a - h).ok()?.exp())
        }
        WeightKind::Custom(c) => {
            let head = b + 1.0 - c.head_exponent * pp;
            let tail = c.tail_exponent * pp - b - 1.0;
            if head <= 0.0 || tail <= 0.0 {
                return None;
            }
            let last = c.r.len() - 1;
            let head_part = c.w[0].powf(pp) * c.r[0].powf(b + 1.0) / head;
            let tail_part = c.w[last].powf(pp) * c.r[last].powf(b + 1.0) / tail;
            let est = integrate_breaks(|r| c.eval(r).powf(pp) * r.powf(b), &c.r, 1e-12 * (head_part + tail_part), 50_000);
            Some((head_part + tail_part + est.value + est.error) * (1.0 + 1e-9))
        }
    }
}

fn holder_bound(weight: &WeightSpec, horizon: usize, e: HolderExponents) -> Option<f64> {
    let wt = holder_weight_integral(weight, e)?;
    let watson = watson_integral(weight.n, horizon + 1, 1.0 + e.eps).ok()?;
    Some(LANDAU_ENVELOPE.powf(2.0 / e.p_prime) * watson.powf(1.0 / e.p()) * wt.powf(1.0 / e.p_prime))
}

/// sup_r w(r) r^{2s'} for a tabulated weight, when finite.
fn custom_envelope(weight: &WeightSpec, s_prime: f64) -> Option<f64> {
    let WeightKind::Custom(c) = &weight.kind else { return None };
    if c.head_exponent > 2.0 * s_prime || c.tail_exponent < 2.0 * s_prime {
        return None;
    }
    let mut sup: f64 = 0.0;
    for win in c.r.windows(2) {
        for i in 0..=32 {
            let r = win[0] * (win[1] / win[0]).powf(i as f64 / 32.0);
            sup = sup.max(c.eval(r) * r.powf(2.0 * s_prime));
        }
    }
    Some(sup * (1.0 + 1e-3))
}

fn comparison_bound(weight: &WeightSpec, horizon: usize) -> Option<(f64, f64, f64)> {
    let n = weight.n as f64;
    let cap = horizon as f64 + 1.0 + n / 2.0;
    let (lo, hi) = match &weight.kind {
        WeightKind::Homogeneous { .. } => return None,
        WeightKind::Inhomogeneous { s } => (0.5, s.min(cap)),
        WeightKind::Custom(c) => ((0.5f64).max(0.5 * c.head_exponent), (0.5 * c.tail_exponent).min(cap)),
    };
    if hi <= lo {
        return None;
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for j in 1..=40 {
        let mut s_prime = lo + (hi - lo) * j as f64 / 40.0;
        if s_prime >= cap {
            s_prime = cap - 1e-9;
        }
        let scale = match &weight.kind {
            WeightKind::Inhomogeneous { .. } => 1.0,
            _ => match custom_envelope(weight, s_prime) {
                Some(a) => a,
                None => continue,
            },
        };
        let Ok(bound) = watson_integral(weight.n, horizon + 1, 2.0 * s_prime) else { continue };
        let bound = scale * bound;
        if best.is_none_or(|b| bound < b.2) {
            best = Some((s_prime, scale, bound));
        }
    }
    best
}

/// Certified upper bound for sup_{k>K} λ_k, or None when no method applies.
pub fn truncation_certificate(weight: &WeightSpec, horizon: usize, lambda_star: f64) -> Result<Option<TruncationCertificate>> {
    let ok = |bound: f64| bound < lambda_star * (1.0 - MEMBERSHIP_TOL);
    match weight.kind {
        WeightKind::Homogeneous { s } => {
            let bound = lambda_homogeneous_closed(weight.n, s, horizon + 1)?;
            return Ok(ok(bound).then_some(TruncationCertificate {
                horizon,
                tail_bound: bound,
                method: CertificateMethod::MonotoneDecrease,
            }));
        }
        WeightKind::Inhomogeneous { s: 1.0 } => {
            let bound = lambda_inhomogeneous_s1(weight.n, horizon + 1)?;
            return Ok(ok(bound).then_some(TruncationCertificate {
                horizon,
                tail_bound: bound,
                method: CertificateMethod::MonotoneDecrease,
            }));
        }
        _ => {}
    }
    let mut candidates: Vec<HolderExponents> = Vec::new();
    if let WeightKind::Inhomogeneous { s } = weight.kind {
        candidates.push(HolderExponents::for_inhomogeneous(s));
    } else {
        for &p_prime in &[6.0, 12.0, 24.0, 48.0] {
            for &eps in &[0.5, 0.25, 0.1, 0.05, 0.02] {
                candidates.push(HolderExponents { p_prime, eps });
            }
        }
    }
    let holder = candidates
        .into_iter()
        .filter_map(|e| holder_bound(weight, horizon, e).map(|b| (e, b)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((e, bound)) = holder {
        if ok(bound) {
            return Ok(Some(TruncationCertificate {
                horizon,
                tail_bound: bound,
                method: CertificateMethod::HolderSplit {
                    p: e.p(),
                    p_prime: e.p_prime,
                    eps: e.eps,
                    landau_constant: LANDAU_ENVELOPE,
                },
            }));
        }
    }
    if let Some((s_prime, scale, bound)) = comparison_bound(weight, horizon) {
        if ok(bound) {
            return Ok(Some(TruncationCertificate {
                horizon,
                tail_bound: bound,
                method: CertificateMethod::PowerComparison { s_prime, scale },
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSpectrum {
    pub weight: WeightSpec,
    pub tol: f64,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub methods: Vec<LambdaMethod>,
    pub lambda_star: f64,
    pub k_set: Vec<usize>,
    pub certificate: TruncationCertificate,
}

/// λ₀..λ_K, evaluated in parallel over k.
pub fn compute_values(weight: &WeightSpec, horizon: usize, tol: f64) -> Result<Vec<(f64, f64, LambdaMethod)>> {
    weight.validate()?;
    (0..=horizon).into_par_iter().map(|k| lambda_best(weight, k, tol)).collect()
}

pub fn build_spectrum(weight: &WeightSpec, horizon: usize, tol: f64) -> Result<LambdaSpectrum> {
    if horizon < 1 {
        return Err(domain("K >= 1 required"));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tol must be positive, got {tol}")));
    }
    let rows = compute_values(weight, horizon, tol)?;
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let methods: Vec<LambdaMethod> = rows.iter().map(|r| r.2).collect();
    if let Some(k) = values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Inconsistency(format!("lambda_{k} = {} is not positive", values[k])));
    }
    if let Some(k) = (1..values.len()).find(|&k| values[k] >= values[0]) {
        return Err(Error::Inconsistency(format!(
            "lambda_{k} = {} is not below lambda_0 = {}",
            values[k], values[0]
        )));
    }
    let lambda_star = values[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k_set: Vec<usize> =
        (1..values.len()).filter(|&k| values[k] >= lambda_star * (1.0 - MEMBERSHIP_TOL)).collect();
    if matches!(weight.kind, WeightKind::Homogeneous { .. })
        || matches!(weight.kind, WeightKind::Inhomogeneous { s } if s == 1.0)
    {
        if let Some(k) = (2..values.len()).find(|&k| values[k] >= values[k - 1]) {
            return Err(Error::Inconsistency(format!("lambda_k fails to decrease at k = {k}")));
        }
    }
    let certificate = truncation_certificate(weight, horizon, lambda_star)?.ok_or_else(|| {
        Error::Inconclusive(format!(
            "no tail bound below lambda_star = {lambda_star:.6e} at K = {horizon}; retry with a larger K"
        ))
    })?;
    Ok(LambdaSpectrum {
        weight: weight.clone(),
        tol,
        values,
        errors,
        methods,
        lambda_star,
        k_set,
        certificate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstant {
    /// C′(w) = λ₀ − λ⋆.
    pub value: f64,
    /// Whether the supremum defining λ⋆ may fail to be attained. Always false
    /// for a certified spectrum: the certificate bounds every k > K below λ⋆.
    pub k_set_empty: bool,
}

pub fn stability_constant(spectrum: &LambdaSpectrum) -> StabilityConstant {
    StabilityConstant {
        value: (spectrum.values[0] - spectrum.lambda_star).max(0.0),
        k_set_empty: spectrum.k_set.is_empty(),
    }
}

#[derive(Serialize)]
struct SpectrumExport<'a> {
    n: usize,
    weight: &'a WeightSpec,
    tol: f64,
    lambda: &'a [f64],
    lambda_star: f64,
    #[serde(rename = "K_set")]
    k_set: &'a [usize],
    certificate: &'a TruncationCertificate,
}

impl LambdaSpectrum {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SpectrumExport {
            n: self.weight.n,
            weight: &self.weight,
            tol: self.tol,
            lambda: &self.values,
            lambda_star: self.lambda_star,
            k_set: &self.k_set,
            certificate: &self.certificate,
        })
        .expect("spectrum serialises")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,lambda_k\n");
        for (k, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::PowerWeight;

    #[test]
    fn closed_forms_small_cases() {
        assert!((lambda_homogeneous_closed(3, 1.0, 0).unwrap() - 1.0).abs() < 1e-14);
        assert!((lambda_homogeneous_closed(3, 1.0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!(lambda_homogeneous_closed(3, 1.5, 0).is_err());
        assert!((watson_integral(3, 0, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((watson_integral(3, 1, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!(watson_integral(2, 0, 2.0).is_err());
        assert!(watson_integral(3, 0, 1.0).is_err());
    }

    #[test]
    fn homogeneous_constant_is_gap() {
        for &(n, s) in &[(2, 0.75), (3, 1.0), (3, 1.4), (5, 2.2)] {
            let gap = lambda_homogeneous_closed(n, s, 0).unwrap() - lambda_homogeneous_closed(n, s, 1).unwrap();
            assert!((homogeneous_constant_closed(n, s).unwrap() - gap).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_reproduces_sine_integral() {
        // n = 3, k = 0: J_{1/2}(r)² r · r^{-2} = (2/π) sin²r / r²
        let e = bessel_square_integral(0.5, &PowerWeight(2.0), 1e-9).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn holder_exponents_are_admissible() {
        for i in 1..200 {
            let s = 0.5 + 0.01 * i as f64;
            let e = HolderExponents::for_inhomogeneous(s);
            assert!(e.admissible_for(s), "s = {s}");
        }
        assert_eq!(HolderExponents::for_inhomogeneous(1.0).p_prime, 6.0);
    }
}
