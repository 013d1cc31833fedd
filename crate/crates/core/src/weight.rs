//! Radial weights w : (0, ∞) → (0, ∞) defining the operator w(√-Δ)^{1/2}.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::gamma;

/// What the Bessel-square integrators need to know about a weight.
pub trait RadialWeight: Sync {
    fn value(&self, r: f64) -> f64;
    /// Exponent β with w(r) ~ C r^{-β} as r → 0.
    fn head_exponent(&self) -> f64;
    /// Convergent expansion w(r) = Σ c_i r^{-e_i} valid for r ≥ `from`.
    fn tail_expansion(&self) -> TailExpansion;
    /// Radius below which w is exactly C r^{-β}, up to O(r²) relative corrections.
    fn head_valid_below(&self) -> f64 {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailExpansion {
    pub from: f64,
    pub terms: Vec<(f64, f64)>,
}

impl TailExpansion {
    pub fn leading_exponent(&self) -> f64 {
        self.terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min)
    }
}

/// Pure power r^{-tau}; the kernel of the Watson integral.
#[derive(Debug, Clone, Copy)]
pub struct PowerWeight(pub f64);

impl RadialWeight for PowerWeight {
    fn value(&self, r: f64) -> f64 {
        r.powf(-self.0)
    }
    fn head_exponent(&self) -> f64 {
        self.0
    }
    fn tail_expansion(&self) -> TailExpansion {
        TailExpansion { from: 0.0, terms: vec![(1.0, self.0)] }
    }
}

/// Tabulated positive weight with monotone cubic interpolation in log-log
/// coordinates and declared power-law behaviour outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomWeight {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    /// w(r) = w_0 (r/r_0)^{-head_exponent} for r < r_0.
    pub head_exponent: f64,
    /// w(r) = w_N (r/r_N)^{-tail_exponent} for r > r_N.
    pub tail_exponent: f64,
    /// Optional tabulated profile F_w on (0, 2] as (u, F(u)) pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<(f64, f64)>>,
    #[serde(skip)]
    slopes: Vec<f64>,
}

impl CustomWeight {
    pub fn new(r: Vec<f64>, w: Vec<f64>, head_exponent: f64, tail_exponent: f64) -> Result<Self> {
        if r.len() != w.len() || r.len() < 2 {
            return Err(domain("custom weight table needs at least two (r, w) pairs of equal length"));
        }
        if r.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(domain("custom weight abscissae must be positive and finite"));
        }
        if r.windows(2).any(|p| p[1] <= p[0]) {
            return Err(domain("custom weight abscissae must be strictly increasing"));
        }
        if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(domain("custom weight values must be strictly positive"));
        }
        let mut cw = Self { r, w, head_exponent, tail_exponent, profile: None, slopes: Vec::new() };
        cw.prepare();
        Ok(cw)
    }

    pub fn with_profile(mut self, profile: Vec<(f64, f64)>) -> Result<Self> {
        if profile.len() < 2 || profile.windows(2).any(|p| p[1].0 <= p[0].0) {
            return Err(domain("F_w profile needs increasing abscissae"));
        }
        if profile.iter().any(|p| !(p.0 > 0.0 && p.0 <= 2.0) || !(p.1 > 0.0)) {
            return Err(domain("F_w profile must be positive on (0, 2]"));
        }
        self.profile = Some(profile);
        Ok(self)
    }

    /// Fritsch–Carlson slopes in (ln r, ln w).
    fn prepare(&mut self) {
        let x: Vec<f64> = self.r.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = self.w.iter().map(|v| v.ln()).collect();
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { 0.5 * (delta[i - 1] + delta[i]) };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[i] = t * a * delta[i];
                m[i + 1] = t * b * delta[i];
            }
        }
        self.slopes = m;
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r <= self.r[0] {
            return self.w[0] * (r / self.r[0]).powf(-self.head_exponent);
        }
        if r >= self.r[n - 1] {
            return self.w[n - 1] * (r / self.r[n - 1]).powf(-self.tail_exponent);
        }
        if self.slopes.len() != n {
            // deserialised without slopes; fall back to log-linear interpolation
            let i = self.r.partition_point(|&v| v <= r) - 1;
            let t = (r.ln() - self.r[i].ln()) / (self.r[i + 1].ln() - self.r[i].ln());
            return (self.w[i].ln() * (1.0 - t) + self.w[i + 1].ln() * t).exp();
        }
        let i = self.r.partition_point(|&v| v <= r) - 1;
        let x0 = self.r[i].ln();
        let x1 = self.r[i + 1].ln();
        let h = x1 - x0;
        let t = (r.ln() - x0) / h;
        let (y0, y1) = (self.w[i].ln(), self.w[i + 1].ln());
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        (h00 * y0 + h10 * h * self.slopes[i] + h01 * y1 + h11 * h * self.slopes[i + 1]).exp()
    }

    fn profile_eval(&self, u: f64) -> Option<f64> {
        let p = self.profile.as_ref()?;
        if u <= p[0].0 {
            return Some(p[0].1);
        }
        if u >= p[p.len() - 1].0 {
            return Some(p[p.len() - 1].1);
        }
        let i = p.partition_point(|q| q.0 <= u) - 1;
        let t = (u - p[i].0) / (p[i + 1].0 - p[i].0);
        Some(p[i].1 * (1.0 - t) + p[i + 1].1 * t)
    }

    /// Restore interpolation data after deserialisation.
    pub fn finalize(mut self) -> Self {
        self.prepare();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// w(r) = r^{-2s}, s ∈ (1/2, n/2).
    Homogeneous { s: f64 },
    /// w(r) = (1 + r²)^{-s}, s > 1/2.
    Inhomogeneous { s: f64 },
    Custom(CustomWeight),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub n: usize,
    #[serde(flatten)]
    pub kind: WeightKind,
}

impl WeightSpec {
    pub fn homogeneous(n: usize, s: f64) -> Result<Self> {
        let w = Self { n, kind: WeightKind::Homogeneous { s } };
        w.validate()?;
        Ok(w)
    }

    pub fn inhomogeneous(n: usize, s: f64) -> Result<Self> {
        let w = Self { n, kind: WeightKind::Inhomogeneous { s } };
        w.validate()?;
        Ok(w)
    }

    pub fn custom(n: usize, weight: CustomWeight) -> Result<Self> {
        let w = Self { n, kind: WeightKind::Custom(weight.finalize()) };
        w.validate()?;
        Ok(w)
    }

    /// All precondition violations, empty when the weight is admissible.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n < 2 {
            out.push(format!("n >= 2 required (got {})", self.n));
        }
        let half_n = self.n as f64 / 2.0;
        match &self.kind {
            WeightKind::Homogeneous { s } => {
                if !(*s > 0.5) {
                    out.push(format!("s > 1/2 required (got {s})"));
                }
                if !(*s < half_n) {
                    out.push(format!("s < n/2 required (got s = {s}, n = {})", self.n));
                }
            }
            WeightKind::Inhomogeneous { s } => {
                if !(*s > 0.5) || !s.is_finite() {
                    out.push(format!("s > 1/2 required (got {s})"));
                }
            }
            WeightKind::Custom(c) => {
                if !(c.head_exponent < self.n as f64) {
                    out.push(format!(
                        "head exponent < n required for integrability at 0 (got {})",
                        c.head_exponent
                    ));
                }
                if !(c.tail_exponent > 1.0) {
                    out.push(format!(
                        "tail exponent > 1 required for integrability at infinity (got {})",
                        c.tail_exponent
                    ));
                }
                if c.w.iter().any(|&v| !(v > 0.0)) {
                    out.push("custom weight values must be strictly positive".into());
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(domain(v.join("; ")))
        }
    }

    pub fn s(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Homogeneous { s } | WeightKind::Inhomogeneous { s } => Some(s),
            WeightKind::Custom(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            WeightKind::Homogeneous { s } => format!("homogeneous(n={}, s={s})", self.n),
            WeightKind::Inhomogeneous { s } => format!("inhomogeneous(n={}, s={s})", self.n),
            WeightKind::Custom(c) => format!("custom(n={}, {} nodes)", self.n, c.r.len()),
        }
    }

    /// F_w up to a positive multiplicative constant, when known: the
    /// Poisson-kernel cases s ∈ {(n-1)/2, (n+1)/2} of the inhomogeneous weight,
    /// where ŵ(ξ) ∝ |ξ|^{s-(n+1)/2} e^{-|ξ|}, or a tabulated custom profile.
    pub fn unnormalized_profile(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        match &self.kind {
            WeightKind::Inhomogeneous { s } => {
                let n = self.n as f64;
                let a = *s - 0.5 * (n + 1.0);
                if (a + 1.0).abs() < 1e-12 || a.abs() < 1e-12 {
                    let a = a.round();
                    Some(Box::new(move |u: f64| {
                        let xi = (2.0 * u).sqrt();
                        xi.powf(a) * (-xi).exp()
                    }))
                } else {
                    None
                }
            }
            WeightKind::Custom(c) if c.profile.is_some() => {
                Some(Box::new(move |u: f64| c.profile_eval(u).unwrap_or(f64::NAN)))
            }
            _ => None,
        }
    }
}

/// (1+r²)^{-s} = Σ_j C(-s, j) r^{-2s-2j} for r > 1.
fn inhomogeneous_tail(s: f64, from: f64) -> TailExpansion {
    let mut terms = Vec::new();
    let mut coef = 1.0;
    for j in 0..200 {
        if j > 0 {
            coef *= (-s - (j as f64 - 1.0)) / j as f64;
        }
        terms.push((coef, 2.0 * s + 2.0 * j as f64));
        if j > 2 && (coef.abs() * from.powf(-2.0 * j as f64)) < 1e-20 {
            break;
        }
    }
    TailExpansion { from, terms }
}

impl RadialWeight for WeightSpec {
    fn value(&self, r: f64) -> f64 {
        match &self.kind {
            WeightKind::Homogeneous { s } => r.powf(-2.0 * s),
            WeightKind::Inhomogeneous { s } => (1.0 + r * r).powf(-s),
            WeightKind::Custom(c) => c.eval(r),
        }
    }

    fn head_exponent(&self) -> f64 {
        match &self.kind {
            WeightKind::Homogeneous { s } => 2.0 * s,
            WeightKind::Inhomogeneous { .. } => 0.0,
            WeightKind::Custom(c) => c.head_exponent,
        }
    }

    fn tail_expansion(&self) -> TailExpansion {
        match &self.kind {
            WeightKind::Homogeneous { s } => TailExpansion { from: 0.0, terms: vec![(1.0, 2.0 * s)] },
            WeightKind::Inhomogeneous { s } => inhomogeneous_tail(*s, 10.0),
            WeightKind::Custom(c) => {
                let last = c.r.len() - 1;
                let scale = c.w[last] * c.r[last].powf(c.tail_exponent);
                TailExpansion { from: c.r[last], terms: vec![(scale, c.tail_exponent)] }
            }
        }
    }

    fn head_valid_below(&self) -> f64 {
        match &self.kind {
            WeightKind::Custom(c) => c.r[0],
            _ => f64::INFINITY,
        }
    }
}

/// Surface area of the unit sphere S^{m} ⊂ R^{m+1}.
pub fn sphere_area(m: usize) -> f64 {
    let d = (m + 1) as f64;
    2.0 * std::f64::consts::PI.powf(0.5 * d) / gamma(0.5 * d).expect("positive")
}
