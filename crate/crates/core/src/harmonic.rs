//! Fourier-side spherical-harmonic representation of functions on R^n:
//! ĝ(ξ) = Σ_{k,m} P^{(k,m)}(ξ/|ξ|) g₀^{(k,m)}(|ξ|) |ξ|^{(1-n)/2}.
//!
//! Only the radial profiles g₀^{(k,m)} are stored. Every quantity in the
//! trace deficit is diagonal in this basis.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::gauss_legendre;
use crate::specfun::{harmonic_dimension, j_unchecked, Order};
use crate::spectrum::{lambda_best, LambdaSpectrum};
use crate::weight::{RadialWeight, WeightSpec};

/// Gauss–Legendre points per panel.
const PANEL_ORDER: usize = 6;
/// Geometric refinement levels of the first panel towards r = 0.
const HEAD_LEVELS: usize = 30;

/// Composite Gauss–Legendre rule on (0, r_max]: `panels` equal panels, the
/// first one refined geometrically towards the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub r_max: f64,
    pub panels: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, panels: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() || panels == 0 {
            return Err(domain(format!("grid needs r_max > 0 and panels >= 1, got ({r_max}, {panels})")));
        }
        let (x, w) = gauss_legendre(PANEL_ORDER);
        let h = r_max / panels as f64;
        let mut cuts = vec![0.0];
        for j in (0..HEAD_LEVELS).rev() {
            cuts.push(h / 2f64.powi(j as i32 + 1));
        }
        for i in 1..=panels {
            cuts.push(h * i as f64);
        }
        let mut nodes = Vec::with_capacity(cuts.len() * PANEL_ORDER);
        let mut weights = Vec::with_capacity(cuts.len() * PANEL_ORDER);
        for c in cuts.windows(2) {
            let (mid, half) = (0.5 * (c[0] + c[1]), 0.5 * (c[1] - c[0]));
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Ok(Self { r_max, panels, nodes, weights })
    }

    /// R_max = 200 with panel width 1/8, about 50 panels per Bessel period 2π.
    pub fn standard() -> Self {
        Self::new(200.0, 1600).expect("valid grid")
    }

    pub fn with_resolution(r_max: f64, panels_per_period: f64) -> Self {
        let panels = (panels_per_period * r_max / (2.0 * PI)).ceil() as usize;
        Self::new(r_max, panels.max(1)).expect("valid grid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }
}

/// One radial profile g₀^{(k,m)}. Outside the sampled region (beyond r_max and
/// below the resolved head of the grid) the profile equals `tail` times the
/// extremal kernel J_ν(r) w(r)^{1/2} r^{1/2}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: usize,
    pub m: usize,
    pub samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<f64>,
}

impl Mode {
    fn tail(&self) -> f64 {
        self.tail.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet {
    pub n: usize,
    pub grid: RadialGrid,
    pub modes: Vec<Mode>,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    r_max: f64,
    panels: usize,
}

#[derive(Serialize, Deserialize)]
struct ProfileSetJson {
    n: usize,
    grid: GridJson,
    modes: Vec<Mode>,
}

impl ProfileSet {
    pub fn new(n: usize, grid: RadialGrid, modes: Vec<Mode>) -> Result<Self> {
        let ps = Self { n, grid, modes };
        ps.validate()?;
        Ok(ps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain(format!("n >= 2 required, got {}", self.n)));
        }
        let mut seen = std::collections::BTreeSet::new();
        for mode in &self.modes {
            let dim = harmonic_dimension(self.n, mode.k);
            if mode.m < 1 || mode.m > dim {
                return Err(domain(format!(
                    "mode (k={}, m={}) outside 1..=dim H_k = {dim}",
                    mode.k, mode.m
                )));
            }
            if !seen.insert((mode.k, mode.m)) {
                return Err(domain(format!("duplicate mode (k={}, m={})", mode.k, mode.m)));
            }
            if mode.samples.len() != self.grid.len() {
                return Err(domain(format!(
                    "mode (k={}, m={}) has {} samples, grid has {} nodes",
                    mode.k,
                    mode.m,
                    mode.samples.len(),
                    self.grid.len()
                )));
            }
            if mode.samples.iter().any(|v| !v.is_finite()) || !mode.tail().is_finite() {
                return Err(domain(format!("mode (k={}, m={}) is not finite", mode.k, mode.m)));
            }
        }
        Ok(())
    }

    pub fn max_k(&self) -> usize {
        self.modes.iter().map(|m| m.k).max().unwrap_or(0)
    }

    /// Every profile multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for mode in &mut out.modes {
            mode.samples.iter_mut().for_each(|v| *v *= factor);
            mode.tail = mode.tail.map(|t| t * factor);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ProfileSetJson {
            n: self.n,
            grid: GridJson { r_max: self.grid.r_max, panels: self.grid.panels },
            modes: self.modes.clone(),
        })
        .expect("profile set serialises")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: ProfileSetJson = serde_json::from_value(value.clone())?;
        Self::new(raw.n, RadialGrid::new(raw.grid.r_max, raw.grid.panels)?, raw.modes)
    }
}

/// The extremal kernel K_k(r) = J_ν(r) w(r)^{1/2} r^{1/2} sampled on the grid,
/// with λ_k = ∫K_k² and the part of that mass the grid does not see.
#[derive(Debug, Clone)]
pub struct ModeKernel {
    pub k: usize,
    pub lambda: f64,
    pub values: Vec<f64>,
    pub residual_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub sum_b: f64,
    pub sum_a: f64,
    /// λ₀ ΣB − ΣA.
    pub deficit: f64,
    /// ΣB − A_{0,1}/λ₀, the squared distance to the extremiser set (up to (2π)^n).
    pub dist_sq: f64,
    /// deficit / dist_sq; infinite at an extremiser (serialised as null).
    pub ratio: f64,
    pub constant: f64,
    pub satisfied: bool,
}

impl DeficitReport {
    pub const CSV_HEADER: &'static str = "sum_b,sum_a,deficit,dist_sq,ratio,constant,satisfied";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.sum_b, self.sum_a, self.deficit, self.dist_sq, self.ratio, self.constant, self.satisfied
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReverseCheck {
    pub holds: bool,
    /// λ₀·dist_sq − deficit = ΣA − A_{0,1}.
    pub margin: f64,
}

/// Relative slack in the master inequality, per unit ΣB.
pub const DEFICIT_TOL: f64 = 1e-8;

/// Weight, grid and the extremal kernels for k = 0..=k_max.
#[derive(Debug, Clone)]
pub struct TraceModel {
    pub weight: WeightSpec,
    pub grid: RadialGrid,
    pub lambda_star: f64,
    pub k_set: Vec<usize>,
    kernels: Vec<ModeKernel>,
}

impl TraceModel {
    /// Kernels for every k ≤ max(K, k_max); λ_k beyond the spectrum's horizon
    /// is computed on demand and stays below λ⋆ by the spectrum's certificate.
    pub fn new(spectrum: &LambdaSpectrum, grid: RadialGrid, k_max: usize) -> Result<Self> {
        let weight = spectrum.weight.clone();
        let top = k_max.max(spectrum.values.len() - 1);
        let kernels: Vec<ModeKernel> = (0..=top)
            .into_par_iter()
            .map(|k| {
                let lambda = match spectrum.values.get(k) {
                    Some(&v) => v,
                    None => lambda_best(&weight, k, spectrum.tol)?.0,
                };
                build_kernel(&weight, &grid, k, lambda)
            })
            .collect::<Result<_>>()?;
        Ok(Self { weight, grid, lambda_star: spectrum.lambda_star, k_set: spectrum.k_set.clone(), kernels })
    }

    pub fn n(&self) -> usize {
        self.weight.n
    }

    pub fn lambda0(&self) -> f64 {
        self.kernels[0].lambda
    }

    /// C′(w) = λ₀ − λ⋆.
    pub fn constant(&self) -> f64 {
        (self.lambda0() - self.lambda_star).max(0.0)
    }

    pub fn kernel(&self, k: usize) -> Result<&ModeKernel> {
        self.kernels.get(k).ok_or_else(|| {
            Error::Inconclusive(format!(
                "mode k = {k} lies beyond the prepared kernels (k <= {}); rebuild with a larger k_max",
                self.kernels.len() - 1
            ))
        })
    }

    fn check_set(&self, ps: &ProfileSet) -> Result<()> {
        ps.validate()?;
        if ps.n != self.n() {
            return Err(domain(format!("profile set has n = {}, weight has n = {}", ps.n, self.n())));
        }
        if ps.grid != self.grid {
            return Err(domain("profile set grid differs from the model grid"));
        }
        Ok(())
    }

    /// B = ∫|g₀|².
    pub fn b_coefficient(&self, mode: &Mode) -> Result<f64> {
        let kernel = self.kernel(mode.k)?;
        let t = mode.tail();
        Ok(self.grid.dot(&mode.samples, &mode.samples) + t * t * kernel.residual_mass)
    }

    /// A = (∫ g₀ r^{1/2} J_ν w^{1/2})².
    pub fn a_coefficient(&self, mode: &Mode) -> Result<f64> {
        Ok(self.pairing(mode)?.powi(2))
    }

    fn pairing(&self, mode: &Mode) -> Result<f64> {
        let kernel = self.kernel(mode.k)?;
        Ok(self.grid.dot(&mode.samples, &kernel.values) + mode.tail() * kernel.residual_mass)
    }

    pub fn deficit_report(&self, ps: &ProfileSet) -> Result<DeficitReport> {
        self.check_set(ps)?;
        let rows: Vec<(usize, usize, f64, f64)> = ps
            .modes
            .par_iter()
            .map(|m| Ok((m.k, m.m, self.a_coefficient(m)?, self.b_coefficient(m)?)))
            .collect::<Result<_>>()?;
        let sum_a: f64 = rows.iter().map(|r| r.2).sum();
        let sum_b: f64 = rows.iter().map(|r| r.3).sum();
        let a01 = rows.iter().find(|r| r.0 == 0 && r.1 == 1).map_or(0.0, |r| r.2);
        let l0 = self.lambda0();
        let deficit = l0 * sum_b - sum_a;
        let dist_sq = (sum_b - a01 / l0).max(0.0);
        let ratio = if dist_sq <= 1e-14 * sum_b || dist_sq == 0.0 { f64::INFINITY } else { deficit / dist_sq };
        let constant = self.constant();
        Ok(DeficitReport {
            sum_b,
            sum_a,
            deficit,
            dist_sq,
            ratio,
            constant,
            satisfied: deficit >= constant * dist_sq - DEFICIT_TOL * sum_b,
        })
    }

    /// coefficient · K_k / √λ_k: the extremal profile with B = coefficient².
    pub fn unit_kernel_mode(&self, k: usize, m: usize, coefficient: f64) -> Result<Mode> {
        let kernel = self.kernel(k)?;
        let c = coefficient / kernel.lambda.sqrt();
        Ok(Mode { k, m, samples: kernel.values.iter().map(|v| c * v).collect(), tail: Some(c) })
    }

    /// c·(unit k=0 extremiser) + Σ Y_{k,m}·(unit mode (k,m)) with k ∈ 𝒦.
    pub fn equality_case(&self, c: f64, y: &BTreeMap<(usize, usize), f64>) -> Result<ProfileSet> {
        if self.k_set.is_empty() {
            return Err(Error::Unsupported("the candidate set is empty; no equality case exists".into()));
        }
        let mut modes = Vec::new();
        if c != 0.0 {
            modes.push(self.unit_kernel_mode(0, 1, c)?);
        }
        for (&(k, m), &coef) in y {
            if !self.k_set.contains(&k) {
                return Err(domain(format!("k = {k} is not in the candidate set {:?}", self.k_set)));
            }
            if coef != 0.0 {
                modes.push(self.unit_kernel_mode(k, m, coef)?);
            }
        }
        ProfileSet::new(self.n(), self.grid.clone(), modes)
    }

    /// deficit/dist_sq for the pure unit modes (k, 1), k ∈ k_list.
    pub fn extremising_sequence(&self, k_list: &[usize]) -> Result<Vec<f64>> {
        if k_list.is_empty() || k_list.contains(&0) {
            return Err(domain("k_list must be non-empty with every k >= 1"));
        }
        k_list
            .iter()
            .map(|&k| {
                let ps = ProfileSet::new(self.n(), self.grid.clone(), vec![self.unit_kernel_mode(k, 1, 1.0)?])?;
                Ok(self.deficit_report(&ps)?.ratio)
            })
            .collect()
    }

    /// deficit ≤ λ₀·dist_sq, equivalently A_{0,1} ≤ ΣA.
    pub fn reverse_deficit_check(&self, ps: &ProfileSet) -> Result<ReverseCheck> {
        let r = self.deficit_report(ps)?;
        let margin = self.lambda0() * r.dist_sq - r.deficit;
        Ok(ReverseCheck { holds: margin >= -1e-9 * r.sum_b, margin })
    }

    /// Remove the component along K_k from a sampled profile (no tail).
    pub fn orthogonal_to_kernel(&self, k: usize, samples: &[f64]) -> Result<Vec<f64>> {
        let kernel = self.kernel(k)?;
        let kk = self.grid.dot(&kernel.values, &kernel.values);
        let proj = self.grid.dot(samples, &kernel.values) / kk;
        Ok(samples.iter().zip(&kernel.values).map(|(s, v)| s - proj * v).collect())
    }

    /// S_w g(θ) = (2π)^{-n/2} Σ i^k P^{(k,m)}(θ) ∫ g₀^{(k,m)} r^{1/2} J_ν w^{1/2} dr.
    pub fn trace_evaluate(&self, ps: &ProfileSet, theta: &[f64]) -> Result<Complex64> {
        self.check_set(ps)?;
        if theta.len() != ps.n {
            return Err(domain(format!("point has {} coordinates, expected {}", theta.len(), ps.n)));
        }
        let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(domain(format!("point is not on the unit sphere (|θ| = {norm})")));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for mode in &ps.modes {
            let y = real_harmonic(ps.n, mode.k, mode.m, theta)?;
            let phase = Complex64::i().powu(mode.k as u32);
            total += phase * y * self.pairing(mode)?;
        }
        Ok(total / (2.0 * PI).powf(ps.n as f64 / 2.0))
    }

    /// A random profile set: k ≤ 6, m ≤ min(dim H_k, 3), each profile a mix
    /// of compact bumps and the extremal kernel of its degree.
    pub fn random_profile_set(&self, seed: u64) -> Result<ProfileSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.n();
        let k_top = 6.min(self.kernels.len() - 1);
        let mut slots = Vec::new();
        for k in 0..=k_top {
            for m in 1..=harmonic_dimension(n, k).min(3) {
                slots.push((k, m));
            }
        }
        let count = rng.gen_range(1..=slots.len().min(5));
        let mut modes = Vec::with_capacity(count);
        for _ in 0..count {
            let (k, m) = slots.swap_remove(rng.gen_range(0..slots.len()));
            let kernel = self.kernel(k)?;
            let kernel_coef = if rng.gen_bool(0.6) { rng.gen_range(-1.0..1.0) / kernel.lambda.sqrt() } else { 0.0 };
            let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(0..=3))
                .map(|_| {
                    let a = rng.gen_range(0.0..20.0);
                    let width = rng.gen_range(0.3..6.0);
                    (a, a + width, rng.gen_range(-1.0..1.0))
                })
                .collect();
            let samples: Vec<f64> = self
                .grid
                .nodes()
                .iter()
                .zip(&kernel.values)
                .map(|(&r, &kv)| kernel_coef * kv + bumps.iter().map(|&(a, b, h)| h * bump(r, a, b)).sum::<f64>())
                .collect();
            let tail = (kernel_coef != 0.0).then_some(kernel_coef);
            modes.push(Mode { k, m, samples, tail });
        }
        ProfileSet::new(n, self.grid.clone(), modes)
    }
}

fn build_kernel(weight: &WeightSpec, grid: &RadialGrid, k: usize, lambda: f64) -> Result<ModeKernel> {
    let nu = Order::for_harmonic(weight.n, k).nu();
    let values = grid.sample(|r| j_unchecked(nu, r) * (r * weight.value(r)).sqrt());
    let on_grid = grid.dot(&values, &values);
    let mut residual_mass = lambda - on_grid;
    if residual_mass < 0.0 {
        if residual_mass < -1e-8 * lambda {
            return Err(Error::Precondition {
                what: format!("grid captures more kernel mass than lambda_{k}"),
                defect: -residual_mass,
            });
        }
        residual_mass = 0.0;
    }
    Ok(ModeKernel { k, lambda, values, residual_mass })
}

/// Smooth bump supported on (a, b), peak 1.
fn bump(r: f64, a: f64, b: f64) -> f64 {
    let t = (2.0 * r - a - b) / (b - a);
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Real orthonormal spherical harmonics on S¹ and S².
///
/// n = 2: m = 1 is cos kφ, m = 2 is sin kφ (k ≥ 1). n = 3: m = 1 is the zonal
/// harmonic, m = 2j and 2j+1 carry cos jφ and sin jφ.
pub fn real_harmonic(n: usize, k: usize, m: usize, theta: &[f64]) -> Result<f64> {
    let dim = harmonic_dimension(n, k);
    if m < 1 || m > dim {
        return Err(domain(format!("m = {m} outside 1..={dim}")));
    }
    match n {
        2 => {
            let phi = theta[1].atan2(theta[0]);
            if k == 0 {
                return Ok(1.0 / (2.0 * PI).sqrt());
            }
            let kf = k as f64;
            Ok(if m == 1 { (kf * phi).cos() } else { (kf * phi).sin() } / PI.sqrt())
        }
        3 => {
            let z = theta[2].clamp(-1.0, 1.0);
            let phi = theta[1].atan2(theta[0]);
            let order = m / 2;
            let p = assoc_legendre(k, order, z);
            let mut norm = ((2 * k + 1) as f64 / (4.0 * PI)).sqrt();
            // (k-j)!/(k+j)!
            for i in (k - order + 1)..=(k + order) {
                norm /= (i as f64).sqrt();
            }
            if order == 0 {
                Ok(norm * p)
            } else if m.is_multiple_of(2) {
                Ok(2f64.sqrt() * norm * p * (order as f64 * phi).cos())
            } else {
                Ok(2f64.sqrt() * norm * p * (order as f64 * phi).sin())
            }
        }
        _ => Err(Error::Unsupported(format!("explicit harmonics are only provided for n = 2, 3 (got {n})"))),
    }
}

/// P_k^j(z) without the Condon–Shortley phase.
fn assoc_legendre(k: usize, j: usize, z: f64) -> f64 {
    let s = (1.0 - z * z).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 1..=j {
        pmm *= (2 * i - 1) as f64 * s;
    }
    if k == j {
        return pmm;
    }
    let mut pm1 = z * (2 * j + 1) as f64 * pmm;
    if k == j + 1 {
        return pm1;
    }
    let mut p = 0.0;
    for l in (j + 2)..=k {
        p = (z * (2 * l - 1) as f64 * pm1 - (l + j - 1) as f64 * pmm) / (l - j) as f64;
        pmm = pm1;
        pm1 = p;
    }
    p
}
