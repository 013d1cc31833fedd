//! Kinetic-transport laboratory on uniform phase-space grids: the velocity
//! average ρf(t,x) = ∫ f(x−tv, v) dv, its adjoint X-ray transform
//! ρ*G(x,v) = ∫ G(s, x+vs) ds, the known extremisers, and local-stability
//! probes around the grid's own extremiser.
//!
//! Grids are node-centred: each axis has nodes −L/2 + i·h, i = 0..=L/h.
//! Shifts in x use 4-point Lagrange interpolation; data beyond the window is
//! taken to be zero.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duality::lp_norm;
use crate::error::{domain, Error, Result};
use crate::quad::integrate_adaptive;

const BOUNDARY_BAND: f64 = 0.45;
const TAIL_MASS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub n: usize,
    #[serde(rename = "L")]
    pub extent: f64,
    pub h: f64,
    pub t_extent: f64,
}

impl PhaseGrid {
    pub fn new(n: usize, extent: f64, h: f64, t_extent: f64) -> Result<Self> {
        let g = PhaseGrid { n, extent, h, t_extent };
        g.validate()?;
        Ok(g)
    }

    /// Grid with `cells` cells per axis and the same extent in t.
    pub fn square(n: usize, extent: f64, cells: usize) -> Result<Self> {
        Self::new(n, extent, extent / cells as f64, extent)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.n) {
            return Err(Error::Unsupported(format!("transport grids exist for n ∈ {{1, 2}}, got {}", self.n)));
        }
        if !(self.extent >= 10.0 && self.extent.is_finite()) {
            return Err(domain(format!("extent L must be ≥ 10, got {}", self.extent)));
        }
        // n = 2 lives in four phase dimensions and is run coarse.
        let min_cells = if self.n == 1 { 64.0 } else { 16.0 };
        if !(self.h > 0.0 && self.h <= self.extent / min_cells * (1.0 + 1e-12)) {
            return Err(domain(format!("spacing h must be ≤ L/{min_cells}, got {}", self.h)));
        }
        for (name, len) in [("L", self.extent), ("t_extent", self.t_extent)] {
            let cells = len / self.h;
            if !(len > 0.0) || (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
                return Err(domain(format!("{name} = {len} is not a whole number of cells of width {}", self.h)));
            }
        }
        Ok(())
    }

    /// Nodes per spatial/velocity axis.
    pub fn nodes(&self) -> usize {
        (self.extent / self.h).round() as usize + 1
    }

    pub fn t_nodes(&self) -> usize {
        (self.t_extent / self.h).round() as usize + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        -0.5 * self.extent + i as f64 * self.h
    }

    pub fn t(&self, k: usize) -> f64 {
        -0.5 * self.t_extent + k as f64 * self.h
    }

    /// p = (n+2)/(n+1).
    pub fn p(&self) -> f64 {
        (self.n as f64 + 2.0) / (self.n as f64 + 1.0)
    }

    /// q = (n+2)/n.
    pub fn q(&self) -> f64 {
        (self.n as f64 + 2.0) / self.n as f64
    }

    /// Points in one n-dimensional x (or v) grid.
    pub fn space_len(&self) -> usize {
        self.nodes().pow(self.n as u32)
    }

    pub fn phase_len(&self) -> usize {
        self.space_len() * self.space_len()
    }

    pub fn spacetime_len(&self) -> usize {
        self.t_nodes() * self.space_len()
    }

    /// Cell measure h^{2n} on phase space.
    pub fn phase_weight(&self) -> f64 {
        self.h.powi(2 * self.n as i32)
    }

    /// Cell measure h^{n+1} on space-time.
    pub fn spacetime_weight(&self) -> f64 {
        self.h.powi(self.n as i32 + 1)
    }

    /// Coordinates of a flattened n-dimensional space index.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let m = self.nodes();
        match self.n {
            1 => vec![self.x(idx)],
            _ => vec![self.x(idx / m), self.x(idx % m)],
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// f(x, v), index x·|V| + v.
    Phase,
    /// G(t, x), index t·|X| + x.
    SpaceTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportFunction {
    pub grid: PhaseGrid,
    pub side: Side,
    pub values: Vec<f64>,
}

impl TransportFunction {
    pub fn phase_from_fn(grid: PhaseGrid, f: impl Fn(&[f64], &[f64]) -> f64 + Sync) -> Self {
        let s = grid.space_len();
        let values = (0..grid.phase_len())
            .into_par_iter()
            .map(|idx| f(&grid.point(idx / s), &grid.point(idx % s)))
            .collect();
        TransportFunction { grid, side: Side::Phase, values }
    }

    pub fn spacetime_from_fn(grid: PhaseGrid, g: impl Fn(f64, &[f64]) -> f64 + Sync) -> Self {
        let s = grid.space_len();
        let values = (0..grid.spacetime_len())
            .into_par_iter()
            .map(|idx| g(grid.t(idx / s), &grid.point(idx % s)))
            .collect();
        TransportFunction { grid, side: Side::SpaceTime, values }
    }

    fn weight(&self) -> f64 {
        match self.side {
            Side::Phase => self.grid.phase_weight(),
            Side::SpaceTime => self.grid.spacetime_weight(),
        }
    }

    /// Grid-rule Lebesgue norm.
    pub fn norm(&self, exponent: f64) -> f64 {
        self.weight().powf(1.0 / exponent) * lp_norm(&self.values, exponent)
    }

    /// ‖f‖_p on phase space, ‖G‖_q on space-time.
    pub fn natural_norm(&self) -> f64 {
        match self.side {
            Side::Phase => self.norm(self.grid.p()),
            Side::SpaceTime => self.norm(self.grid.q()),
        }
    }

    pub fn integral(&self) -> f64 {
        self.weight() * self.values.iter().sum::<f64>()
    }

    pub fn pair(&self, other: &TransportFunction) -> Result<f64> {
        if self.side != other.side || self.grid != other.grid {
            return Err(domain("pairing needs functions on the same side of the same grid"));
        }
        Ok(self.weight() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Fraction of |·| mass on nodes in the outer band of the window.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let g = &self.grid;
        let s = g.space_len();
        let outside = |c: f64, len: f64| c.abs() > BOUNDARY_BAND * len;
        let (mut edge, mut total) = (0.0, 0.0);
        for (idx, v) in self.values.iter().enumerate() {
            let a = v.abs();
            total += a;
            let (first, second) = (idx / s, idx % s);
            let on_edge = match self.side {
                Side::Phase => g
                    .point(first)
                    .iter()
                    .chain(&g.point(second))
                    .any(|&c| outside(c, g.extent)),
                Side::SpaceTime => {
                    outside(g.t(first), g.t_extent) || g.point(second).iter().any(|&c| outside(c, g.extent))
                }
            };
            if on_edge {
                edge += a;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    fn check_side(&self, side: Side) -> Result<()> {
        if self.side != side {
            return Err(domain(format!("expected a {side:?} function, got {:?}", self.side)));
        }
        let want = match side {
            Side::Phase => self.grid.phase_len(),
            Side::SpaceTime => self.grid.spacetime_len(),
        };
        if self.values.len() != want {
            return Err(domain(format!("expected {want} samples, got {}", self.values.len())));
        }
        Ok(())
    }

    fn check_decay(&self) -> Result<()> {
        let frac = self.boundary_mass_fraction();
        if frac > TAIL_MASS_TOL {
            return Err(Error::Truncation(format!(
                "{:.2e} of the mass sits in the outer band of the window (limit {TAIL_MASS_TOL:e})",
                frac
            )));
        }
        Ok(())
    }
}

/// Base offset and weights of the 4-point Lagrange stencil evaluating at
/// fractional index `o`: nodes floor(o)−1 ..= floor(o)+2.
fn stencil(o: f64) -> (isize, [f64; 4]) {
    let base = o.floor();
    let u = o - base;
    let w = [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ];
    (base as isize - 1, w)
}

fn in_range(i: isize, m: usize) -> Option<usize> {
    (i >= 0 && (i as usize) < m).then_some(i as usize)
}

/// Per-axis stencils for the displacement `shift` (in length units).
fn stencils(shift: &[f64], h: f64) -> Vec<(isize, [f64; 4])> {
    shift.iter().map(|s| stencil(s / h)).collect()
}

/// Σ_stencil w·data[(x + offset)·stride + col] over the n-dimensional x grid.
fn interpolate_at(
    data: &[f64],
    st: &[(isize, [f64; 4])],
    x: usize,
    m: usize,
    stride: usize,
    col: usize,
) -> f64 {
    match st.len() {
        1 => {
            let (b, w) = st[0];
            let mut acc = 0.0;
            for (a, wa) in w.iter().enumerate() {
                if let Some(l) = in_range(x as isize + b + a as isize, m) {
                    acc += wa * data[l * stride + col];
                }
            }
            acc
        }
        _ => {
            let (x0, x1) = (x / m, x % m);
            let ((b0, w0), (b1, w1)) = (st[0], st[1]);
            let mut acc = 0.0;
            for (a, wa) in w0.iter().enumerate() {
                let Some(l0) = in_range(x0 as isize + b0 + a as isize, m) else { continue };
                for (c, wc) in w1.iter().enumerate() {
                    if let Some(l1) = in_range(x1 as isize + b1 + c as isize, m) {
                        acc += wa * wc * data[(l0 * m + l1) * stride + col];
                    }
                }
            }
            acc
        }
    }
}

fn scaled_point(p: &[f64], c: f64) -> Vec<f64> {
    p.iter().map(|x| c * x).collect()
}

/// Discrete ρ: phase samples → space-time samples.
fn average_raw(grid: &PhaseGrid, f: &[f64]) -> Vec<f64> {
    let s = grid.space_len();
    let m = grid.nodes();
    let hn = grid.h.powi(grid.n as i32);
    let mut out = vec![0.0; grid.spacetime_len()];
    out.par_chunks_mut(s).enumerate().for_each(|(k, row)| {
        let t = grid.t(k);
        for j in 0..s {
            // f(x − tv, v): fractional index shift −tv/h.
            let st = stencils(&scaled_point(&grid.point(j), -t), grid.h);
            for (i, r) in row.iter_mut().enumerate() {
                *r += hn * interpolate_at(f, &st, i, m, s, j);
            }
        }
    });
    out
}

/// Line integrals ∫ G(s, x+vs) ds by gathering along each line.
fn xray_raw(grid: &PhaseGrid, g: &[f64]) -> Vec<f64> {
    let s = grid.space_len();
    let m = grid.nodes();
    let mut out = vec![0.0; grid.phase_len()];
    out.par_chunks_mut(s).enumerate().for_each(|(l, row)| {
        for (j, r) in row.iter_mut().enumerate() {
            let v = grid.point(j);
            let mut acc = 0.0;
            for k in 0..grid.t_nodes() {
                let st = stencils(&scaled_point(&v, grid.t(k)), grid.h);
                acc += interpolate_at(&g[k * s..(k + 1) * s], &st, l, m, 1, 0);
            }
            *r = grid.h * acc;
        }
    });
    out
}

/// ρf(t,x) = ∫ f(x−tv, v) dv.
pub fn velocity_average(f: &TransportFunction) -> Result<TransportFunction> {
    f.grid.validate()?;
    f.check_side(Side::Phase)?;
    f.check_decay()?;
    Ok(TransportFunction { grid: f.grid, side: Side::SpaceTime, values: average_raw(&f.grid, &f.values) })
}

/// ρ*G(x,v) = ∫ G(s, x+vs) ds.
pub fn xray_adjoint(g: &TransportFunction) -> Result<TransportFunction> {
    let grid = &g.grid;
    grid.validate()?;
    g.check_side(Side::SpaceTime)?;
    g.check_decay()?;
    // Along a line the x-step per t-step is |v|h; beyond one unit the
    // integrand is sampled coarser than its own decay scale.
    let step = 0.5 * grid.extent * (grid.n as f64).sqrt() * grid.h;
    if step > 1.0 {
        return Err(Error::Truncation(format!(
            "lines with |v| = L/2 advance {step:.3} per t-step; refine h below {:.4}",
            grid.h / step
        )));
    }
    Ok(TransportFunction { grid: *grid, side: Side::Phase, values: xray_raw(grid, &g.values) })
}

/// f⋆(x,v) = ((1+|x|²)(1+|v|²) − (x·v)²)^{−(n+1)/2}.
///
/// Evaluated as 1 + |x|² + |v|² + |x∧v|² (Lagrange's identity), which avoids
/// cancelling |x|²|v|² against (x·v)².
pub fn extremiser_f(n: usize, x: &[f64], v: &[f64]) -> f64 {
    let sq = |a: &[f64]| a.iter().map(|c| c * c).sum::<f64>();
    let mut wedge = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            wedge += (x[i] * v[j] - x[j] * v[i]).powi(2);
        }
    }
    (1.0 + sq(x) + sq(v) + wedge).powf(-(n as f64 + 1.0) / 2.0)
}

/// G⋆(t,x) = 1/(1+t²+|x|²).
pub fn extremiser_g(_n: usize, t: f64, x: &[f64]) -> f64 {
    1.0 / (1.0 + t * t + x.iter().map(|c| c * c).sum::<f64>())
}

/// ρf⋆ for n = 1: π/√(1+t²+x²).
pub fn extremiser_average_1d(t: f64, x: f64) -> f64 {
    PI / (1.0 + t * t + x * x).sqrt()
}

/// ‖ρf⋆‖₃/‖f⋆‖_{3/2} for n = 1 from the closed forms: π(2π)^{1/3}/(2π)^{2/3}.
pub fn sharp_ratio_1d() -> f64 {
    PI / (2.0 * PI).cbrt()
}

/// ∫ over the plane minus [−a,a]×[−b,b] of (1+x²+y²)^{−3/2}.
pub fn window_tail(a: f64, b: f64) -> f64 {
    let strip = |c: f64| 4.0 * (0.5 * PI - c.atan());
    // Corners: 4∫_a^∞ (1/(1+x²))(1 − b/√(1+x²+b²)) dx, mapped by x = a + u/(1−u).
    let corner = integrate_adaptive(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let x = a + u / (1.0 - u);
            let c2 = 1.0 + x * x;
            (1.0 - b / (c2 + b * b).sqrt()) / c2 / ((1.0 - u) * (1.0 - u))
        },
        0.0,
        1.0,
        8,
        1e-14,
        2000,
    );
    strip(a) + strip(b) - 4.0 * corner.value
}

fn trapezoid(i: usize, len: usize) -> f64 {
    if i == 0 || i + 1 == len {
        0.5
    } else {
        1.0
    }
}

/// A perturbation direction a·B⋆ + r: a multiple of the extremiser, defined
/// on the whole space, plus a part r resolved inside the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub extremiser_part: f64,
    pub resolved: Vec<f64>,
}

/// Local-stability laboratory for n = 1 around the closed-form extremiser
/// pair. The primal side perturbs f⋆ and applies ρ; the dual side perturbs G⋆
/// and applies ρ*. Both have exponents (3/2, 3).
///
/// Norms of B⋆ + εr are split into a trapezoid sum over the window and the
/// analytic tail of B⋆ outside it. The output norm uses the closed-form total
/// of the extremiser image, the exact first-order term
/// 3π³⟨r, B⋆^{1/2}⟩ (from (ρf⋆)² = π²G⋆ and ρ*G⋆ = π f⋆^{1/2}), and a grid
/// sum of the remainder, which is second order in ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportLab {
    pub grid: PhaseGrid,
    pub dual: bool,
    /// B⋆ sampled on the input grid.
    pub extremiser: Vec<f64>,
    /// ‖image of B⋆‖_q / ‖B⋆‖_p with analytic tails: the sharp-constant estimate.
    pub r_hat: f64,
    /// The same ratio with everything truncated to the window.
    pub window_ratio: f64,
    input_weights: Vec<f64>,
    output_weights: Vec<f64>,
    input_tail: f64,
    output_image: Vec<f64>,
}

const LAB_P: f64 = 1.5;
const LAB_Q: f64 = 3.0;

impl TransportLab {
    pub fn new(grid: PhaseGrid, dual: bool) -> Result<Self> {
        grid.validate()?;
        if grid.n != 1 {
            return Err(Error::Unsupported("the stability lab is certified for n = 1 only".into()));
        }
        let (m, mt) = (grid.nodes(), grid.t_nodes());
        let h2 = grid.h * grid.h;
        let phase_w: Vec<f64> =
            (0..m * m).map(|idx| h2 * trapezoid(idx / m, m) * trapezoid(idx % m, m)).collect();
        let st_w: Vec<f64> =
            (0..mt * m).map(|idx| h2 * trapezoid(idx / m, mt) * trapezoid(idx % m, m)).collect();
        let f_star = TransportFunction::phase_from_fn(grid, |x, v| extremiser_f(1, x, v)).values;
        let g_star = TransportFunction::spacetime_from_fn(grid, |t, x| extremiser_g(1, t, x)).values;
        let (extremiser, input_weights, output_weights, first_half) = if dual {
            (g_star, st_w, phase_w, 0.5 * grid.t_extent)
        } else {
            (f_star, phase_w, st_w, 0.5 * grid.extent)
        };
        // Images: ρf⋆ = πG⋆^{1/2} and ρ*G⋆ = πf⋆^{1/2}.
        let output_image: Vec<f64> = if dual {
            TransportFunction::phase_from_fn(grid, |x, v| PI * extremiser_f(1, x, v).sqrt()).values
        } else {
            TransportFunction::spacetime_from_fn(grid, |t, x| PI * extremiser_g(1, t, x).sqrt()).values
        };
        let input_tail = window_tail(first_half, 0.5 * grid.extent);
        let mut lab = TransportLab {
            grid,
            dual,
            extremiser,
            r_hat: 0.0,
            window_ratio: 0.0,
            input_weights,
            output_weights,
            input_tail,
            output_image,
        };
        let zero = vec![0.0; lab.extremiser.len()];
        lab.r_hat = lab.split_ratio(1.0, 0.0, &zero, &vec![0.0; lab.output_image.len()]);
        let image = lab.forward(&lab.extremiser);
        lab.window_ratio = lab.window_norm(&image, LAB_Q, true) / lab.window_norm(&lab.extremiser, LAB_P, false);
        Ok(lab)
    }

    /// ρ on the primal side, ρ* on the dual side, truncated to the window.
    pub fn forward(&self, r: &[f64]) -> Vec<f64> {
        if self.dual {
            xray_raw(&self.grid, r)
        } else {
            average_raw(&self.grid, r)
        }
    }

    fn window_norm(&self, v: &[f64], p: f64, output: bool) -> f64 {
        let w = if output { &self.output_weights } else { &self.input_weights };
        w.iter().zip(v).map(|(w, x)| w * x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    /// ‖cB⋆ + εr‖_p with the analytic tail of cB⋆.
    fn input_norm(&self, c: f64, eps: f64, r: &[f64]) -> f64 {
        let window: f64 = self
            .input_weights
            .iter()
            .zip(&self.extremiser)
            .zip(r)
            .map(|((w, b), x)| w * (c * b + eps * x).abs().powf(LAB_P))
            .sum();
        (window + c.abs().powf(LAB_P) * self.input_tail).powf(1.0 / LAB_P)
    }

    /// ‖image of (cB⋆ + εr)‖_q for c ≥ 0, given the window image `image_r` of r.
    fn output_norm(&self, c: f64, eps: f64, r: &[f64], image_r: &[f64]) -> f64 {
        let q = LAB_Q;
        let total = 2.0 * PI.powi(4);
        let pairing: f64 = self
            .input_weights
            .iter()
            .zip(&self.extremiser)
            .zip(r)
            .map(|((w, b), x)| w * b.sqrt() * x)
            .sum();
        let first = q * c.powf(q - 1.0) * eps * PI.powi(3) * pairing;
        let remainder: f64 = self
            .output_weights
            .iter()
            .zip(&self.output_image)
            .zip(image_r)
            .map(|((w, o), y)| {
                let a = c * o;
                let b = eps * y;
                w * ((a + b).abs().powf(q) - a.powf(q) - q * a.powf(q - 1.0) * b)
            })
            .sum();
        (c.powf(q) * total + first + remainder).max(0.0).powf(1.0 / q)
    }

    fn split_ratio(&self, c: f64, eps: f64, r: &[f64], image_r: &[f64]) -> f64 {
        self.output_norm(c, eps, r, image_r) / self.input_norm(c, eps, r)
    }

    /// ‖ρr‖/‖r‖ for a function resolved inside the window.
    pub fn resolved_ratio(&self, r: &[f64]) -> f64 {
        let image = self.forward(r);
        self.window_norm(&image, LAB_Q, true) / self.window_norm(r, LAB_P, false)
    }

    fn input_point(&self, idx: usize) -> [f64; 2] {
        let m = self.grid.nodes();
        let first = if self.dual { self.grid.t(idx / m) } else { self.grid.x(idx / m) };
        [first, self.grid.x(idx % m)]
    }

    /// Σ of 1–4 Gaussian bumps well inside the window.
    pub fn random_resolved(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bumps = rng.gen_range(1..=4);
        let reach = 0.12 * self.grid.extent.min(self.grid.t_extent);
        let params: Vec<([f64; 2], f64, f64)> = (0..bumps)
            .map(|_| {
                let centre = [rng.gen_range(-reach..reach), rng.gen_range(-reach..reach)];
                (centre, rng.gen_range(0.5..2.5), rng.gen_range(-1.0..1.0))
            })
            .collect();
        (0..self.extremiser.len())
            .map(|idx| {
                let z = self.input_point(idx);
                params
                    .iter()
                    .map(|(c, w, a)| a * (-((z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2)) / (w * w)).exp())
                    .sum()
            })
            .collect()
    }

    /// A Gaussian bump orthogonal to B⋆ in the grid pairing, scaled to the
    /// norm of B⋆.
    pub fn gaussian_direction(&self, seed: u64) -> Direction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centre = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let width: f64 = rng.gen_range(0.7..1.5);
        let mut d: Vec<f64> = (0..self.extremiser.len())
            .map(|idx| {
                let z = self.input_point(idx);
                (-((z[0] - centre[0]).powi(2) + (z[1] - centre[1]).powi(2)) / (width * width)).exp()
            })
            .collect();
        let wdot = |a: &[f64], b: &[f64]| -> f64 {
            self.input_weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
        };
        let proj = wdot(&d, &self.extremiser) / wdot(&self.extremiser, &self.extremiser);
        for (x, b) in d.iter_mut().zip(&self.extremiser) {
            *x -= proj * b;
        }
        let scale = self.input_norm(1.0, 0.0, &d) / self.window_norm(&d, LAB_P, false);
        Direction { extremiser_part: 0.0, resolved: d.iter().map(|x| x * scale).collect() }
    }

    pub fn zero_direction(&self) -> Direction {
        Direction { extremiser_part: 0.0, resolved: vec![0.0; self.extremiser.len()] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub epsilon: f64,
    /// R̂ − ratio(B⋆ + ε·direction).
    pub deficit: f64,
    /// Squared relative distance to the extremiser ray.
    pub dist_sq: f64,
    /// deficit / dist_sq; absent when dist_sq = 0.
    pub ratio: Option<f64>,
}

pub const PROBE_CSV_HEADER: &str = "epsilon,deficit,dist_sq,ratio";

pub fn probe_csv(points: &[ProbePoint]) -> String {
    let mut out = format!("{PROBE_CSV_HEADER}\n");
    for p in points {
        let ratio = p.ratio.map_or(String::from("nan"), |r| format!("{r:e}"));
        out.push_str(&format!("{},{:e},{:e},{}\n", p.epsilon, p.deficit, p.dist_sq, ratio));
    }
    out
}

/// Deficit and squared distance to the extremiser ray along B⋆ + ε·direction.
pub fn local_stability_probe(lab: &TransportLab, direction: &Direction, eps_list: &[f64]) -> Result<Vec<ProbePoint>> {
    let r = &direction.resolved;
    if r.len() != lab.extremiser.len() {
        return Err(domain("direction does not live on the lab's input grid"));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e >= 0.0 && **e <= 0.25)) {
        return Err(domain(format!("ε = {e} is outside the local regime [0, 0.25]")));
    }
    let image = lab.forward(r);
    eps_list
        .iter()
        .map(|&eps| {
            let c = 1.0 + eps * direction.extremiser_part;
            if c <= 0.0 {
                return Err(domain("perturbation flips the sign of the extremiser part"));
            }
            let deficit = lab.r_hat - lab.split_ratio(c, eps, r, &image);
            if deficit < -1e-4 * lab.r_hat {
                return Err(Error::Inconsistency(format!(
                    "ratio exceeds the same-grid R̂ = {} by {:.3e}",
                    lab.r_hat, -deficit
                )));
            }
            let norm = lab.input_norm(c, eps, r);
            let dist = crate::duality::minimize_convex(|mu| lab.input_norm(c - mu, eps, r), 0.0, 2.0 * c + 1.0) / norm;
            let dist_sq = dist * dist;
            Ok(ProbePoint { epsilon: eps, deficit, dist_sq, ratio: (dist_sq > 0.0).then(|| deficit / dist_sq) })
        })
        .collect()
}
