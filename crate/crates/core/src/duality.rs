//! Finite-dimensional duality laboratory: ℓᵖ → ℓ^q operator norms, duality
//! maps, extremiser transfer between an operator and its adjoint, the
//! convexity inequalities behind local stability, and the stereographic
//! change of variables on the sphere.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::integrate_adaptive;

pub const MAX_ITERATIONS: usize = 10_000;
pub const ITERATION_TOL: f64 = 1e-12;
/// Relative spread tolerated between stationary values from different starts.
pub const AGREEMENT_TOL: f64 = 1e-9;
/// Radius of the local regime, measured as relative ℓᵖ distance.
pub const LOCAL_RADIUS: f64 = 0.25;
const UNIT_TOL: f64 = 1e-10;
const DEFAULT_SEED: u64 = 0x5eed_d0a1;

/// Hölder conjugate exponent, with 1 ↔ ∞.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    let m = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if m == 0.0 || p.is_infinite() {
        return m;
    }
    m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scaled(v: &[f64], c: f64) -> Vec<f64> {
    v.iter().map(|x| c * x).collect()
}

/// D_r F = |F|^{r−2}F/‖F‖_r^{r−1}; for r = 1 this is the sign vector.
pub fn duality_map(f: &[f64], r: f64) -> Result<Vec<f64>> {
    if !(r >= 1.0) {
        return Err(domain(format!("duality exponent must be ≥ 1, got {r}")));
    }
    let norm = lp_norm(f, r);
    if !norm.is_finite() {
        return Err(domain("duality map of a non-finite vector"));
    }
    if norm == 0.0 {
        return Err(domain("duality map of the zero vector"));
    }
    Ok(f.iter()
        .map(|&x| {
            if x == 0.0 {
                0.0
            } else if r == 1.0 {
                x.signum()
            } else {
                x.signum() * (x.abs() / norm).powf(r - 1.0)
            }
        })
        .collect())
}

/// A real Y×X matrix acting ℓᵖ(X) → ℓ^q(Y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteOperator {
    rows: usize,
    cols: usize,
    p: f64,
    q: f64,
    /// Row-major.
    entries: Vec<f64>,
}

impl FiniteOperator {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>, p: f64, q: f64) -> Result<Self> {
        let op = FiniteOperator { rows, cols, p, q, entries };
        op.validate()?;
        Ok(op)
    }

    pub fn from_rows(rows: &[Vec<f64>], p: f64, q: f64) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(domain("ragged matrix rows"));
        }
        Self::new(rows.len(), cols, rows.concat(), p, q)
    }

    /// Entries drawn uniformly from [0, 1).
    pub fn random_nonnegative(rows: usize, cols: usize, p: f64, q: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..rows * cols).map(|_| rng.gen::<f64>()).collect();
        Self::new(rows, cols, entries, p, q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(domain("operator must have at least one row and column"));
        }
        if self.entries.len() != self.rows * self.cols {
            return Err(domain(format!(
                "expected {}×{} = {} entries, got {}",
                self.rows,
                self.cols,
                self.rows * self.cols,
                self.entries.len()
            )));
        }
        if self.entries.iter().any(|x| !x.is_finite()) {
            return Err(domain("matrix entries must be finite"));
        }
        for (name, e) in [("p", self.p), ("q", self.q)] {
            if !(e > 1.0 && e.is_finite()) {
                return Err(domain(format!("{name} must lie in (1, ∞), got {e}")));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p_prime(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn q_prime(&self) -> f64 {
        conjugate(self.q)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|&x| x >= 0.0)
    }

    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.cols, "input length must equal column count");
        self.entries.chunks(self.cols).map(|row| dot(row, g)).collect()
    }

    pub fn apply_adjoint(&self, h: &[f64]) -> Vec<f64> {
        assert_eq!(h.len(), self.rows, "input length must equal row count");
        let mut out = vec![0.0; self.cols];
        for (row, &hi) in self.entries.chunks(self.cols).zip(h) {
            for (o, &t) in out.iter_mut().zip(row) {
                *o += t * hi;
            }
        }
        out
    }

    /// T* as an operator ℓ^{q′} → ℓ^{p′}.
    pub fn adjoint(&self) -> FiniteOperator {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.entry(i, j));
            }
        }
        FiniteOperator {
            rows: self.cols,
            cols: self.rows,
            p: self.q_prime(),
            q: self.p_prime(),
            entries,
        }
    }

    /// ‖Tg‖_q / ‖g‖_p.
    pub fn ratio(&self, g: &[f64]) -> f64 {
        lp_norm(&self.apply(g), self.q) / lp_norm(g, self.p)
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> FiniteOperator {
        let entries = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| self.entry(i, j)))
            .collect();
        FiniteOperator { rows: rows.len(), cols: cols.len(), p: self.p, q: self.q, entries }
    }

    /// Connected components of the bipartite support graph, as (rows, cols).
    fn support_components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = self.rows + self.cols;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.entry(i, j) != 0.0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, self.rows + j));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> =
            Default::default();
        for v in 0..n {
            let root = find(&mut parent, v);
            let entry = groups.entry(root).or_default();
            if v < self.rows {
                entry.0.push(v);
            } else {
                entry.1.push(v - self.rows);
            }
        }
        groups.into_values().filter(|(r, c)| !r.is_empty() && !c.is_empty()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let op: FiniteOperator = serde_json::from_str(s)?;
        op.validate()?;
        Ok(op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormStatus {
    /// Nonnegative matrix with p ≤ q: every start reached the same value.
    Certified,
    /// Best value over the starts; the true norm may be larger.
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    pub value: f64,
    /// Unit vector in ℓᵖ.
    pub extremiser: Vec<f64>,
    /// ‖T‖‖g‖_p − ‖Tg‖_q.
    pub residual: f64,
    /// ‖g − D_{p′}(T* D_q(Tg))‖_∞.
    pub stationarity: f64,
    pub starts: usize,
    /// Largest iteration count over all starts.
    pub iterations: usize,
    pub status: NormStatus,
}

/// g ↦ D_{p′}(T* D_q(Tg)), or None if Tg = 0.
fn norm_step(t: &FiniteOperator, g: &[f64]) -> Result<Option<Vec<f64>>> {
    let tg = t.apply(g);
    if tg.iter().all(|&x| x == 0.0) {
        return Ok(None);
    }
    let back = t.apply_adjoint(&duality_map(&tg, t.q)?);
    Ok(Some(duality_map(&back, t.p_prime())?))
}

fn fixed_point(t: &FiniteOperator, start: Vec<f64>) -> Result<(Vec<f64>, f64, usize)> {
    let mut g = scaled(&start, 1.0 / lp_norm(&start, t.p));
    for it in 1..=MAX_ITERATIONS {
        let Some(next) = norm_step(t, &g)? else {
            return Ok((g, 0.0, it));
        };
        let diff = next.iter().zip(&g).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        g = next;
        if diff <= ITERATION_TOL {
            let value = lp_norm(&t.apply(&g), t.q);
            return Ok((g, value, it));
        }
    }
    Err(Error::Convergence(format!(
        "norm iteration did not settle to {ITERATION_TOL:e} within {MAX_ITERATIONS} steps"
    )))
}

fn multistart(
    t: &FiniteOperator,
    starts: usize,
    rng: &mut ChaCha8Rng,
    positive: bool,
) -> Result<Vec<(Vec<f64>, f64, usize)>> {
    (0..starts)
        .map(|_| {
            let g0: Vec<f64> = (0..t.cols)
                .map(|_| {
                    if positive {
                        rng.gen_range(0.05..1.0)
                    } else {
                        rng.sample::<f64, _>(StandardNormal)
                    }
                })
                .collect();
            fixed_point(t, g0)
        })
        .collect()
}

pub fn operator_norm(t: &FiniteOperator, starts: usize) -> Result<NormCertificate> {
    operator_norm_seeded(t, starts, DEFAULT_SEED)
}

/// Multistart fixed-point iteration for ‖T‖_{ℓᵖ→ℓ^q}.
///
/// Nonnegative matrices with p ≤ q split into connected support components;
/// the norm is the largest component norm, and each component must produce a
/// single stationary value across all starts.
pub fn operator_norm_seeded(t: &FiniteOperator, starts: usize, seed: u64) -> Result<NormCertificate> {
    t.validate()?;
    if starts == 0 {
        return Err(domain("operator_norm needs at least one start"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let certifiable = t.is_nonnegative() && t.p <= t.q;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut iterations = 0;
    if certifiable {
        for (rows, cols) in t.support_components() {
            let sub = t.submatrix(&rows, &cols);
            if sub.entries.iter().all(|&x| x == 0.0) {
                continue;
            }
            let runs = multistart(&sub, starts, &mut rng, true)?;
            let top = runs.iter().map(|r| r.1).fold(0.0, f64::max);
            let low = runs.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
            if top - low > AGREEMENT_TOL * top {
                return Err(Error::Anomaly(format!(
                    "stationary values {low:.15} and {top:.15} disagree on a connected nonnegative block"
                )));
            }
            iterations = iterations.max(runs.iter().map(|r| r.2).max().unwrap_or(0));
            let (g_sub, value, _) = runs
                .into_iter()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one start");
            if best.as_ref().is_none_or(|b| value > b.1) {
                let mut g = vec![0.0; t.cols];
                for (&j, &x) in cols.iter().zip(&g_sub) {
                    g[j] = x;
                }
                best = Some((g, value));
            }
        }
    } else {
        let runs = multistart(t, starts, &mut rng, t.is_nonnegative())?;
        iterations = runs.iter().map(|r| r.2).max().unwrap_or(0);
        best = runs.into_iter().map(|r| (r.0, r.1)).max_by(|a, b| a.1.total_cmp(&b.1));
    }
    let (g, value) = best.filter(|b| b.1 > 0.0).ok_or_else(|| domain("zero operator"))?;
    let achieved = lp_norm(&t.apply(&g), t.q);
    let stationarity = match norm_step(t, &g)? {
        Some(next) => next.iter().zip(&g).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())),
        None => f64::INFINITY,
    };
    Ok(NormCertificate {
        value,
        residual: value * lp_norm(&g, t.p) - achieved,
        extremiser: g,
        stationarity,
        starts,
        iterations,
        status: if certifiable { NormStatus::Certified } else { NormStatus::LowerBound },
    })
}

/// Maps an extremiser G⋆ of T* to |T*G⋆|^{p′−2}T*G⋆, an extremiser of T.
pub fn extremiser_transfer(t: &FiniteOperator, g_star: &[f64]) -> Result<Vec<f64>> {
    let norm = operator_norm(t, 4)?.value;
    extremiser_transfer_with_norm(t, g_star, norm)
}

pub fn extremiser_transfer_with_norm(t: &FiniteOperator, g_star: &[f64], norm: f64) -> Result<Vec<f64>> {
    if g_star.len() != t.rows {
        return Err(domain("G⋆ must live on the output side of T"));
    }
    let h = t.apply_adjoint(g_star);
    let target = norm * lp_norm(g_star, t.q_prime());
    let defect = 1.0 - lp_norm(&h, t.p_prime()) / target;
    if !(defect <= 1e-9) {
        return Err(Error::Precondition { what: "G⋆ is not an extremiser of T*".into(), defect });
    }
    let pp = t.p_prime();
    let g: Vec<f64> = h.iter().map(|&x| x.signum() * x.abs().powf(pp - 1.0)).collect();
    let defect = 1.0 - t.ratio(&g) / norm;
    if !(defect <= 1e-8) {
        return Err(Error::Precondition {
            what: "transferred vector falls short of the operator norm".into(),
            defect,
        });
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cfl3Gap {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
}

impl Cfl3Gap {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

pub fn cfl3_constant(r: f64) -> f64 {
    if r <= 2.0 {
        2.0 * conjugate(r).powf(r - 1.0)
    } else {
        4.0 * (r - 1.0)
    }
}

/// ‖D_r g1 − D_r g2‖_{r′} against C_r(‖g1−g2‖_r/(‖g1‖_r+‖g2‖_r))^{min(r,2)−1}.
pub fn cfl3_gap(g1: &[f64], g2: &[f64], r: f64) -> Result<Cfl3Gap> {
    if g1.len() != g2.len() {
        return Err(domain("vectors of different length"));
    }
    let d = sub(&duality_map(g1, r)?, &duality_map(g2, r)?);
    let lhs = lp_norm(&d, conjugate(r));
    let rel = lp_norm(&sub(g1, g2), r) / (lp_norm(g1, r) + lp_norm(g2, r));
    let constant = cfl3_constant(r);
    Ok(Cfl3Gap { lhs, rhs: constant * rel.powf(r.min(2.0) - 1.0), constant })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cfl1Gap {
    pub pairing: f64,
    pub bound: f64,
}

impl Cfl1Gap {
    pub fn holds(&self, slack: f64) -> bool {
        self.pairing <= self.bound + slack
    }
}

fn check_unit(v: &[f64], p: f64, what: &str) -> Result<()> {
    let defect = (lp_norm(v, p) - 1.0).abs();
    if defect > UNIT_TOL {
        return Err(Error::Precondition { what: format!("{what} is not a unit vector"), defect });
    }
    Ok(())
}

/// |⟨h1,h2⟩| against 1 − ((r′−1)/4)‖D_r h1 − σh2‖²_{r′}, σ the sign of the pairing.
pub fn cfl1_gap(h1: &[f64], h2: &[f64], r: f64) -> Result<Cfl1Gap> {
    if !(r >= 2.0) {
        return Err(domain(format!("requires r ≥ 2, got {r}")));
    }
    let rp = conjugate(r);
    check_unit(h1, r, "h1 in ℓ^r")?;
    check_unit(h2, rp, "h2 in ℓ^r′")?;
    let pairing = dot(h1, h2);
    let sigma = if pairing < 0.0 { -1.0 } else { 1.0 };
    let d = sub(&duality_map(h1, r)?, &scaled(h2, sigma));
    let bound = 1.0 - (rp - 1.0) / 4.0 * lp_norm(&d, rp).powi(2);
    Ok(Cfl1Gap { pairing: pairing.abs(), bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AldazRatio {
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

/// ‖|h1|^{r/2} − |h2|^{r′/2}‖₂² / (1 − ⟨|h1|,|h2|⟩), with 0/0 read as 1.
pub fn aldaz_ratio(h1: &[f64], h2: &[f64], r: f64) -> Result<AldazRatio> {
    if !(r > 1.0) {
        return Err(domain(format!("requires r > 1, got {r}")));
    }
    let rp = conjugate(r);
    check_unit(h1, r, "h1 in ℓ^r")?;
    check_unit(h2, rp, "h2 in ℓ^r′")?;
    let numerator: f64 = h1
        .iter()
        .zip(h2)
        .map(|(a, b)| (a.abs().powf(r / 2.0) - b.abs().powf(rp / 2.0)).powi(2))
        .sum();
    let denominator = 1.0 - h1.iter().zip(h2).map(|(a, b)| a.abs() * b.abs()).sum::<f64>();
    let ratio = if numerator < 1e-12 && denominator.abs() < 1e-12 {
        1.0
    } else if denominator <= 0.0 {
        f64::INFINITY
    } else {
        numerator / denominator
    };
    Ok(AldazRatio { numerator, denominator, ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Cfl3,
    Cfl1,
    Aldaz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs for the inequalities; the ratio itself for the Aldaz sweep.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub r: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn violations(&self, slack: f64) -> usize {
        match self.kind {
            SweepKind::Aldaz => 0,
            _ => self.rows.iter().filter(|row| row.margin < -slack).count(),
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let header = match self.kind {
            SweepKind::Aldaz => "seed,numerator,denominator,ratio",
            _ => "seed,lhs,rhs,margin",
        };
        let mut out = format!("{header}\n");
        for row in &self.rows {
            out.push_str(&format!("{},{:e},{:e},{:e}\n", row.seed, row.lhs, row.rhs, row.margin));
        }
        out
    }
}

/// A random vector: dimension 1..=8, Gaussian entries, some exact zeros.
fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.sample(StandardNormal) })
            .collect();
        if v.iter().any(|&x| x != 0.0) {
            return v;
        }
    }
}

fn unit(v: Vec<f64>, p: f64) -> Vec<f64> {
    let n = lp_norm(&v, p);
    scaled(&v, 1.0 / n)
}

/// Random pair for a trial; a third of the trials are near-coincident pairs,
/// where the inequalities are tightest.
fn sweep_trial(kind: SweepKind, r: f64, seed: u64) -> Result<SweepRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=8);
    let near = rng.gen_bool(1.0 / 3.0);
    let eps = 10f64.powf(rng.gen_range(-6.0..-0.5));
    let a = random_vector(&mut rng, dim);
    let noise = random_vector(&mut rng, dim);
    let rp = conjugate(r);
    match kind {
        SweepKind::Cfl3 => {
            let b = if near {
                let s = rng.gen_range(0.2..5.0);
                a.iter().zip(&noise).map(|(x, n)| s * (x + eps * n)).collect()
            } else {
                noise
            };
            let gap = cfl3_gap(&a, &b, r)?;
            Ok(SweepRow { seed, lhs: gap.lhs, rhs: gap.rhs, margin: gap.rhs - gap.lhs })
        }
        SweepKind::Cfl1 | SweepKind::Aldaz => {
            let h1 = unit(a, r);
            let h2 = if near {
                let d = duality_map(&h1, r)?;
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                unit(d.iter().zip(&noise).map(|(x, n)| sign * x + eps * n).collect(), rp)
            } else {
                unit(noise, rp)
            };
            if kind == SweepKind::Cfl1 {
                let gap = cfl1_gap(&h1, &h2, r)?;
                Ok(SweepRow { seed, lhs: gap.pairing, rhs: gap.bound, margin: gap.bound - gap.pairing })
            } else {
                let a = aldaz_ratio(&h1, &h2, r)?;
                Ok(SweepRow { seed, lhs: a.numerator, rhs: a.denominator, margin: a.ratio })
            }
        }
    }
}

/// Runs `trials` independent trials seeded `seed, seed+1, …` in parallel.
pub fn sweep(kind: SweepKind, r: f64, trials: usize, seed: u64) -> Result<SweepReport> {
    match kind {
        SweepKind::Cfl3 if !(r >= 1.0) => return Err(domain("CFL-3 sweep needs r ≥ 1")),
        SweepKind::Cfl1 if !(r >= 2.0) => return Err(domain("CFL-1 sweep needs r ≥ 2")),
        SweepKind::Aldaz if !(r > 1.0) => return Err(domain("Aldaz sweep needs r > 1")),
        _ => {}
    }
    let rows = (0..trials as u64)
        .into_par_iter()
        .map(|i| sweep_trial(kind, r, seed.wrapping_add(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { kind, r, rows })
}

/// Golden-section search for the minimum of a convex function on [a, b];
/// returns the smallest value seen, endpoints included.
pub fn minimize_convex(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let edge = f(a).min(f(b));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-15 * b.abs().max(1e-300) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    edge.min(fc).min(fd)
}

/// min over μ ≥ 0 of ‖g − μs‖_p.
pub fn ray_distance(g: &[f64], s: &[f64], p: f64) -> f64 {
    let sn = lp_norm(s, p);
    if sn == 0.0 {
        return lp_norm(g, p);
    }
    // Convex in μ; beyond 2‖g‖/‖s‖ the value exceeds the one at μ = 0.
    minimize_convex(|mu| lp_norm(&sub(g, &scaled(s, mu)), p), 0.0, 2.0 * lp_norm(g, p) / sn)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStabilityReport {
    pub operator_norm: f64,
    /// ‖T‖ − ‖Tg‖_q/‖g‖_p.
    pub deficit: f64,
    /// Relative ℓᵖ distance to the nearest sampled extremiser ray.
    pub dist: f64,
    /// ‖T‖ − ‖T*G‖_{p′}, G = D_q(Tg).
    pub dual_deficit: f64,
    /// ((p−1)/4)‖T*G‖_{p′}‖g − D_{p′}T*G‖_p².
    pub convexity_term: f64,
    /// ‖T*G‖²_{p′}·dist(D_{p′}T*G, M(T))².
    pub transfer_term: f64,
    /// ‖T*G‖_{p′}/‖T‖, at least 1/2 in the local regime.
    pub dual_norm_ratio: f64,
    /// deficit ≥ dual_deficit + convexity_term.
    pub chain_holds: bool,
    /// deficit/dist², absent when dist = 0.
    pub implied_constant: Option<f64>,
    /// (p−1)/4·‖T‖.
    pub reference_constant: f64,
}

/// Evaluates each link of the duality chain at g, for p ≤ 2.
pub fn local_stability_pipeline(
    t: &FiniteOperator,
    g: &[f64],
    extremiser_samples: &[Vec<f64>],
) -> Result<LocalStabilityReport> {
    let (p, q, pp) = (t.p, t.q, t.p_prime());
    if p > 2.0 {
        return Err(domain(format!("local pipeline needs p ≤ 2, got {p}")));
    }
    if extremiser_samples.is_empty() {
        return Err(domain("no extremiser samples"));
    }
    let gn_norm = lp_norm(g, p);
    if gn_norm == 0.0 {
        return Err(domain("g must be nonzero"));
    }
    let g = scaled(g, 1.0 / gn_norm);
    let norm = extremiser_samples.iter().map(|s| t.ratio(s)).fold(0.0, f64::max);
    let deficit = norm - lp_norm(&t.apply(&g), q);
    let dist = extremiser_samples.iter().map(|s| ray_distance(&g, s, p)).fold(f64::INFINITY, f64::min);
    if dist >= LOCAL_RADIUS {
        return Err(Error::OutOfRegime(dist));
    }
    let big_g = duality_map(&t.apply(&g), q)?;
    let h = t.apply_adjoint(&big_g);
    let h_norm = lp_norm(&h, pp);
    let dh = duality_map(&h, pp)?;
    let dual_deficit = norm - h_norm;
    let convexity_term = (p - 1.0) / 4.0 * h_norm * lp_norm(&sub(&g, &dh), p).powi(2);
    let dh_dist = extremiser_samples.iter().map(|s| ray_distance(&dh, s, p)).fold(f64::INFINITY, f64::min);
    Ok(LocalStabilityReport {
        operator_norm: norm,
        deficit,
        dist,
        dual_deficit,
        convexity_term,
        transfer_term: h_norm * h_norm * dh_dist * dh_dist,
        dual_norm_ratio: h_norm / norm,
        chain_holds: deficit >= dual_deficit + convexity_term - 1e-12,
        implied_constant: (dist > 0.0).then(|| deficit / (dist * dist)),
        reference_constant: (p - 1.0) / 4.0 * norm,
    })
}

/// One row of the interval counterexample h1 ≡ 1, h2 = (1−δ)^{−2/r′}·1_{(0,(1−δ)²)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaRow {
    pub delta: f64,
    /// ‖h1 − h2^{r′−1}‖_r^σ.
    pub norm_power: f64,
    /// ‖h1^{r/2} − h2^{r′/2}‖₂², equal to 2δ.
    pub square_gap: f64,
    /// norm_power / (2δ).
    pub ratio: f64,
    /// |square_gap − 2δ|.
    pub identity_defect: f64,
    /// Gap between the direct r-th power and the factored closed form.
    pub closed_form_defect: f64,
}

/// A step function on [0, 1]; norms are exact sums over the steps.
struct Steps {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl Steps {
    fn integral_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.breaks.windows(2).zip(&self.values).map(|(w, &v)| (w[1] - w[0]) * f(v)).sum()
    }

    fn lp_norm(&self, p: f64) -> f64 {
        self.integral_of(|v| v.abs().powf(p)).powf(1.0 / p)
    }
}

pub fn sigma_counterexample(r: f64, sigma: f64, deltas: &[f64]) -> Result<Vec<SigmaRow>> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(domain(format!("r must lie in (1, ∞), got {r}")));
    }
    let rp = conjugate(r);
    deltas
        .iter()
        .map(|&delta| {
            if !(delta > 0.0 && delta < 0.5) {
                return Err(domain(format!("δ must lie in (0, 1/2), got {delta}")));
            }
            let a = (1.0 - delta) * (1.0 - delta);
            let breaks = vec![0.0, a, 1.0];
            let h1 = Steps { breaks: breaks.clone(), values: vec![1.0, 1.0] };
            let h2 = Steps { breaks: breaks.clone(), values: vec![(1.0 - delta).powf(-2.0 / rp), 0.0] };
            for (what, norm) in [("h1 in L^r", h1.lp_norm(r)), ("h2 in L^r′", h2.lp_norm(rp))] {
                let defect = (norm - 1.0).abs();
                if defect > 1e-13 {
                    return Err(Error::Inconsistency(format!("{what} has norm {norm} (defect {defect:e})")));
                }
            }
            let gap = Steps {
                breaks: breaks.clone(),
                values: h2.values.iter().map(|v| v.powf(rp / 2.0)).collect(),
            };
            let square_gap = gap.integral_of(|v| (1.0 - v).powi(2));
            let diff = Steps { breaks, values: h2.values.iter().map(|v| v.powf(rp - 1.0)).collect() };
            let rth_power = diff.integral_of(|v| (1.0 - v).abs().powf(r));
            let factored = a
                * ((1.0 - (1.0 - delta).powf(-2.0 / r)).abs().powf(r) + (1.0 - delta).powi(-2) - 1.0);
            let norm_power = rth_power.powf(sigma / r);
            Ok(SigmaRow {
                delta,
                norm_power,
                square_gap,
                ratio: norm_power / (2.0 * delta),
                identity_defect: (square_gap - 2.0 * delta).abs(),
                closed_form_defect: (rth_power - factored).abs(),
            })
        })
        .collect()
}

/// Inverse stereographic projection R^{n−1} → S^{n−1} from the north pole,
/// with its jacobian (2/(1+|x|²))^{n−1}.
pub fn stereographic(x: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len() + 1;
    let s = dot(x, x);
    if s.is_infinite() {
        let mut pole = vec![0.0; n];
        pole[n - 1] = -1.0;
        return (pole, 0.0);
    }
    let d = 1.0 + s;
    let mut omega: Vec<f64> = x.iter().map(|v| 2.0 * v / d).collect();
    omega.push((1.0 - s) / d);
    (omega, (2.0 / d).powi(x.len() as i32))
}

/// 2|x−y|²/((1+|x|²)(1+|y|²)), the flat form of 1 − π⁻¹x·π⁻¹y.
pub fn chordal_kernel_flat(x: &[f64], y: &[f64]) -> f64 {
    let d = sub(x, y);
    2.0 * dot(&d, &d) / ((1.0 + dot(x, x)) * (1.0 + dot(y, y)))
}

/// 𝒫G(x) = J(x)^{1/q′}·G(π⁻¹x).
pub fn pushforward(g: &dyn Fn(&[f64]) -> f64, x: &[f64], q_prime: f64) -> f64 {
    let (omega, jac) = stereographic(x);
    jac.powf(1.0 / q_prime) * g(&omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryCheck {
    pub sphere_norm: f64,
    pub flat_norm: f64,
    /// Estimated absolute quadrature errors of the q′-th powers.
    pub sphere_error: f64,
    pub flat_error: f64,
}

impl IsometryCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.sphere_norm - self.flat_norm).abs() / self.sphere_norm.abs().max(f64::MIN_POSITIVE)
    }
}

const PUSH_TOL: f64 = 1e-9;
const PUSH_PANELS: usize = 4000;

fn adaptive(f: impl FnMut(f64) -> f64, a: f64, b: f64) -> crate::quad::Estimate {
    integrate_adaptive(f, a, b, 8, PUSH_TOL, PUSH_PANELS)
}

/// Compares ‖G‖_{L^{q′}(S^{n−1})} with ‖𝒫G‖_{L^{q′}(R^{n−1})} for n ∈ {2, 3}.
/// The flat integral is split at |x| = 1 and the outer part mapped by x = 1/u.
pub fn pushforward_isometry(
    n: usize,
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    q_prime: f64,
) -> Result<IsometryCheck> {
    if !(q_prime >= 1.0 && q_prime.is_finite()) {
        return Err(domain(format!("q′ must lie in [1, ∞), got {q_prime}")));
    }
    let pw = |v: f64| v.abs().powf(q_prime);
    let flat = |x: &[f64]| pw(pushforward(g, x, q_prime));
    let (sphere, flat_side) = match n {
        2 => {
            let sphere = adaptive(|t| pw(g(&[t.cos(), t.sin()])), 0.0, 2.0 * PI);
            let inner = adaptive(|x| flat(&[x]), -1.0, 1.0);
            // ∫_{|x|>1} F(x) dx = ∫_0^1 (F(1/u) + F(−1/u)) du/u².
            let outer = adaptive(
                |u| {
                    if u == 0.0 {
                        return 0.0;
                    }
                    (flat(&[1.0 / u]) + flat(&[-1.0 / u])) / (u * u)
                },
                0.0,
                1.0,
            );
            let flat_side = crate::quad::Estimate {
                value: inner.value + outer.value,
                error: inner.error + outer.error,
            };
            (sphere, flat_side)
        }
        3 => {
            let ring = |f: &dyn Fn(f64) -> f64| adaptive(f, 0.0, 2.0 * PI);
            let mut inner_err = 0.0;
            let sphere = adaptive(
                |z| {
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let e = ring(&|phi| pw(g(&[rho * phi.cos(), rho * phi.sin(), z])));
                    inner_err += e.error;
                    e.value
                },
                -1.0,
                1.0,
            );
            let mut flat_err = 0.0;
            let inner = adaptive(
                |rho| {
                    let e = ring(&|phi| flat(&[rho * phi.cos(), rho * phi.sin()]));
                    flat_err += e.error * rho;
                    rho * e.value
                },
                0.0,
                1.0,
            );
            let outer = adaptive(
                |u| {
                    if u == 0.0 {
                        return 0.0;
                    }
                    let rho = 1.0 / u;
                    let e = ring(&|phi| flat(&[rho * phi.cos(), rho * phi.sin()]));
                    flat_err += e.error * rho / (u * u);
                    rho * e.value / (u * u)
                },
                0.0,
                1.0,
            );
            let sphere = crate::quad::Estimate { value: sphere.value, error: sphere.error + inner_err.min(1.0) };
            let flat_side = crate::quad::Estimate {
                value: inner.value + outer.value,
                error: inner.error + outer.error,
            };
            (sphere, flat_side)
        }
        _ => return Err(Error::Unsupported(format!("pushforward check implemented for n ∈ {{2, 3}}, got {n}"))),
    };
    let check = IsometryCheck {
        sphere_norm: sphere.value.powf(1.0 / q_prime),
        flat_norm: flat_side.value.powf(1.0 / q_prime),
        sphere_error: sphere.error,
        flat_error: flat_side.error,
    };
    let scale = sphere.value.abs().max(1e-300);
    if sphere.error > 1e-6 * scale || flat_side.error > 1e-6 * scale {
        return Err(Error::Convergence(format!(
            "isometry quadrature unresolved: sphere {:.3e} ± {:.1e}, flat {:.3e} ± {:.1e}",
            sphere.value, sphere.error, flat_side.value, flat_side.error
        )));
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duality_map_pairs_to_the_norm() {
        let f = [1.0, -2.0, 0.0, 0.5];
        for r in [1.2, 2.0, 3.5] {
            let d = duality_map(&f, r).unwrap();
            assert!((lp_norm(&d, conjugate(r)) - 1.0).abs() < 1e-14);
            assert!((dot(&f, &d) - lp_norm(&f, r)).abs() < 1e-13);
        }
        assert!(duality_map(&[0.0, 0.0], 2.0).is_err());
    }

    #[test]
    fn adjoint_swaps_exponents() {
        let t = FiniteOperator::random_nonnegative(2, 3, 1.5, 3.0, 1).unwrap();
        let a = t.adjoint();
        assert_eq!((a.rows(), a.cols()), (3, 2));
        assert!((a.p() - 1.5).abs() < 1e-15 && (a.q() - 3.0).abs() < 1e-15);
        assert_eq!(a.adjoint(), t);
    }

    #[test]
    fn components_split_block_diagonal_support() {
        let t = FiniteOperator::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 3.0]], 1.5, 2.0).unwrap();
        let comps = t.support_components();
        assert_eq!(comps, vec![(vec![0], vec![0]), (vec![1], vec![1, 2])]);
    }

    #[test]
    fn ray_distance_finds_the_projection() {
        let g = [1.0, 1.0];
        let s = [1.0, 0.0];
        assert!((ray_distance(&g, &s, 2.0) - 1.0).abs() < 1e-12);
        assert!((ray_distance(&[-1.0, 0.0], &s, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stereographic_north_pole() {
        let (w, j) = stereographic(&[0.0, 0.0]);
        assert_eq!(w, vec![0.0, 0.0, 1.0]);
        assert_eq!(j, 4.0);
    }
}
