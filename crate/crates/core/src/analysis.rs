//! Exact small-`d` verification: stationary laws, spectra, Wasserstein/TV
//! distances, contraction certificates, detailed balance and bound evaluation.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{
    acceptance_potential, dups_matrix, stage_one_by_distance, stage_two_table, KernelMatrix,
    Sampler, DMAPS_DIM_CAP,
};
use crate::math::sigmoid;
use crate::models::{DistVector, TargetModel};
use crate::scores::{beta_constants, min_alignment, ScoreField, ScoreKind};
use crate::DENSE_DIM_CAP;

/// Target residual `‖πᵀt - πᵀ‖₁` for [`stationary`].
pub const STATIONARY_TOL: f64 = 1e-13;
/// Largest dimension for which the elimination route is used (`O(8^d)`).
pub const GTH_DIM_CAP: usize = 11;
/// Largest dimension for a contraction certificate.
pub const CERTIFICATE_DIM_CAP: usize = 8;
/// Largest dimension for the exhaustive all-pairs certificate check.
pub const ALL_PAIRS_DIM_CAP: usize = 5;
/// Largest dimension for the naive full-sum Metropolis oracle.
pub const NAIVE_MH_DIM_CAP: usize = 6;
/// Reported relaxation time when `1 - λ2` is below double resolution.
pub const T_REL_CAP: f64 = 1e15;
/// Detailed-balance residual under which a kernel is treated as reversible.
pub const REVERSIBLE_TOL: f64 = 1e-10;

fn dist(values: Vec<f64>) -> DistVector {
    DistVector::from_raw(values)
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    let z: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= z);
    v
}

fn left_apply(pi: &[f64], t: &KernelMatrix) -> Vec<f64> {
    let n = t.n();
    let mut out = vec![0.0; n];
    for (x, &w) in pi.iter().enumerate() {
        if w != 0.0 {
            for (o, &v) in out.iter_mut().zip(t.row(x)) {
                *o += w * v;
            }
        }
    }
    out
}

/// `‖πᵀt - πᵀ‖₁`.
pub fn stationary_residual(pi: &[f64], t: &KernelMatrix) -> f64 {
    left_apply(pi, t)
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .sum()
}

/// Stationary distribution of an irreducible kernel.
///
/// Grassmann–Taksar–Heyman elimination (subtraction-free, so accurate even
/// when `I - t` is nearly singular), polished by power steps until the
/// residual is below [`STATIONARY_TOL`]. Above [`GTH_DIM_CAP`] only power
/// iteration is used.
pub fn stationary(t: &KernelMatrix) -> Result<DistVector> {
    let pi = if t.dim() <= GTH_DIM_CAP {
        gth(t)?
    } else {
        return stationary_power(t, 1_000_000);
    };
    polish(t, pi, 200)
}

fn polish(t: &KernelMatrix, mut pi: Vec<f64>, max_steps: usize) -> Result<DistVector> {
    let mut res = stationary_residual(&pi, t);
    let mut steps = 0;
    while res > STATIONARY_TOL && steps < max_steps {
        let next = normalize(left_apply(&pi, t));
        let r = stationary_residual(&next, t);
        if r >= res {
            break;
        }
        pi = next;
        res = r;
        steps += 1;
    }
    if res > STATIONARY_TOL {
        return Err(Error::Numerical {
            routine: "stationary",
            detail: "residual target not reached".into(),
            residual: res,
        });
    }
    Ok(dist(pi))
}

fn gth(t: &KernelMatrix) -> Result<Vec<f64>> {
    let n = t.n();
    let mut a = t.entries().to_vec();
    let mut mass = vec![0.0; n];
    for k in (1..n).rev() {
        let (upper, rest) = a.split_at_mut(k * n);
        let row_k = &rest[..k];
        let s: f64 = row_k.iter().sum();
        if !(s > 0.0) {
            return Err(Error::Numerical {
                routine: "stationary",
                detail: format!("kernel is reducible (state {k} cannot reach lower states)"),
                residual: f64::NAN,
            });
        }
        mass[k] = s;
        let scaled: Vec<f64> = row_k.iter().map(|v| v / s).collect();
        upper.par_chunks_mut(n).for_each(|row| {
            let f = row[k];
            if f != 0.0 {
                for (r, &v) in row[..k].iter_mut().zip(&scaled) {
                    *r += f * v;
                }
            }
        });
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        let mut acc = 0.0;
        for i in 0..k {
            acc += pi[i] * a[i * n + k];
        }
        pi[k] = acc / mass[k];
    }
    Ok(normalize(pi))
}

/// Lazy power iteration `π ← ½(π + πt)` from the uniform law.
pub fn stationary_power(t: &KernelMatrix, max_iter: usize) -> Result<DistVector> {
    let n = t.n();
    let mut pi = vec![1.0 / n as f64; n];
    let mut res = f64::INFINITY;
    for _ in 0..max_iter {
        let next = left_apply(&pi, t);
        pi = normalize(pi.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect());
        res = stationary_residual(&pi, t);
        if res <= STATIONARY_TOL {
            return Ok(dist(pi));
        }
    }
    Err(Error::Numerical {
        routine: "stationary_power",
        detail: format!("no convergence in {max_iter} iterations"),
        residual: res,
    })
}

/// Direct solve of `(I - tᵀ)π = 0, Σπ = 1` by LU.
pub fn stationary_direct(t: &KernelMatrix) -> Result<DistVector> {
    let n = t.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            a[(y, x)] = if x == y { 1.0 } else { 0.0 } - t.get(x, y);
        }
    }
    for x in 0..n {
        a[(n - 1, x)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let sol = a.lu().solve(&b).ok_or_else(|| Error::Numerical {
        routine: "stationary_direct",
        detail: "singular system".into(),
        residual: f64::NAN,
    })?;
    Ok(dist(normalize(sol.iter().copied().collect())))
}

pub fn tv_distance(p: &DistVector, q: &DistVector) -> f64 {
    tv_slices(p.values(), q.values())
}

pub fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `max_{x,y} |p(x) t(y|x) - p(y) t(x|y)|`.
pub fn detailed_balance_residual(t: &KernelMatrix, p: &DistVector) -> f64 {
    let n = t.n();
    (0..n)
        .into_par_iter()
        .map(|x| {
            (x + 1..n)
                .map(|y| (p[x] * t.get(x, y) - p[y] * t.get(y, x)).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSummary {
    /// Second-largest eigenvalue modulus.
    pub lambda2: f64,
    /// `1 / (1 - λ2)`, or [`T_REL_CAP`] when `capped`.
    pub t_rel: f64,
    pub reversible: bool,
    pub capped: bool,
}

impl SpectralSummary {
    fn from_lambda2(lambda2: f64, reversible: bool) -> Self {
        let gap = 1.0 - lambda2;
        let capped = !(gap > 1.0 / T_REL_CAP);
        SpectralSummary {
            lambda2,
            t_rel: if capped { T_REL_CAP } else { 1.0 / gap },
            reversible,
            capped,
        }
    }
}

pub fn spectral_summary(t: &KernelMatrix) -> Result<SpectralSummary> {
    let pi = stationary(t)?;
    spectral_summary_with(t, &pi)
}

/// As [`spectral_summary`], reusing a stationary law computed elsewhere.
pub fn spectral_summary_with(t: &KernelMatrix, pi: &DistVector) -> Result<SpectralSummary> {
    Error::check_cap("spectral_summary", t.dim(), DENSE_DIM_CAP)?;
    let reversible = detailed_balance_residual(t, pi) <= REVERSIBLE_TOL;
    let mut moduli: Vec<f64> = if reversible {
        symmetrized_eigenvalues(t, pi).iter().map(|v| v.abs()).collect()
    } else {
        general_eigenvalues(t.entries(), t.n())?
            .iter()
            .map(|(re, im)| re.hypot(*im))
            .collect()
    };
    moduli.sort_by(|a, b| b.total_cmp(a));
    let lambda2 = moduli.get(1).copied().unwrap_or(0.0).min(1.0);
    Ok(SpectralSummary::from_lambda2(lambda2, reversible))
}

/// Eigenvalues of the symmetric matrix `D^{1/2} t D^{-1/2}`, `D = diag(π)`.
pub fn symmetrized_eigenvalues(t: &KernelMatrix, pi: &DistVector) -> Vec<f64> {
    let n = t.n();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            let flux = 0.5 * (pi[x] * t.get(x, y) + pi[y] * t.get(y, x));
            s[(x, y)] = flux / (pi[x] * pi[y]).sqrt();
        }
    }
    s.symmetric_eigenvalues().iter().copied().collect()
}

/// Eigenvalues `(re, im)` of a dense real row-major `n x n` matrix:
/// Householder reduction to Hessenberg form, then Francis double-shift QR.
pub fn general_eigenvalues(a: &[f64], n: usize) -> Result<Vec<(f64, f64)>> {
    let mut h = a.to_vec();
    hessenberg(&mut h, n);
    hessenberg_qr(&mut h, n)
}

fn hessenberg(a: &mut [f64], n: usize) {
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let col = |r: usize| a[(k + 1 + r) * n + k];
        let norm = (0..m).map(|r| col(r) * col(r)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if col(0) > 0.0 { -norm } else { norm };
        for r in 0..m {
            v[r] = col(r);
        }
        v[0] -= alpha;
        let vn = (0..m).map(|r| v[r] * v[r]).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        v[..m].iter_mut().for_each(|x| *x /= vn);
        // A <- (I - 2vvᵀ) A on rows k+1..n
        w[k..n].iter_mut().for_each(|x| *x = 0.0);
        for r in 0..m {
            let row = &a[(k + 1 + r) * n..(k + 2 + r) * n];
            for j in k..n {
                w[j] += v[r] * row[j];
            }
        }
        for r in 0..m {
            let f = 2.0 * v[r];
            let row = &mut a[(k + 1 + r) * n..(k + 2 + r) * n];
            for j in k..n {
                row[j] -= f * w[j];
            }
        }
        // A <- A (I - 2vvᵀ) on columns k+1..n
        for i in 0..n {
            let row = &mut a[i * n..(i + 1) * n];
            let dot: f64 = (0..m).map(|r| row[k + 1 + r] * v[r]).sum();
            let f = 2.0 * dot;
            for r in 0..m {
                row[k + 1 + r] -= f * v[r];
            }
        }
        a[(k + 1) * n + k] = alpha;
        for r in 1..m {
            a[(k + 1 + r) * n + k] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by implicit double-shift QR
/// with exceptional shifts; the matrix is destroyed.
fn hessenberg_qr(h: &mut [f64], n: usize) -> Result<Vec<(f64, f64)>> {
    const MAX_ITS: usize = 60;
    // 1-based accessors keep the index arithmetic close to the textbook form
    macro_rules! a {
        ($i:expr, $j:expr) => {
            h[($i - 1) * n + ($j - 1)]
        };
    }
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a!(i, j).abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a!(l - 1, l - 1).abs() + a!(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a!(l, l - 1).abs() + s == s {
                    a!(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a!(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a!(nn - 1, nn - 1);
            let mut w = a!(nn, nn - 1) * a!(nn - 1, nn);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITS {
                return Err(Error::Numerical {
                    routine: "hessenberg_qr",
                    detail: format!("no deflation after {MAX_ITS} iterations at n = {nn}"),
                    residual: a!(nn, nn - 1).abs(),
                });
            }
            if its == 10 || its == 20 || its == 40 {
                t += x;
                for i in 1..=nn {
                    a!(i, i) -= x;
                }
                let s = a!(nn, nn - 1).abs() + a!(nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r);
            let mut m = nn - 2;
            loop {
                let z = a!(m, m);
                let r0 = x - z;
                let s0 = y - z;
                p = (r0 * s0 - w) / a!(m + 1, m) + a!(m, m + 1);
                q = a!(m + 1, m + 1) - z - r0 - s0;
                r = a!(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a!(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (a!(m - 1, m - 1).abs() + z.abs() + a!(m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a!(i, i - 2) = 0.0;
                if i != m + 2 {
                    a!(i, i - 3) = 0.0;
                }
            }
            let mut k = m;
            while k <= nn - 1 {
                if k != m {
                    p = a!(k, k - 1);
                    q = a!(k + 1, k - 1);
                    r = 0.0;
                    if k != nn - 1 {
                        r = a!(k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a!(k, k - 1) = -a!(k, k - 1);
                        }
                    } else {
                        a!(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = a!(k, j) + q * a!(k + 1, j);
                        if k != nn - 1 {
                            pp += r * a!(k + 2, j);
                            a!(k + 2, j) -= pp * z;
                        }
                        a!(k + 1, j) -= pp * y;
                        a!(k, j) -= pp * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a!(i, k) + y * a!(i, k + 1);
                        if k != nn - 1 {
                            pp += z * a!(i, k + 2);
                            a!(i, k + 2) -= pp * r;
                        }
                        a!(i, k + 1) -= pp * q;
                        a!(i, k) -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok((1..=n).map(|i| (wr[i], wi[i])).collect())
}

/// Exact 1-Wasserstein distance under the Hamming metric.
pub fn wasserstein_hamming(p: &DistVector, q: &DistVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Contract("distributions have different dimensions".into()));
    }
    wasserstein_slices(p.values(), q.values(), p.dim())
}

/// Capacities below this are treated as saturated; the cost error this can
/// introduce is at most `d 2^d` times it.
const FLOW_EPS: f64 = 1e-17;

struct Arc {
    to: usize,
    cap: f64,
    cost: i64,
}

/// Min-cost flow on the hypercube graph with supplies `p - q`.
///
/// Hamming distance is the shortest-path metric of the hypercube with unit
/// edge costs, so the transport problem reduces to a flow on `d 2^{d-1}`
/// edges. Primal–dual: each phase computes reduced-cost distances with
/// Dijkstra and then pushes a blocking flow (Dinic) along zero-reduced-cost
/// arcs. Any residual S–T path costs at most `d`, so there are at most `d`
/// phases.
pub fn wasserstein_slices(p: &[f64], q: &[f64], dim: usize) -> Result<f64> {
    let n = p.len();
    if q.len() != n || n != 1usize << dim {
        return Err(Error::Contract("distribution lengths do not match 2^d".into()));
    }
    let imbalance: f64 = p.iter().sum::<f64>() - q.iter().sum::<f64>();
    if imbalance.abs() > 1e-10 {
        return Err(Error::Contract(format!("unbalanced supplies: Σp - Σq = {imbalance:e}")));
    }
    let src = n;
    let snk = n + 1;
    let mut arcs: Vec<Arc> = Vec::with_capacity(4 * n * dim + 2 * n);
    let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(2 * dim + 2); n + 2];
    let add = |arcs: &mut Vec<Arc>, adj: &mut Vec<Vec<usize>>, u: usize, v: usize, cap: f64, cost: i64| {
        adj[u].push(arcs.len());
        arcs.push(Arc { to: v, cap, cost });
        adj[v].push(arcs.len());
        arcs.push(Arc { to: u, cap: 0.0, cost: -cost });
    };
    let mut supply = 0.0;
    for x in 0..n {
        let b = p[x] - q[x];
        if b > FLOW_EPS {
            add(&mut arcs, &mut adj, src, x, b, 0);
            supply += b;
        } else if b < -FLOW_EPS {
            add(&mut arcs, &mut adj, x, snk, -b, 0);
        }
    }
    if supply == 0.0 {
        return Ok(0.0);
    }
    for x in 0..n {
        for i in 0..dim {
            add(&mut arcs, &mut adj, x, x ^ (1 << i), f64::INFINITY, 1);
        }
    }

    let nodes = n + 2;
    let mut pot = vec![0i64; nodes];
    let mut cost = 0.0;
    let mut level = vec![usize::MAX; nodes];
    let mut iter = vec![0usize; nodes];
    loop {
        // reduced-cost shortest distances
        let mut d = vec![i64::MAX; nodes];
        d[src] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, src)));
        while let Some(Reverse((du, u))) = heap.pop() {
            if du > d[u] {
                continue;
            }
            for &e in &adj[u] {
                let a = &arcs[e];
                if a.cap > FLOW_EPS {
                    let nd = du + a.cost + pot[u] - pot[a.to];
                    if nd < d[a.to] {
                        d[a.to] = nd;
                        heap.push(Reverse((nd, a.to)));
                    }
                }
            }
        }
        if d[snk] == i64::MAX {
            break;
        }
        let dt = d[snk];
        for v in 0..nodes {
            pot[v] += d[v].min(dt);
        }
        let path_cost = (pot[snk] - pot[src]) as f64;

        // blocking flows on the admissible subgraph
        let admissible = |arcs: &[Arc], pot: &[i64], u: usize, e: usize| {
            let a = &arcs[e];
            a.cap > FLOW_EPS && a.cost + pot[u] - pot[a.to] == 0
        };
        loop {
            level.iter_mut().for_each(|l| *l = usize::MAX);
            level[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                for &e in &adj[u] {
                    let v = arcs[e].to;
                    if level[v] == usize::MAX && admissible(&arcs, &pot, u, e) {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[snk] == usize::MAX {
                break;
            }
            iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = augment(&mut arcs, &adj, &pot, &level, &mut iter, src, snk, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                cost += f * path_cost;
            }
        }
    }
    Ok(cost)
}

#[allow(clippy::too_many_arguments)]
fn augment(
    arcs: &mut [Arc],
    adj: &[Vec<usize>],
    pot: &[i64],
    level: &[usize],
    iter: &mut [usize],
    u: usize,
    snk: usize,
    limit: f64,
) -> f64 {
    if u == snk {
        return limit;
    }
    while iter[u] < adj[u].len() {
        let e = adj[u][iter[u]];
        let v = arcs[e].to;
        let ok = arcs[e].cap > FLOW_EPS
            && level[v] == level[u] + 1
            && arcs[e].cost + pot[u] - pot[v] == 0;
        if ok {
            let f = augment(arcs, adj, pot, level, iter, v, snk, limit.min(arcs[e].cap));
            if f > 0.0 {
                arcs[e].cap -= f;
                arcs[e ^ 1].cap += f;
                return f;
            }
        }
        iter[u] += 1;
    }
    0.0
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionCertificate {
    /// `max` over Hamming-adjacent pairs of `W(t(·|x), t(·|y))`.
    pub kappa: f64,
    pub witness: (usize, usize),
    /// `(x, y, W)` for every adjacent pair with `x < y`.
    pub pairs: Vec<(usize, usize, f64)>,
}

pub fn contraction_certificate(t: &KernelMatrix) -> Result<ContractionCertificate> {
    let d = t.dim();
    Error::check_cap("contraction_certificate", d, CERTIFICATE_DIM_CAP)?;
    let n = t.n();
    let list: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| (0..d).filter(move |i| x >> i & 1 == 0).map(move |i| (x, x | 1 << i)))
        .collect();
    let pairs = list
        .par_iter()
        .map(|&(x, y)| Ok((x, y, wasserstein_slices(t.row(x), t.row(y), d)?)))
        .collect::<Result<Vec<_>>>()?;
    let (mut kappa, mut witness) = (0.0, (0, 0));
    for &(x, y, w) in &pairs {
        if w > kappa {
            kappa = w;
            witness = (x, y);
        }
    }
    Ok(ContractionCertificate {
        kappa,
        witness,
        pairs,
    })
}

/// `max_{x≠y} W(t(·|x), t(·|y)) / ℓ(x, y)` over all pairs, with the witness.
pub fn all_pairs_ratio(t: &KernelMatrix) -> Result<(f64, (usize, usize))> {
    let d = t.dim();
    Error::check_cap("all_pairs_ratio", d, ALL_PAIRS_DIM_CAP)?;
    let n = t.n();
    let mut best = (0.0, (0, 0));
    for x in 0..n {
        for y in x + 1..n {
            let r = wasserstein_slices(t.row(x), t.row(y), d)? / (x ^ y).count_ones() as f64;
            if r > best.0 {
                best = (r, (x, y));
            }
        }
    }
    Ok(best)
}

/// A theorem's bound value with whether its preconditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    pub applies: bool,
    /// Rate `>= 1`, or distance bound `>= d` (the Hamming diameter).
    pub vacuous: bool,
}

impl Bound {
    fn rate(value: f64, applies: bool) -> Self {
        Bound {
            value,
            applies,
            vacuous: value >= 1.0,
        }
    }

    fn distance(value: f64, applies: bool, d: usize) -> Self {
        Bound {
            value,
            applies,
            vacuous: !(value < d as f64),
        }
    }
}

/// Precondition flags, evaluated from the computed constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionFlags {
    /// `d β2 <= 1`, with the Glauber-score `β2` (damped Gibbs uses `δ log p`).
    pub d_beta2_le_1: bool,
    pub four_d_beta2_le_1: bool,
    pub eight_d_beta2_le_1: bool,
    pub two_d_beta2_le_exp_neg_beta1: bool,
    pub four_d_beta2_exp_4beta1_le_1: bool,
    /// `e^{-2/η} <= 1/d`.
    pub step_le_inv_d: bool,
    /// `min_{x,i} x_i s(x)_i >= -1/(2η)`.
    pub alignment: bool,
    /// `4 d β2 <= e^{-4β1}` (full Lipschitz `β2`) and `e^{-2/η-2β1} <= 1/d`.
    pub dups_static: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub dim: usize,
    pub eta: f64,
    pub score: ScoreKind,
    pub beta1: f64,
    pub beta2: f64,
    pub beta2_full: f64,
    pub glauber_beta1: f64,
    pub glauber_beta2: f64,
    pub min_alignment: f64,
    pub flags: ConditionFlags,
    /// Damped Gibbs: `1 - e^{-2/η}(1 - dβ2)`.
    pub gibbs_rate: Bound,
    /// DULA on regular targets: `1 - ½ e^{-2/η - β1}`.
    pub dula_rate: Bound,
    /// DULA with the Gibbs score, small steps: `1 - ¼ e^{-2/η}`.
    pub dula_small_step_rate: Bound,
    /// DUPS on regular targets: `1 - 2σ(-2/η)`.
    pub dups_rate: Bound,
    /// DUPS, small steps: `1 - ½ e^{-1/η}`.
    pub dups_small_step_rate: Bound,
    /// DULA with the Gibbs score: `4d / (1 + e^{2/η})`.
    pub dula_error: Bound,
    /// DUPS with the Glauber score: `(d³/2)(1 + e^{-1/η})^{d-1} e^{-1/η}`.
    pub dups_error: Bound,
    /// `2d(2dβ1 e^{2β1} + √(dβ1 e^{2β1}))`.
    pub dula_static_error: Bound,
    /// `12 d √(β2 d)`, full Lipschitz `β2`.
    pub dups_static_error: Bound,
    /// Lipschitz constant of the DMAPS acceptance rate.
    pub dmaps_l: f64,
    /// Acceptance deficit `δ` as derived from the Cauchy–Schwarz step.
    pub dmaps_delta: f64,
    /// The closed-form `δ` with the sign pattern `σ(2/η)` as usually printed.
    pub dmaps_delta_as_printed: f64,
    /// `1 - ε + δ + L d`, with `1 - ε` the best applicable DUPS rate.
    pub dmaps_rate: Bound,
    pub dmaps_rate_as_printed: f64,
}

/// Evaluates every bound for `(m, score, η)`.
pub fn bounds_report(m: &TargetModel, score: ScoreKind, eta: f64) -> Result<BoundReport> {
    if !(eta > 0.0) {
        return Err(Error::Parameter(format!("step size eta must be > 0, got {eta}")));
    }
    let d = m.dim();
    Error::check_cap("bounds_report", d, DENSE_DIM_CAP)?;
    let s = ScoreField::tabulated(score, m)?;
    let c = beta_constants(&s)?;
    let g = if score == ScoreKind::Glauber {
        c
    } else {
        beta_constants(&ScoreField::tabulated(ScoreKind::Glauber, m)?)?
    };
    let align = min_alignment(&s)?;
    let df = d as f64;
    let (b1, b2) = (c.beta1, c.beta2);
    let h = (-2.0 / eta).exp();

    let flags = ConditionFlags {
        d_beta2_le_1: df * g.beta2 <= 1.0,
        four_d_beta2_le_1: 4.0 * df * b2 <= 1.0,
        eight_d_beta2_le_1: 8.0 * df * b2 <= 1.0,
        two_d_beta2_le_exp_neg_beta1: 2.0 * df * b2 <= (-b1).exp(),
        four_d_beta2_exp_4beta1_le_1: 4.0 * df * b2 * (4.0 * b1).exp() <= 1.0,
        step_le_inv_d: h * df <= 1.0,
        alignment: align >= -1.0 / (2.0 * eta),
        dups_static: 4.0 * df * c.beta2_full <= (-4.0 * b1).exp()
            && (-2.0 / eta - 2.0 * b1).exp() <= 1.0 / df,
    };
    let gibbs_score = score == ScoreKind::Gibbs;
    let glauber_score = score == ScoreKind::Glauber;

    let gibbs_rate = Bound::rate(
        1.0 - h * (1.0 - df * g.beta2),
        flags.d_beta2_le_1 && flags.step_le_inv_d,
    );
    let dula_rate = Bound::rate(
        1.0 - 0.5 * (-2.0 / eta - b1).exp(),
        flags.two_d_beta2_le_exp_neg_beta1,
    );
    let dula_small_step_rate = Bound::rate(1.0 - 0.25 * h, gibbs_score && flags.four_d_beta2_le_1);
    let dups_rate = Bound::rate(
        1.0 - 2.0 * sigmoid(-2.0 / eta),
        flags.four_d_beta2_exp_4beta1_le_1,
    );
    let dups_small_step_rate = Bound::rate(
        1.0 - 0.5 * (-1.0 / eta).exp(),
        flags.alignment && flags.eight_d_beta2_le_1,
    );
    let dula_error = Bound::distance(
        4.0 * df / (1.0 + (2.0 / eta).exp()),
        gibbs_score && flags.four_d_beta2_le_1 && flags.step_le_inv_d,
        d,
    );
    let e1 = (-1.0 / eta).exp();
    let dups_error = Bound::distance(
        df.powi(3) / 2.0 * (1.0 + e1).powi(d as i32 - 1) * e1,
        glauber_score && flags.alignment && flags.eight_d_beta2_le_1,
        d,
    );
    let k = df * b1 * (2.0 * b1).exp();
    let dula_static_error = Bound::distance(
        2.0 * df * (2.0 * k + k.sqrt()),
        flags.two_d_beta2_le_exp_neg_beta1,
        d,
    );
    // the static DUPS estimate needs the full Lipschitz constant: with the
    // cross-coordinate one it would vanish for any self-dependent score
    let dups_static_error = Bound::distance(12.0 * df * (c.beta2_full * df).sqrt(), flags.dups_static, d);

    let sig1 = sigmoid(-2.0 / eta);
    let big_s = sig1 + sigmoid(-2.0 / eta + b1);
    let dmaps_l = 6.0 * b1 + 4.0 * df.powf(1.5) * big_s.sqrt() * b2;
    let dmaps_delta =
        1.0 - (-2.0 * b2 * df * df * big_s - 4.0 * b2 * df * df * (sig1 * big_s).sqrt()).exp();
    let sp = sigmoid(2.0 / eta);
    let sq = sigmoid(2.0 / eta - b1);
    let printed_exponent = -2.0 * b2 * df * df * (sp + sq) + 2.0 * (sp * sp + sp * sq).sqrt();
    let dmaps_delta_as_printed = 1.0 - printed_exponent.exp();
    let best_dups = [dups_rate, dups_small_step_rate]
        .into_iter()
        .filter(|b| b.applies)
        .map(|b| b.value)
        .fold(f64::INFINITY, f64::min);
    let (one_minus_eps, eps_known) = if best_dups.is_finite() {
        (best_dups, true)
    } else {
        (dups_rate.value, false)
    };
    let dmaps_rate = Bound::rate(
        one_minus_eps + dmaps_delta + dmaps_l * df,
        eps_known && score == ScoreKind::Stein,
    );
    let dmaps_rate_as_printed = 1.0 + one_minus_eps - printed_exponent.exp()
        + 6.0 * df * b1
        + 4.0 * df.powf(2.5) * big_s.sqrt() * b2;

    Ok(BoundReport {
        dim: d,
        eta,
        score,
        beta1: b1,
        beta2: b2,
        beta2_full: c.beta2_full,
        glauber_beta1: g.beta1,
        glauber_beta2: g.beta2,
        min_alignment: align,
        flags,
        gibbs_rate,
        dula_rate,
        dula_small_step_rate,
        dups_rate,
        dups_small_step_rate,
        dula_error,
        dups_error,
        dula_static_error,
        dups_static_error,
        dmaps_l,
        dmaps_delta,
        dmaps_delta_as_printed,
        dmaps_rate,
        dmaps_rate_as_printed,
    })
}

impl BoundReport {
    /// Contraction-rate bounds that apply to a kernel of this sampler.
    pub fn rate_bounds_for(&self, sampler: Sampler) -> Vec<(&'static str, Bound)> {
        match sampler {
            Sampler::Gibbs => vec![("gibbs_rate", self.gibbs_rate)],
            Sampler::Dula => vec![
                ("dula_rate", self.dula_rate),
                ("dula_small_step_rate", self.dula_small_step_rate),
            ],
            Sampler::Dups => vec![
                ("dups_rate", self.dups_rate),
                ("dups_small_step_rate", self.dups_small_step_rate),
            ],
            Sampler::Dmaps => vec![("dmaps_rate", self.dmaps_rate)],
            Sampler::Dmala | Sampler::Prox => vec![],
        }
    }

    /// Human-readable preconditions of bound `name` that do not hold; empty
    /// exactly when the bound applies. Unknown names yield `None`.
    pub fn unmet_preconditions(&self, name: &str) -> Option<Vec<&'static str>> {
        let f = &self.flags;
        let gibbs = self.score == ScoreKind::Gibbs;
        let glauber = self.score == ScoreKind::Glauber;
        let conds: Vec<(bool, &'static str)> = match name {
            "gibbs_rate" => vec![
                (f.d_beta2_le_1, "d*beta2 <= 1 (Glauber score)"),
                (f.step_le_inv_d, "exp(-2/eta) <= 1/d"),
            ],
            "dula_rate" | "dula_static_error" => {
                vec![(f.two_d_beta2_le_exp_neg_beta1, "2d*beta2 <= exp(-beta1)")]
            }
            "dula_small_step_rate" => vec![
                (gibbs, "requires the Gibbs score"),
                (f.four_d_beta2_le_1, "4d*beta2 <= 1"),
            ],
            "dups_rate" => vec![(f.four_d_beta2_exp_4beta1_le_1, "4d*beta2*exp(4*beta1) <= 1")],
            "dups_small_step_rate" => vec![
                (f.alignment, "min x_i s_i >= -1/(2 eta)"),
                (f.eight_d_beta2_le_1, "8d*beta2 <= 1"),
            ],
            "dula_error" => vec![
                (gibbs, "requires the Gibbs score"),
                (f.four_d_beta2_le_1, "4d*beta2 <= 1"),
                (f.step_le_inv_d, "exp(-2/eta) <= 1/d"),
            ],
            "dups_error" => vec![
                (glauber, "requires the Glauber score"),
                (f.alignment, "min x_i s_i >= -1/(2 eta)"),
                (f.eight_d_beta2_le_1, "8d*beta2 <= 1"),
            ],
            "dups_static_error" => vec![(
                f.dups_static,
                "4d*beta2_full <= exp(-4*beta1) and exp(-2/eta-2*beta1) <= 1/d",
            )],
            "dmaps_rate" => vec![
                (self.score == ScoreKind::Stein, "requires the Stein score"),
                (
                    self.dups_rate.applies || self.dups_small_step_rate.applies,
                    "a DUPS rate bound must apply",
                ),
            ],
            _ => return None,
        };
        Some(conds.into_iter().filter(|c| !c.0).map(|c| c.1).collect())
    }

    /// Bounds on `W(stationary, target)` that apply to this sampler.
    pub fn error_bounds_for(&self, sampler: Sampler) -> Vec<(&'static str, Bound)> {
        match sampler {
            Sampler::Dula => vec![
                ("dula_error", self.dula_error),
                ("dula_static_error", self.dula_static_error),
            ],
            Sampler::Dups => vec![
                ("dups_error", self.dups_error),
                ("dups_static_error", self.dups_static_error),
            ],
            _ => vec![],
        }
    }
}

/// `δ̂ = 1 - min_x E[A_z(x'|x)]`, `z ~ u(·|x)`, `x' ~ v̂(·|z)`, summed exactly.
pub fn dmaps_empirical_delta(m: &TargetModel, s: &ScoreField, eta: f64) -> Result<f64> {
    let d = m.dim();
    Error::check_cap("dmaps_empirical_delta", d, DMAPS_DIM_CAP)?;
    if !(eta > 0.0) {
        return Err(Error::Parameter(format!("step size eta must be > 0, got {eta}")));
    }
    let n = 1usize << d;
    let vhat = stage_two_table(s, eta)?;
    let g = acceptance_potential(m, s)?;
    let u = stage_one_by_distance(d, eta);
    let worst = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = 0.0;
            for z in 0..n {
                let w = u[(x ^ z).count_ones() as usize];
                let gz = &g[z * n..(z + 1) * n];
                let inner: f64 = (0..n)
                    .map(|y| vhat[z * n + y] * (gz[y] - gz[x]).min(0.0).exp())
                    .sum();
                acc += w * inner;
            }
            acc
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok((1.0 - worst).clamp(0.0, 1.0))
}

/// Metropolis–Hastings correction of the full DUPS kernel,
/// `A(y|x) = min{1, p(y) t(x|y) / (p(x) t(y|x))}`; needs every `t` entry.
pub fn naive_mh_oracle(m: &TargetModel, s: &ScoreField, eta: f64) -> Result<KernelMatrix> {
    let d = m.dim();
    Error::check_cap("naive_mh_oracle", d, NAIVE_MH_DIM_CAP)?;
    let t = dups_matrix(m, s, eta)?;
    let lw = m.log_weight_table()?;
    let n = 1usize << d;
    let mut e = vec![0.0; n * n];
    for x in 0..n {
        let mut moved = 0.0;
        for y in 0..n {
            if y != x {
                let v = t.get(x, y).min((lw[y] - lw[x]).exp() * t.get(y, x));
                e[x * n + y] = v;
                moved += v;
            }
        }
        e[x * n + x] = 1.0 - moved;
    }
    let mut k = KernelMatrix::from_entries(d, e, eta)?;
    k.score = Some(s.kind());
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{dula_matrix, gibbs_damping, gibbs_matrix, prox_exact_matrix};
    use crate::models::exact_target;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dist(d: usize, rng: &mut ChaCha8Rng) -> DistVector {
        let v: Vec<f64> = (0..1 << d).map(|_| rng.gen::<f64>()).collect();
        let z: f64 = v.iter().sum();
        DistVector::new(v.into_iter().map(|x| x / z).collect()).unwrap()
    }

    #[test]
    fn gibbs_stationary_is_target() {
        for m in [
            TargetModel::ising_grid(2, 3, 0.4, 0.1, false).unwrap(),
            TargetModel::curie_weiss(0.2, 0.0, 6).unwrap(),
        ] {
            let t = gibbs_matrix(&m, 0.4).unwrap();
            let pi = stationary(&t).unwrap();
            assert!(tv_distance(&pi, &exact_target(&m).unwrap()) < 1e-12);
            assert!(detailed_balance_residual(&t, &pi) < 1e-12);
        }
    }

    #[test]
    fn routes_agree() {
        let m = TargetModel::bits_mixture(0.5, 5).unwrap();
        let s = ScoreField::tabulated(ScoreKind::Stein, &m).unwrap();
        let t = dula_matrix(&m, &s, 0.5).unwrap();
        let a = stationary(&t).unwrap();
        let b = stationary_power(&t, 100_000).unwrap();
        let c = stationary_direct(&t).unwrap();
        assert!(tv_distance(&a, &b) < 1e-10);
        assert!(tv_distance(&a, &c) < 1e-10);
    }

    #[test]
    fn two_state_spectrum() {
        let (a, b) = (0.3, 0.45);
        let t = KernelMatrix::from_entries(1, vec![1.0 - a, a, b, 1.0 - b], 1.0).unwrap();
        let s = spectral_summary(&t).unwrap();
        assert!((s.lambda2 - (1.0f64 - a - b).abs()).abs() < 1e-14);
        assert!(s.reversible);
        let pi = stationary(&t).unwrap();
        assert!((pi[0] - b / (a + b)).abs() < 1e-15);
    }

    #[test]
    fn identity_kernel_is_capped() {
        let t = KernelMatrix::identity(2).unwrap();
        // any law is stationary for the identity; pass one explicitly
        let s = spectral_summary_with(&t, &DistVector::uniform(2)).unwrap();
        assert_eq!(s.lambda2, 1.0);
        assert!(s.capped);
        assert_eq!(s.t_rel, T_REL_CAP);
    }

    #[test]
    fn gibbs_product_spectrum() {
        for (d, eta) in [(3, 0.3), (4, 0.7)] {
            let t = gibbs_matrix(&TargetModel::independent_bits(0.7, d).unwrap(), eta).unwrap();
            let s = spectral_summary(&t).unwrap();
            assert!((s.lambda2 - (1.0 - gibbs_damping(eta))).abs() < 1e-10);
        }
    }

    #[test]
    fn general_route_matches_nalgebra_schur() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [2usize, 3, 5, 8, 16, 33] {
            let a: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let mut ours = general_eigenvalues(&a, n).unwrap();
            let schur = nalgebra::Schur::try_new(DMatrix::from_row_slice(n, n, &a), 1e-14, 10_000)
                .unwrap();
            let mut theirs: Vec<(f64, f64)> =
                schur.complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect();
            let key = |v: &(f64, f64)| (v.0 * 1e8).round() as i64 * 1_000_000_000 + (v.1 * 1e8).round() as i64;
            ours.sort_by_key(key);
            theirs.sort_by_key(key);
            for (x, y) in ours.iter().zip(&theirs) {
                assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9, "{n}: {x:?} vs {y:?}");
            }
        }
    }

    #[test]
    fn nonreversible_route_on_dula() {
        let m = TargetModel::bits_mixture(0.5, 4).unwrap();
        let s = ScoreField::tabulated(ScoreKind::Stein, &m).unwrap();
        let t = dula_matrix(&m, &s, 0.6).unwrap();
        let sum = spectral_summary(&t).unwrap();
        assert!(!sum.reversible);
        assert!(sum.lambda2 > 0.0 && sum.lambda2 < 1.0);
    }

    #[test]
    fn wasserstein_basics() {
        let d = 4;
        let p = DistVector::point_mass(3, d);
        let q = DistVector::point_mass(12, d);
        assert!((wasserstein_hamming(&p, &q).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(wasserstein_hamming(&p, &p).unwrap(), 0.0);
        assert!((tv_distance(&p, &q) - 1.0).abs() < 1e-15);
        let bad = wasserstein_slices(&[0.5, 0.5], &[0.5, 0.6], 1);
        assert!(matches!(bad, Err(Error::Contract(_))));
    }

    #[test]
    fn wasserstein_metric_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for d in 1..=6 {
            for _ in 0..10 {
                let (p, q, r) = (random_dist(d, &mut rng), random_dist(d, &mut rng), random_dist(d, &mut rng));
                let pq = wasserstein_hamming(&p, &q).unwrap();
                let qp = wasserstein_hamming(&q, &p).unwrap();
                let pr = wasserstein_hamming(&p, &r).unwrap();
                let rq = wasserstein_hamming(&r, &q).unwrap();
                assert!((pq - qp).abs() < 1e-12);
                assert!(pq <= pr + rq + 1e-12);
                let tv = tv_distance(&p, &q);
                assert!(tv <= pq + 1e-12 && pq <= d as f64 * tv + 1e-12);
            }
        }
    }

    #[test]
    fn adjacent_kappa_bounds_all_pairs() {
        let m = TargetModel::ising_grid(2, 2, 0.3, 0.1, false).unwrap();
        let s = ScoreField::tabulated(ScoreKind::Glauber, &m).unwrap();
        for t in [gibbs_matrix(&m, 0.5).unwrap(), dups_matrix(&m, &s, 0.5).unwrap()] {
            let cert = contraction_certificate(&t).unwrap();
            assert_eq!(cert.pairs.len(), 4 * 8);
            let (ratio, _) = all_pairs_ratio(&t).unwrap();
            assert!(ratio <= cert.kappa + 1e-12);
        }
    }

    #[test]
    fn asymmetric_kernel_breaks_detailed_balance() {
        let t = KernelMatrix::from_entries(1, vec![0.5, 0.5, 0.1, 0.9], 1.0).unwrap();
        assert!(detailed_balance_residual(&t, &DistVector::uniform(1)) > 0.1);
    }

    #[test]
    fn bound_arithmetic() {
        let m = TargetModel::independent_bits(0.3, 6).unwrap();
        let r = bounds_report(&m, ScoreKind::Gibbs, 0.25).unwrap();
        assert!((r.dula_error.value - 24.0 / (1.0 + 8f64.exp())).abs() < 1e-15);
        assert!((r.dula_error.value - 8.05e-3).abs() < 1e-5);
        assert_eq!(r.glauber_beta2, 0.0);
        assert!((r.gibbs_rate.value - (1.0 - (-8.0f64).exp())).abs() < 1e-15);
        let r = bounds_report(&m, ScoreKind::Stein, 0.5).unwrap();
        assert!((r.dups_rate.value - 0.9640).abs() < 1e-4);
        assert!(r.dups_rate.applies);
        assert!(!r.dula_small_step_rate.applies);
    }

    #[test]
    fn empirical_delta_examples() {
        let m = TargetModel::independent_bits(0.4, 4).unwrap();
        let s = ScoreField::tabulated(ScoreKind::Stein, &m).unwrap();
        assert!(dmaps_empirical_delta(&m, &s, 0.5).unwrap() < 1e-14);
        let m = TargetModel::ising_grid(2, 2, 0.3, 0.1, false).unwrap();
        let s = ScoreField::tabulated(ScoreKind::Stein, &m).unwrap();
        let dhat = dmaps_empirical_delta(&m, &s, 0.5).unwrap();
        assert!(dhat > 0.0 && dhat < 1.0);
    }

    #[test]
    fn naive_oracle_is_exact_and_differs_from_dmaps() {
        let m = TargetModel::ising_grid(1, 3, 0.5, 0.2, false).unwrap();
        let s = ScoreField::tabulated(ScoreKind::Stein, &m).unwrap();
        let t = naive_mh_oracle(&m, &s, 0.5).unwrap();
        assert!(t.max_row_sum_error() < 1e-12);
        let pi = stationary(&t).unwrap();
        assert!(tv_distance(&pi, &exact_target(&m).unwrap()) < 1e-9);
        let dm = crate::kernels::dmaps_matrix(&m, &s, 0.5).unwrap();
        assert!(t.max_row_l1(&dm).unwrap() > 1e-6);
    }

    #[test]
    fn prox_spectrum_uses_symmetric_route() {
        let m = TargetModel::curie_weiss(0.2, 0.0, 4).unwrap();
        let s = spectral_summary(&prox_exact_matrix(&m, 0.5).unwrap()).unwrap();
        assert!(s.reversible && s.lambda2 < 1.0);
    }

    #[test]
    fn unmet_preconditions_agree_with_applies() {
        let models = [
            TargetModel::independent_bits(0.1, 4).unwrap(),
            TargetModel::bits_mixture(0.8, 4).unwrap(),
            TargetModel::curie_weiss(0.3, 0.0, 4).unwrap(),
        ];
        for m in models {
            for kind in ScoreKind::ALL {
                for eta in [0.2, 0.5, 2.0] {
                    let r = bounds_report(&m, kind, eta).unwrap();
                    for sampler in Sampler::ALL {
                        for (name, b) in r.rate_bounds_for(sampler).into_iter().chain(r.error_bounds_for(sampler)) {
                            let unmet = r.unmet_preconditions(name).unwrap();
                            assert_eq!(unmet.is_empty(), b.applies, "{name} {kind} {eta}");
                        }
                    }
                }
            }
        }
        let r = bounds_report(&models[0], ScoreKind::Glauber, 0.5).unwrap();
        assert_eq!(r.unmet_preconditions("dula_small_step_rate").unwrap(), vec!["requires the Gibbs score"]);
        assert!(r.unmet_preconditions("nope").is_none());
    }
}
