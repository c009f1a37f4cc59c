//! Lowest eigenpairs of the symmetric pencil `K v = lambda M v`.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::assembly::AssembledSystem;
use crate::sparse::{dot, SymCsc};

/// Iterations without progress after which a small residual counts as converged.
const STALL_ITERATIONS: usize = 8;

/// Settings of the shift-invert block Krylov iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    pub count: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Problems up to this size are solved densely.
    pub dense_limit: usize,
    /// Krylov blocks per restart.
    pub depth: usize,
    pub shift: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            count: 1,
            tol: 1e-10,
            max_iter: 500,
            seed: 20240601,
            dense_limit: 300,
            depth: 5,
            shift: 0.0,
        }
    }
}

impl EigenConfig {
    pub fn with_count(count: usize) -> Self {
        Self::default().with_count_of(count)
    }

    /// Same settings, `count` eigenpairs.
    pub fn with_count_of(self, count: usize) -> Self {
        Self { count, ..self }
    }
}

/// Converged eigenpairs in ascending order, vectors `M`-normalized on the free dofs.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Shift-invert residuals `|lambda - sigma| * ||Op v - v/(lambda - sigma)||_M`.
    pub residuals: Vec<f64>,
    /// Raw residuals `||K v - lambda M v|| / ||M v||`.
    pub raw_residuals: Vec<f64>,
    pub iterations: usize,
    pub shift: f64,
}

/// Cholesky factor of `K - sigma M`.
pub struct ShiftedFactor {
    llt: Llt<usize, f64>,
    pub shift: f64,
}

impl ShiftedFactor {
    pub fn new(k: &SymCsc, m: &SymCsc, shift: f64) -> Result<Self> {
        let a = k.axpy(-shift, m);
        let p = &*a.pattern;
        let sym = SymbolicSparseColMatRef::new_checked(p.n, p.n, &p.col_ptr, None, &p.row_idx);
        let mat = SparseColMatRef::new(sym, &a.values);
        let symbolic = SymbolicLlt::try_new(sym, Side::Lower)
            .map_err(|e| Error::FactorizationFailed(format!("{e:?}")))?;
        let llt = Llt::try_new_with_symbolic(symbolic, mat, Side::Lower)
            .map_err(|e| Error::FactorizationFailed(format!("{e:?}")))?;
        Ok(Self { llt, shift })
    }

    /// Solves in place for every column.
    pub fn solve_columns(&self, cols: &mut [Vec<f64>]) {
        if cols.is_empty() {
            return;
        }
        let n = cols[0].len();
        let mut b = Mat::<f64>::from_fn(n, cols.len(), |i, j| cols[j][i]);
        self.llt.solve_in_place(b.as_mut());
        for (j, c) in cols.iter_mut().enumerate() {
            for (i, v) in c.iter_mut().enumerate() {
                *v = b[(i, j)];
            }
        }
    }
}

fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::FactorizationFailed(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

fn normalize_sign(v: &mut [f64], mv: &[f64]) {
    let s: f64 = mv.iter().sum();
    let flip = if s.abs() > 1e-12 * mv.iter().map(|x| x.abs()).sum::<f64>() {
        s < 0.0
    } else {
        v.iter().find(|x| x.abs() > 1e-12).is_some_and(|&x| x < 0.0)
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn raw_residual(k: &SymCsc, m: &SymCsc, lambda: f64, v: &[f64]) -> f64 {
    let kv = k.apply(v);
    let mv = m.apply(v);
    let r: f64 = kv
        .iter()
        .zip(&mv)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum();
    r.sqrt() / dot(&mv, &mv).sqrt()
}

fn finish(
    k: &SymCsc,
    m: &SymCsc,
    mut values: Vec<f64>,
    mut vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    iterations: usize,
    shift: f64,
) -> EigenResult {
    let mut raw = Vec::with_capacity(values.len());
    for (lam, v) in values.iter_mut().zip(vectors.iter_mut()) {
        let mv = m.apply(v);
        normalize_sign(v, &mv);
        raw.push(raw_residual(k, m, *lam, v));
    }
    EigenResult {
        values,
        vectors,
        residuals,
        raw_residuals: raw,
        iterations,
        shift,
    }
}

/// Dense generalized solve through `M^{-1/2} K M^{-1/2}`.
fn dense(k: &SymCsc, m: &SymCsc, count: usize) -> Result<EigenResult> {
    let n = k.n();
    let kd = k.to_dense();
    let md = m.to_dense();
    let mm = Mat::<f64>::from_fn(n, n, |i, j| md[i][j]);
    let (mvals, mvecs) = symmetric_eigen(&mm)?;
    if mvals.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::FactorizationFailed(
            "mass matrix is not positive definite".into(),
        ));
    }
    let half = Mat::<f64>::from_fn(n, n, |i, j| {
        (0..n)
            .map(|l| mvecs[(i, l)] * mvecs[(j, l)] / mvals[l].sqrt())
            .sum()
    });
    let kk = Mat::<f64>::from_fn(n, n, |i, j| kd[i][j]);
    let c = &half * &kk * &half;
    let c = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let (vals, vecs) = symmetric_eigen(&c)?;
    let y = &half * &vecs;
    let count = count.min(n);
    let values: Vec<f64> = vals[..count].to_vec();
    let vectors: Vec<Vec<f64>> = (0..count)
        .map(|j| (0..n).map(|i| y[(i, j)]).collect())
        .collect();
    Ok(finish(k, m, values, vectors, vec![0.0; count], 0, 0.0))
}

struct Basis {
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
}

impl Basis {
    /// Appends `w` after two rounds of `M`-orthogonalization; returns whether it was kept.
    fn push(&mut self, m: &SymCsc, mut w: Vec<f64>) -> bool {
        let mut mw = m.apply(&w);
        let norm0 = dot(&w, &mw).max(0.0).sqrt();
        if norm0 == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for (v, mv) in self.v.iter().zip(&self.mv) {
                let c = dot(mv, &w);
                for ((a, b), (ma, mb)) in w.iter_mut().zip(v).zip(mw.iter_mut().zip(mv)) {
                    *a -= c * b;
                    *ma -= c * mb;
                }
            }
        }
        let norm = dot(&w, &mw).max(0.0).sqrt();
        if norm < 1e-10 * norm0 {
            return false;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        mw.iter_mut().for_each(|x| *x /= norm);
        self.v.push(w);
        self.mv.push(mw);
        true
    }
}

/// Computes the `cfg.count` smallest eigenpairs.
pub fn solve(sys: &AssembledSystem, cfg: &EigenConfig) -> Result<EigenResult> {
    solve_pencil(&sys.k, &sys.m, cfg)
}

pub fn solve_pencil(k: &SymCsc, m: &SymCsc, cfg: &EigenConfig) -> Result<EigenResult> {
    let n = k.n();
    if cfg.count == 0 || cfg.count > n {
        return Err(Error::InvalidArgument(format!(
            "cannot compute {} eigenpairs of a problem with {n} unknowns",
            cfg.count
        )));
    }
    if n <= cfg.dense_limit {
        return dense(k, m, cfg.count);
    }
    let mut factor = [
        cfg.shift,
        cfg.shift - 1.0,
        cfg.shift - 100.0,
        cfg.shift - 1e4,
    ]
    .iter()
    .find_map(|&s| ShiftedFactor::new(k, m, s).ok())
    .ok_or_else(|| Error::FactorizationFailed("K - sigma M is not positive definite".into()))?;
    let mut sigma = factor.shift;
    let mut adapted = false;
    let nev = cfg.count;
    let block = (nev + 2).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    // smooth the random start once
    for c in x.iter_mut() {
        *c = m.apply(c);
    }
    factor.solve_columns(&mut x);
    let mut residuals = vec![f64::INFINITY; block];
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for iter in 1..=cfg.max_iter {
        let mut basis = Basis {
            v: Vec::new(),
            mv: Vec::new(),
        };
        for c in x.drain(..) {
            basis.push(m, c);
        }
        let mut frontier: Vec<Vec<f64>> = basis.mv.clone();
        for _ in 1..cfg.depth {
            factor.solve_columns(&mut frontier);
            let mut next = Vec::new();
            for w in frontier {
                if basis.v.len() >= n {
                    break;
                }
                if basis.push(m, w) {
                    next.push(basis.mv.last().unwrap().clone());
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        let dim = basis.v.len();
        let kv: Vec<Vec<f64>> = basis.v.iter().map(|v| k.apply(v)).collect();
        let a = Mat::<f64>::from_fn(dim, dim, |i, j| {
            0.5 * (dot(&basis.v[i], &kv[j]) + dot(&basis.v[j], &kv[i]))
        });
        let (vals, vecs) = symmetric_eigen(&a)?;
        let keep = block.min(dim);
        x = (0..keep)
            .map(|j| {
                let mut y = vec![0.0; n];
                for (l, v) in basis.v.iter().enumerate() {
                    let c = vecs[(l, j)];
                    for (a, b) in y.iter_mut().zip(v) {
                        *a += c * b;
                    }
                }
                y
            })
            .collect();
        let theta = &vals[..keep];
        // residual of the shift-invert operator on the Ritz vectors
        let mut op: Vec<Vec<f64>> = x.iter().map(|v| m.apply(v)).collect();
        factor.solve_columns(&mut op);
        residuals = x
            .iter()
            .zip(&op)
            .zip(theta)
            .map(|((v, ov), &t)| {
                let d = t - sigma;
                let r: Vec<f64> = ov.iter().zip(v).map(|(a, b)| d * a - b).collect();
                dot(&r, &m.apply(&r)).max(0.0).sqrt()
            })
            .collect();
        let worst = residuals[..nev].iter().cloned().fold(0.0, f64::max);
        if worst < 0.9 * best {
            best = worst;
            stalled = 0;
        } else {
            stalled += 1;
        }
        // a residual stuck at the round-off floor far below sqrt(tol) is accepted
        let floor = 1e-2 * cfg.tol.sqrt();
        if worst <= cfg.tol || (stalled >= STALL_ITERATIONS && worst <= floor) {
            let vectors = x[..nev].to_vec();
            return Ok(finish(
                k,
                m,
                theta[..nev].to_vec(),
                vectors,
                residuals[..nev].to_vec(),
                iter,
                sigma,
            ));
        }
        // once the wanted pairs are roughly located, move the pole just below them
        if !adapted && residuals[..nev].iter().all(|&r| r <= 1e-3) {
            adapted = true;
            let target = sigma + 0.9 * (theta[0] - sigma);
            if target > sigma {
                if let Ok(f) = ShiftedFactor::new(k, m, target) {
                    factor = f;
                    sigma = target;
                }
            }
        }
    }
    let worst = residuals[..nev].iter().cloned().fold(0.0, f64::max);
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        residual: worst,
    })
}

/// Lowest eigenpair; fails when the two lowest eigenvalues coincide.
pub fn ground_state(sys: &AssembledSystem, cfg: &EigenConfig) -> Result<(f64, Vec<f64>)> {
    let cfg = EigenConfig {
        count: cfg.count.max(2).min(sys.n_free()),
        ..*cfg
    };
    let res = solve(sys, &cfg)?;
    if res.values.len() >= 2 {
        let gap = res.values[1] - res.values[0];
        if gap <= 1e-8 * res.values[0].abs().max(1.0) {
            return Err(Error::DegenerateGroundState { gap });
        }
    }
    Ok((res.values[0], res.vectors[0].clone()))
}
