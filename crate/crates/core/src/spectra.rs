//! Bethe equations, numerical root solving and spectral cross-checks.
//!
//! The Bethe system for the cardinalities r_0..r_{n-1} reads
//!
//!   alpha_s(t^s_l) = f_s(t^s_l, t^s_l..) / f_s(t^s_l.., t^s_l)
//!                    * f(t^{s+1}, t^s_l) / f(t^s_l, t^{s-1}),
//!
//! with t^{-1} = t^n empty and alpha_s measured on the chain vacuum.
//! Roots are found by Newton iteration on the logarithm of the
//! residual ratio, seeded from a disk around the inhomogeneity centroid.
//! Converged roots are fed through three independent checks: the residual
//! itself, the eigenvector property of the transfer matrix on the
//! float-backend Bethe vector, and the eigenvalue
//!
//!   tau(z) = lambda_0(z) f(t^0,z_0) f(z,t^0)
//!          + sum_s lambda_s(z) f(t^s,z) f(z,t^{s-1})
//!                + lambda_{-s}(z) f(t^{s-1},z_{s-1}) f(z_s,t^s)
//!
//! matched against dense exact diagonalization.  Completeness of the
//! ansatz is never asserted; unmatched eigenvalues are reported as such.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bethe::{BetheContext, BetheFactory};
use crate::error::{Error, Result};
use crate::linop::{all_indices, to_float_operator, ChainOperator};
use crate::partitions::{f_fn, f_s_fn, prod_pair, z_shift, Params};
use crate::scalar::{C64, Rat, Ring, Scalar};

/// Residual tolerance below which a root counts as converged.
pub const ROOT_TOL: f64 = 1e-10;
/// Relative tolerance for eigenvalue matching and eigenvector defects.
pub const MATCH_TOL: f64 = 1e-8;
/// Dedup tolerance for root sets (after per-level canonical sorting).
pub const DEDUP_TOL: f64 = 1e-6;
/// Finite-difference step of the Newton Jacobian.
const FD_STEP: f64 = 1e-7;
const MAX_SEEDS: usize = 64;
const MAX_ITER: usize = 80;

/// Per-equation residuals alpha_s(t^s_l) - RHS, flattened level by level.
pub fn bethe_residual(ctx: &BetheContext, t: &Params<C64>) -> Result<Vec<C64>> {
    let n = ctx.n();
    let c = C64::from_rat(&ctx.spec.params.c);
    let empty: Vec<C64> = vec![];
    let level = |s: i32| -> &[C64] {
        if (0..n as i32).contains(&s) {
            t.set(s as usize)
        } else {
            &empty
        }
    };
    let mut out = Vec::new();
    for s in 0..n {
        for (l, t_l) in t.set(s).iter().enumerate() {
            let rest: Vec<C64> = t
                .set(s)
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != l)
                .map(|(_, x)| *x)
                .collect();
            let one = [*t_l];
            let alpha = C64::eval_rf(ctx.alpha(s), t_l)?;
            let num = prod_pair(|a, b| f_s_fn(s, &c, a, b), &one, &rest)?
                .ring_mul(&prod_pair(|a, b| f_fn(&c, a, b), level(s as i32 + 1), &one)?);
            let den = prod_pair(|a, b| f_s_fn(s, &c, a, b), &rest, &one)?
                .ring_mul(&prod_pair(|a, b| f_fn(&c, a, b), &one, level(s as i32 - 1))?);
            out.push(alpha - num.div_checked(&den)?);
        }
    }
    Ok(out)
}

/// Log form of the residual ratio, zero exactly on Bethe roots; better
/// conditioned for Newton than the bare difference.
fn log_residual(ctx: &BetheContext, t: &Params<C64>) -> Result<Vec<C64>> {
    let n = ctx.n();
    let c = C64::from_rat(&ctx.spec.params.c);
    let empty: Vec<C64> = vec![];
    let level = |s: i32| -> &[C64] {
        if (0..n as i32).contains(&s) {
            t.set(s as usize)
        } else {
            &empty
        }
    };
    let mut out = Vec::new();
    for s in 0..n {
        for (l, t_l) in t.set(s).iter().enumerate() {
            let rest: Vec<C64> = t
                .set(s)
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != l)
                .map(|(_, x)| *x)
                .collect();
            let one = [*t_l];
            let alpha = C64::eval_rf(ctx.alpha(s), t_l)?;
            let num = alpha
                .ring_mul(&prod_pair(|a, b| f_s_fn(s, &c, a, b), &rest, &one)?)
                .ring_mul(&prod_pair(|a, b| f_fn(&c, a, b), &one, level(s as i32 - 1))?);
            let den = prod_pair(|a, b| f_s_fn(s, &c, a, b), &one, &rest)?
                .ring_mul(&prod_pair(|a, b| f_fn(&c, a, b), level(s as i32 + 1), &one)?);
            out.push(num.div_checked(&den)?.ln());
        }
    }
    Ok(out)
}

fn unflatten(cards: &[usize], x: &[C64]) -> Params<C64> {
    let mut sets = Vec::with_capacity(cards.len());
    let mut k = 0;
    for &r in cards {
        sets.push(x[k..k + r].to_vec());
        k += r;
    }
    Params::from_sets(sets)
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Newton iteration from one seed vector; `None` when it diverges, walks
/// into a pole or exhausts its iterations.
fn newton_from(ctx: &BetheContext, cards: &[usize], start: Vec<C64>) -> Option<Vec<C64>> {
    let m = start.len();
    let mut x = start;
    for _ in 0..MAX_ITER {
        let params = unflatten(cards, &x);
        let spec_res = bethe_residual(ctx, &params).ok()?;
        if max_abs(&spec_res) < ROOT_TOL {
            return Some(x);
        }
        let g0 = log_residual(ctx, &params).ok()?;
        let mut jac = DMatrix::<C64>::zeros(m, m);
        for k in 0..m {
            let mut xp = x.clone();
            xp[k] += C64::new(FD_STEP, 0.0);
            let mut xm = x.clone();
            xm[k] -= C64::new(FD_STEP, 0.0);
            let gp = log_residual(ctx, &unflatten(cards, &xp)).ok()?;
            let gm = log_residual(ctx, &unflatten(cards, &xm)).ok()?;
            for row in 0..m {
                jac[(row, k)] = (gp[row] - gm[row]) / C64::new(2.0 * FD_STEP, 0.0);
            }
        }
        let rhs = DVector::from_iterator(m, g0.iter().map(|g| -g));
        let step = jac.lu().solve(&rhs)?;
        for k in 0..m {
            x[k] += step[k];
            if !x[k].re.is_finite() || !x[k].im.is_finite() || x[k].norm() > 1e9 {
                return None;
            }
        }
    }
    None
}

fn canonical_root(cards: &[usize], x: &[C64]) -> Vec<Vec<C64>> {
    let p = unflatten(cards, x);
    let mut out = Vec::new();
    for s in 0..cards.len() {
        let mut lvl = p.set(s).to_vec();
        lvl.sort_by(|a, b| {
            (a.re, a.im)
                .partial_cmp(&(b.re, b.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        out.push(lvl);
    }
    out
}

fn same_root(a: &[Vec<C64>], b: &[Vec<C64>]) -> bool {
    a.iter().zip(b).all(|(la, lb)| {
        la.len() == lb.len() && la.iter().zip(lb).all(|(x, y)| (x - y).norm() < DEDUP_TOL)
    })
}

/// Solve the Bethe system for the given cardinalities from up to 64
/// random seeds; converged roots are deduplicated up to permutations
/// within each level.  Seeds that diverge are dropped silently.
pub fn solve_bethe(ctx: &BetheContext, cards: &[usize], seed: u64) -> Result<Vec<Vec<Vec<C64>>>> {
    let m: usize = cards.iter().sum();
    if m == 0 {
        return Ok(vec![]);
    }
    if m > 4 {
        return Err(Error::Dimension(format!(
            "Bethe system with {m} unknowns exceeds the desk-scale bound of 4"
        )));
    }
    let centroid: f64 = ctx.spec.xi.iter().map(|x| x.to_f64()).sum::<f64>() / ctx.spec.sites as f64;
    let mut radius = 3.0
        * ctx
            .spec
            .xi
            .iter()
            .map(|x| x.to_f64().abs())
            .fold(0.0, f64::max);
    if radius == 0.0 {
        radius = 1.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roots: Vec<Vec<Vec<C64>>> = Vec::new();
    for _ in 0..MAX_SEEDS {
        let start: Vec<C64> = (0..m)
            .map(|_| {
                let r = radius * rng.gen::<f64>().sqrt();
                let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
                C64::new(centroid + r * phi.cos(), r * phi.sin())
            })
            .collect();
        if let Some(x) = newton_from(ctx, cards, start) {
            let canon = canonical_root(cards, &x);
            if !roots.iter().any(|r| same_root(r, &canon)) {
                roots.push(canon);
            }
        }
    }
    Ok(roots)
}

/// Transfer-matrix eigenvalue tau(z; t-bar) predicted by the ansatz, with
/// every lambda (negative indices included) measured on the chain vacuum.
pub fn tau(ctx: &BetheContext, z: C64, t: &Params<C64>) -> Result<C64> {
    let n = ctx.n();
    let c = C64::from_rat(&ctx.spec.params.c);
    let lam = |i: i8| -> Result<C64> { C64::eval_rf(ctx.vacuum.lambda(i), &z) };
    let empty: Vec<C64> = vec![];
    let level = |s: i32| -> &[C64] {
        if (0..n as i32).contains(&s) {
            t.set(s as usize)
        } else {
            &empty
        }
    };
    let z_at = |s: usize| z_shift(&c, &z, s);
    let mut acc = lam(0)?
        .ring_mul(&prod_pair(|a, b| f_fn(&c, a, b), level(0), &[z_at(0)])?)
        .ring_mul(&prod_pair(|a, b| f_fn(&c, a, b), &[z], level(0))?);
    for s in 1..=n {
        let up = lam(s as i8)?
            .ring_mul(&prod_pair(|a, b| f_fn(&c, a, b), level(s as i32), &[z])?)
            .ring_mul(&prod_pair(|a, b| f_fn(&c, a, b), &[z], level(s as i32 - 1))?);
        let down = lam(-(s as i8))?
            .ring_mul(&prod_pair(
                |a, b| f_fn(&c, a, b),
                level(s as i32 - 1),
                &[z_at(s - 1)],
            )?)
            .ring_mul(&prod_pair(
                |a, b| f_fn(&c, a, b),
                &[z_at(s)],
                level(s as i32),
            )?);
        acc = acc.ring_add(&up).ring_add(&down);
    }
    Ok(acc)
}

/// Dense-diagonalization size guard: N^L must not exceed 1000.
pub fn ensure_dense_bound(spec: &crate::monodromy::ChainSpec) -> Result<usize> {
    let dim = (2 * spec.n() as usize + 1).pow(spec.sites as u32);
    if dim > 1000 {
        return Err(Error::Dimension(format!(
            "chain dimension {dim} exceeds the dense diagonalization bound 1000"
        )));
    }
    Ok(dim)
}

/// All eigenvalues of the dense float transfer matrix at exact z.
pub fn exact_diagonalize(ctx: &BetheContext, z: &Rat) -> Result<Vec<C64>> {
    let dim = ensure_dense_bound(&ctx.spec)?;
    let op = ctx.monodromy.transfer_at(z)?;
    let idxs = all_indices(ctx.spec.n(), ctx.spec.sites);
    let pos: std::collections::HashMap<_, _> = idxs.iter().cloned().zip(0usize..).collect();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for ((r, c), v) in op.entries() {
        m[(pos[r], pos[c])] = v.to_f64();
    }
    let mut eig: Vec<C64> = m.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(eig)
}

/// Eigenvector-property report for one candidate root.
#[derive(Clone, Debug, Serialize)]
pub struct EigenCheck {
    /// ||T(z) B - tau B|| / ||B||.
    pub defect: f64,
    pub vector_norm: f64,
    pub tau: C64,
}

/// Apply the transfer matrix to the float Bethe vector and compare with
/// tau(z; t-bar) B.
pub fn verify_eigenproperty(
    fc: &BetheFactory<C64>,
    z: C64,
    t: &Params<C64>,
) -> Result<EigenCheck> {
    let b = fc.build(t)?;
    let norm = b.norm();
    let tau_val = tau(fc.ctx, z, t)?;
    if norm < 1e-12 {
        return Ok(EigenCheck {
            defect: f64::INFINITY,
            vector_norm: norm,
            tau: tau_val,
        });
    }
    let transfer = fc.ctx.monodromy.transfer_at_c64(z)?;
    let lhs = transfer.apply(&b)?;
    let rhs = b.scale_ref(&tau_val);
    let defect = lhs.sub(&rhs)?.norm() / norm;
    Ok(EigenCheck {
        defect,
        vector_norm: norm,
        tau: tau_val,
    })
}

/// Largest ratio ||T_{j,i}[0] B|| / ||B|| over the lowering zero modes
/// 0 <= i < j <= n; small on shell at trivial twist.
pub fn highest_weight_defect(fc: &BetheFactory<C64>, t: &Params<C64>) -> Result<f64> {
    let b = fc.build(t)?;
    let norm = b.norm();
    if norm < 1e-12 {
        return Ok(f64::INFINITY);
    }
    let n = fc.ctx.spec.n() as usize;
    let mut worst: f64 = 0.0;
    for j in 1..=n {
        for i in 0..j {
            let zm: ChainOperator<C64> =
                to_float_operator(&fc.ctx.monodromy.zero_mode(j as i8, i as i8)?);
            worst = worst.max(zm.apply(&b)?.norm() / norm);
        }
    }
    Ok(worst)
}

/// tau evaluated at small offsets around every root and every shifted
/// root; bounded values certify residue cancellation on shell.
pub fn tau_pole_probe(ctx: &BetheContext, t: &Params<C64>, eps: f64) -> Result<f64> {
    let c = C64::from_rat(&ctx.spec.params.c);
    let mut worst: f64 = 0.0;
    for s in 0..ctx.n() {
        for t_l in t.set(s) {
            for sign in [1.0, -1.0] {
                let z = t_l + C64::new(sign * eps, 0.0);
                worst = worst.max(tau(ctx, z, t)?.norm());
                // z with z_s = t_l, again offset by eps
                let z2 = t_l + c * C64::new(s as f64 - 0.5, 0.0) + C64::new(sign * eps, 0.0);
                worst = worst.max(tau(ctx, z2, t)?.norm());
            }
        }
    }
    Ok(worst)
}

/// Everything measured for one converged root.
#[derive(Clone, Debug, Serialize)]
pub struct RootReport {
    pub roots: Vec<Vec<C64>>,
    pub residual_norm: f64,
    pub tau: C64,
    pub vector_norm: f64,
    pub eigen_defect: f64,
    pub matched_eigenvalue: Option<C64>,
    pub match_distance: Option<f64>,
    pub highest_weight_defect: Option<f64>,
}

/// Spectrum pipeline output: roots with their checks, the dense spectrum
/// and the eigenvalues no root accounted for.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub cardinalities: Vec<usize>,
    pub z: String,
    pub converged_roots: usize,
    pub roots: Vec<RootReport>,
    pub eigenvalues: Vec<C64>,
    pub unmatched_eigenvalues: Vec<C64>,
}

impl SpectrumReport {
    /// True when every converged root passed residual, eigenproperty and
    /// eigenvalue matching at the stated tolerances (and the
    /// highest-weight bound where measured).
    pub fn all_roots_pass(&self) -> bool {
        self.roots.iter().all(|r| {
            r.residual_norm < ROOT_TOL
                && r.eigen_defect < MATCH_TOL
                && r.match_distance.is_some_and(|d| d < MATCH_TOL)
                && r.highest_weight_defect.is_none_or(|d| d < MATCH_TOL)
        })
    }
}

/// Run the full pipeline: solve, check each root, diagonalize and match.
pub fn run_spectrum(
    ctx: &BetheContext,
    cards: &[usize],
    z: &Rat,
    seed: u64,
) -> Result<SpectrumReport> {
    let roots = solve_bethe(ctx, cards, seed)?;
    let eigenvalues = exact_diagonalize(ctx, z)?;
    let fc = BetheFactory::<C64>::new(ctx);
    let zc = C64::new(z.to_f64(), 0.0);
    let untwisted = ctx.spec.is_untwisted();
    let mut reports = Vec::new();
    let mut matched = vec![false; eigenvalues.len()];
    for root in &roots {
        let params = Params::from_sets(root.clone());
        let residual_norm = max_abs(&bethe_residual(ctx, &params)?);
        let eig = verify_eigenproperty(&fc, zc, &params)?;
        let (mut best, mut best_d) = (None, f64::INFINITY);
        for (k, mu) in eigenvalues.iter().enumerate() {
            let d = (eig.tau - mu).norm() / mu.norm().max(1.0);
            if d < best_d {
                best_d = d;
                best = Some(k);
            }
        }
        let (matched_eigenvalue, match_distance) = match best {
            Some(k) if best_d < MATCH_TOL => {
                matched[k] = true;
                (Some(eigenvalues[k]), Some(best_d))
            }
            _ => (None, None),
        };
        let hw = if untwisted {
            Some(highest_weight_defect(&fc, &params)?)
        } else {
            None
        };
        reports.push(RootReport {
            roots: root.clone(),
            residual_norm,
            tau: eig.tau,
            vector_norm: eig.vector_norm,
            eigen_defect: eig.defect,
            matched_eigenvalue,
            match_distance,
            highest_weight_defect: hw,
        });
    }
    let unmatched = eigenvalues
        .iter()
        .zip(&matched)
        .filter(|(_, m)| !**m)
        .map(|(e, _)| *e)
        .collect();
    Ok(SpectrumReport {
        cardinalities: cards.to_vec(),
        z: z.to_string(),
        converged_roots: reports.len(),
        roots: reports,
        eigenvalues,
        unmatched_eigenvalues: unmatched,
    })
}
