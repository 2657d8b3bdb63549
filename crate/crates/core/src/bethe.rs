//! Off-shell Bethe vectors and the action of monodromy entries on them.
//!
//! Vectors B(t-bar) are constructed recursively.  At rank m >= 2 one
//! parameter z is stripped from the top level m-1:
//!
//!   B(t^0,...,{t^{m-1},z}) = 1/(h(z,t^{m-1}) lambda_m(z))
//!     sum_{i=-m}^{m-1} sum_part  sigma_{i+1} T_{i,m}(z) B(t_II)
//!       / (h(t^{m-1}_II, z) g(z, t^{m-2}_II))
//!       prod_s gamma_s(t^s_I, t^s_II)
//!       prod_{s>=1} h(t^s_II, t^{s-1}_I) / g(t^s_I, t^{s-1}_II),
//!
//! descending through the embedded middle blocks when the top level
//! empties.  At rank 1 the analogous relation follows from the rank-1
//! action formulas (the T_{0,1} action solved for the new vector, with the
//! T_{-1,1} corner action eliminating the longer collections):
//!
//!   B({t^0,z}) = [ T_{0,1}(z) B(t^0)
//!     + sum_l frak_f(t_l,t^0_l) frak_f(t_l,z) frak_f(t_l,z_0)/h(t_l,z_0)
//!       T_{-1,1}(z) B(t^0_l) ] / (lambda_1(z) frak_f(z_0, t^0)).
//!
//! An alternative first-row recursion strips z_{m-1} using entries
//! T_{-m,j}(z) and serves as an independent cross-check path.
//!
//! The action of any entry T_{i,j}(z) on B(t-bar) is the tripartition sum
//! with prefactor -sigma_i sigma_{-j} lambda_n(z) g(z_1,t^0)/(kappa h(z,t^0)),
//! per-term weight
//!
//!   prod_s alpha_s(w^s_III)
//!   gamma_s(w^s_I,w^s_II) gamma_s(w^s_II,w^s_III) gamma_s(w^s_I,w^s_III)
//!   h(w^{s+1}_II,w^s_I) h(w^{s+1}_III,w^s_I) h(w^{s+1}_III,w^s_II)
//!   / (g(w^{s+1}_I,w^s_II) g(w^{s+1}_I,w^s_III) g(w^{s+1}_II,w^s_III)),
//!
//! and resulting vectors B(w_II).  Zero-mode and corner actions, the
//! gl(n) collapse at empty t^0 and the rank-1 specialization each get an
//! independently coded formula for cross-checking.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::linop::{ChainOperator, ChainVector};
use crate::monodromy::{find_vacuum, ChainSpec, SymbolicMonodromy, VacuumData};
use crate::partitions::{
    enumerate_bipartitions, enumerate_tripartitions, f_fn, f_s_fn, frak_f_fn, g_inv, gamma_s_fn,
    h_fn, prod_pair, sigma, z_shift, BetheParams, Params, TriPartition, WSets,
};
use crate::ratfun::RatFun;
use crate::scalar::{Rat, Ring, Scalar};

/// Chain, symbolic monodromy, measured vacuum data and the alpha ratios:
/// everything the Bethe machinery needs, built once per spec.
pub struct BetheContext {
    pub spec: ChainSpec,
    pub monodromy: SymbolicMonodromy,
    pub vacuum: VacuumData,
    alphas: Vec<RatFun>,
}

impl BetheContext {
    pub fn new(spec: ChainSpec) -> Result<Self> {
        let monodromy = SymbolicMonodromy::build(spec.clone());
        let vacuum = find_vacuum(&monodromy)?;
        let alphas = (0..spec.n() as usize)
            .map(|s| vacuum.alpha(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(BetheContext {
            spec,
            monodromy,
            vacuum,
            alphas,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n() as usize
    }

    /// alpha_s(u) = lambda_s(u)/lambda_{s+1}(u) as a rational function.
    pub fn alpha(&self, s: usize) -> &RatFun {
        &self.alphas[s]
    }
}

type Memo<S> = Mutex<HashMap<Vec<Vec<<S as Scalar>::Key>>, ChainVector<S>>>;
type EntryCache<S> = Mutex<HashMap<(i8, i8, <S as Scalar>::Key), Arc<ChainOperator<S>>>>;

/// Memoizing builder of Bethe vectors over one scalar backend.
pub struct BetheFactory<'a, S: Scalar> {
    pub ctx: &'a BetheContext,
    c: S,
    vacuum: ChainVector<S>,
    memo: Memo<S>,
    memo_alt: Memo<S>,
    entry_cache: EntryCache<S>,
}

impl<'a, S: Scalar> BetheFactory<'a, S> {
    pub fn new(ctx: &'a BetheContext) -> Self {
        BetheFactory {
            ctx,
            c: S::from_rat(&ctx.spec.params.c),
            vacuum: ctx.vacuum.vector.map_scalars(|r| S::from_rat(r)),
            memo: Mutex::new(HashMap::new()),
            memo_alt: Mutex::new(HashMap::new()),
            entry_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn c(&self) -> &S {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn vacuum_vector(&self) -> ChainVector<S> {
        self.vacuum.clone()
    }

    pub fn lambda_at(&self, i: i8, at: &S) -> Result<S> {
        S::eval_rf(self.ctx.vacuum.lambda(i), at)
    }

    pub fn alpha_at(&self, s: usize, at: &S) -> Result<S> {
        S::eval_rf(self.ctx.alpha(s), at)
    }

    fn alpha_over(&self, s: usize, set: &[S]) -> Result<S> {
        let mut acc = S::ring_one();
        for x in set {
            acc = acc.ring_mul(&self.alpha_at(s, x)?);
        }
        Ok(acc)
    }

    /// Monodromy entry T_{i,j} evaluated at a point, cached.
    pub fn entry_op(&self, i: i8, j: i8, at: &S) -> Result<Arc<ChainOperator<S>>> {
        let key = (i, j, at.key());
        if let Some(op) = self.entry_cache.lock().unwrap().get(&key) {
            return Ok(op.clone());
        }
        let op = Arc::new(self.ctx.monodromy.entry_at_scalar(i, j, at)?);
        self.entry_cache
            .lock()
            .unwrap()
            .insert(key, op.clone());
        Ok(op)
    }

    fn pad_params(&self, sets: Vec<Vec<S>>) -> Params<S> {
        let mut sets = sets;
        sets.resize(self.n(), vec![]);
        Params::from_sets(sets)
    }

    /// Cardinalities of the subsets removed together with T_{i,m}(z) when
    /// one parameter is stripped from level m-1, for levels 0..m-1.
    fn strip_cards(m: usize, i: i32) -> Vec<usize> {
        (0..m)
            .map(|s| {
                if s == m - 1 {
                    usize::from(i == -(m as i32))
                } else if i >= 0 {
                    usize::from(s as i32 >= i)
                } else {
                    1 + usize::from((s as i32) < -i)
                }
            })
            .collect()
    }

    /// Cardinalities of t^s_III in the first-row recursion, levels 0..m-1.
    fn strip_cards_alt(m: usize, j: i32) -> Vec<usize> {
        (0..m)
            .map(|s| {
                if s == m - 1 {
                    usize::from(j == m as i32)
                } else if j <= 0 {
                    usize::from(s as i32 >= -j)
                } else {
                    1 + usize::from((s as i32) < j)
                }
            })
            .collect()
    }

    /// Strip the last parameter of level m-1 (rank m >= 2) through the
    /// last-column entries T_{i,m}(z).
    fn strip_top(&self, t: &Params<S>, m: usize, alt_memo: bool) -> Result<ChainVector<S>> {
        let c = &self.c;
        let lvl = m - 1;
        let pos = t.set(lvl).len() - 1;
        let z = t.set(lvl)[pos].clone();
        let rest = t.without(lvl, pos);
        let outer = prod_pair(|a, b| h_fn(c, a, b), std::slice::from_ref(&z), rest.set(lvl))?
            .ring_mul(&self.lambda_at(m as i8, &z)?);
        let sub_sets: Vec<Vec<S>> = rest.sets()[..m].to_vec();
        let mut acc = ChainVector::zero(self.ctx.spec.n(), self.ctx.spec.sites);
        for i in -(m as i32)..=(m as i32 - 1) {
            let cards = Self::strip_cards(m, i);
            for part in enumerate_bipartitions(&sub_sets, &cards) {
                let second = |s: usize| -> &[S] { &part.levels[s].1 };
                let first = |s: usize| -> &[S] { &part.levels[s].0 };
                let mut w = S::from_rat(&Rat::int(sigma(i + 1) as i64));
                w = w.div_checked(&prod_pair(
                    |a, b| h_fn(c, a, b),
                    second(lvl),
                    std::slice::from_ref(&z),
                )?)?;
                w = w.ring_mul(&prod_pair(
                    |a, b| g_inv(c, a, b),
                    std::slice::from_ref(&z),
                    second(m - 2),
                )?);
                for s in 0..m {
                    w = w.ring_mul(&prod_pair(
                        |a, b| gamma_s_fn(s, c, a, b),
                        first(s),
                        second(s),
                    )?);
                }
                for s in 1..m {
                    w = w.ring_mul(&prod_pair(|a, b| h_fn(c, a, b), second(s), first(s - 1))?);
                    w = w.ring_mul(&prod_pair(|a, b| g_inv(c, a, b), first(s), second(s - 1))?);
                }
                if w.ring_is_zero() {
                    continue;
                }
                let sub = self.pad_params(part.levels.iter().map(|l| l.1.clone()).collect());
                let vec = self.build_inner(&sub, alt_memo)?;
                let applied = self.entry_op(i as i8, m as i8, &z)?.apply(&vec)?;
                acc = acc.add(&applied.scale_ref(&w))?;
            }
        }
        let inv = S::ring_one().div_checked(&outer)?;
        Ok(acc.scale_ref(&inv))
    }

    /// Strip the last parameter of level m-1 (rank m >= 2) through the
    /// first-row entries T_{-m,j}(z), reading the stripped value as the
    /// shift z_{m-1} of the auxiliary point z.
    fn strip_top_alt(&self, t: &Params<S>, m: usize) -> Result<ChainVector<S>> {
        let c = &self.c;
        let lvl = m - 1;
        let pos = t.set(lvl).len() - 1;
        let w_param = t.set(lvl)[pos].clone();
        let rest = t.without(lvl, pos);
        // z with z_{m-1} = w: z = w + c(m - 3/2).
        let offset = S::from_rat(&(&Rat::int(m as i64) - &Rat::new(3, 2)));
        let z = w_param.ring_add(&c.ring_mul(&offset));
        debug_assert!(z_shift(c, &z, m - 1) == w_param);
        let z_m2 = w_param.ring_add(c);
        let outer = prod_pair(|a, b| h_fn(c, a, b), rest.set(lvl), std::slice::from_ref(&w_param))?
            .ring_mul(&self.lambda_at(-(m as i8) + 1, &z)?);
        let sub_sets: Vec<Vec<S>> = rest.sets()[..m].to_vec();
        let mut acc = ChainVector::zero(self.ctx.spec.n(), self.ctx.spec.sites);
        for j in (-(m as i32) + 1)..=(m as i32) {
            let cards = Self::strip_cards_alt(m, j);
            for part in enumerate_bipartitions(&sub_sets, &cards) {
                // Here the distinguished subsets are III = .0, II = .1.
                let third = |s: usize| -> &[S] { &part.levels[s].0 };
                let second = |s: usize| -> &[S] { &part.levels[s].1 };
                let mut w = S::from_rat(&Rat::int(sigma(j) as i64));
                if j == m as i32 {
                    w = w.ring_neg();
                }
                w = w.div_checked(&prod_pair(
                    |a, b| h_fn(c, a, b),
                    std::slice::from_ref(&w_param),
                    second(lvl),
                )?)?;
                w = w.ring_mul(&prod_pair(
                    |a, b| g_inv(c, a, b),
                    std::slice::from_ref(&z_m2),
                    second(m - 2),
                )?);
                for s in 0..m {
                    w = w.ring_mul(&self.alpha_over(s, third(s))?);
                    w = w.ring_mul(&prod_pair(
                        |a, b| gamma_s_fn(s, c, a, b),
                        second(s),
                        third(s),
                    )?);
                }
                for s in 1..m {
                    w = w.ring_mul(&prod_pair(|a, b| h_fn(c, a, b), third(s), second(s - 1))?);
                    w = w.ring_mul(&prod_pair(|a, b| g_inv(c, a, b), second(s), third(s - 1))?);
                }
                if w.ring_is_zero() {
                    continue;
                }
                let sub = self.pad_params(part.levels.iter().map(|l| l.1.clone()).collect());
                let vec = self.build_inner(&sub, true)?;
                let applied = self.entry_op(-(m as i8), j as i8, &z)?.apply(&vec)?;
                acc = acc.add(&applied.scale_ref(&w))?;
            }
        }
        let inv = S::ring_one().div_checked(&outer)?;
        Ok(acc.scale_ref(&inv))
    }

    /// Rank-1 step.  A level-0 set holding a shift couple (x, x + c/2) is
    /// exactly what the corner action produces, so such couples are
    /// stripped first by inverting it: B({rest, x, x+c/2}) =
    /// -(2/lambda_1(x)) T_{-1,1}(x) B(rest).  (Stripping one member of a
    /// couple through the generic relation would divide by h(x, x+c) = 0.)
    /// Generic parameters are then stripped through T_{0,1} and T_{-1,1}
    /// of the innermost embedded block.
    fn strip_level0(&self, t: &Params<S>, alt_memo: bool) -> Result<ChainVector<S>> {
        let c = &self.c;
        let half = c.div_checked(&S::from_rat(&Rat::int(2)))?;
        let set0 = t.set(0);
        for a in 0..set0.len() {
            for b in 0..set0.len() {
                if a == b || set0[b] != set0[a].ring_add(&half) {
                    continue;
                }
                let x = set0[a].clone();
                let rest = t.without(0, a.max(b)).without(0, a.min(b));
                let coeff = S::from_rat(&Rat::int(-2)).div_checked(&self.lambda_at(1, &x)?)?;
                let applied = self
                    .entry_op(-1, 1, &x)?
                    .apply(&self.build_inner(&rest, alt_memo)?)?;
                return Ok(applied.scale_ref(&coeff));
            }
        }
        let pos = t.set(0).len() - 1;
        let z = t.set(0)[pos].clone();
        let rest = t.without(0, pos);
        let rest0: Vec<S> = rest.set(0).to_vec();
        let z0 = z_shift(c, &z, 0);
        let mut acc = self
            .entry_op(0, 1, &z)?
            .apply(&self.build_inner(&rest, alt_memo)?)?;
        for (l, t_l) in rest0.iter().enumerate() {
            let others: Vec<S> = rest0
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != l)
                .map(|(_, x)| x.clone())
                .collect();
            let mut w = prod_pair(|a, b| frak_f_fn(c, a, b), std::slice::from_ref(t_l), &others)?;
            w = w.ring_mul(&frak_f_fn(c, t_l, &z)?);
            w = w.ring_mul(&frak_f_fn(c, t_l, &z0)?);
            w = w.div_checked(&h_fn(c, t_l, &z0)?)?;
            if w.ring_is_zero() {
                continue;
            }
            let sub = self.pad_params(vec![others]);
            let applied = self
                .entry_op(-1, 1, &z)?
                .apply(&self.build_inner(&sub, alt_memo)?)?;
            acc = acc.add(&applied.scale_ref(&w))?;
        }
        let denom = self
            .lambda_at(1, &z)?
            .ring_mul(&prod_pair(|a, b| frak_f_fn(c, a, b), &[z0], &rest0)?);
        let inv = S::ring_one().div_checked(&denom)?;
        Ok(acc.scale_ref(&inv))
    }

    fn build_inner(&self, t: &Params<S>, alt: bool) -> Result<ChainVector<S>> {
        let key = t.key();
        let memo = if alt { &self.memo_alt } else { &self.memo };
        if let Some(v) = memo.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let m = t.top_rank();
        let out = if m == 0 {
            self.vacuum.clone()
        } else if m == 1 {
            self.strip_level0(t, alt)?
        } else if alt {
            self.strip_top_alt(t, m)?
        } else {
            self.strip_top(t, m, false)?
        };
        memo.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// Off-shell Bethe vector through the last-column recursion.
    pub fn build(&self, t: &Params<S>) -> Result<ChainVector<S>> {
        self.build_inner(t, false)
    }

    /// Off-shell Bethe vector through the first-row recursion (independent
    /// code path; must agree with [`BetheFactory::build`]).
    pub fn build_alt(&self, t: &Params<S>) -> Result<ChainVector<S>> {
        self.build_inner(t, true)
    }
}

/// A constructed Bethe vector tagged with the parameters that produced it.
#[derive(Clone, Debug)]
pub struct BetheVector<S: Scalar> {
    pub params: Params<S>,
    pub vector: ChainVector<S>,
}

/// Guarded public construction of B(t-bar).
pub fn build_bethe(f: &BetheFactory<Rat>, t: &BetheParams) -> Result<BetheVector<Rat>> {
    let vector = f.build(t)?;
    if !t.is_empty() && vector.is_zero() {
        return Err(Error::Genericity(
            "Bethe vector vanished for supposedly generic parameters".into(),
        ));
    }
    Ok(BetheVector {
        params: t.clone(),
        vector,
    })
}

/// Same vector through the first-row recursion.
pub fn build_bethe_alt(f: &BetheFactory<Rat>, t: &BetheParams) -> Result<BetheVector<Rat>> {
    let vector = f.build_alt(t)?;
    Ok(BetheVector {
        params: t.clone(),
        vector,
    })
}

/// A finished action: merged (coefficient, parameter collection) terms in
/// canonical order plus the assembled vector.
#[derive(Clone, Debug)]
pub struct ActionExpansion<S: Scalar> {
    pub terms: Vec<(S, Params<S>)>,
    pub assembled: ChainVector<S>,
}

impl ActionExpansion<Rat> {
    /// Reassemble from scratch; must equal `assembled`.
    pub fn reassemble(&self, f: &BetheFactory<Rat>) -> Result<ChainVector<Rat>> {
        let mut acc = ChainVector::zero(f.ctx.spec.n(), f.ctx.spec.sites);
        for (coeff, p) in &self.terms {
            acc = acc.add(&f.build(p)?.scale_ref(coeff))?;
        }
        Ok(acc)
    }
}

fn merge_terms(
    f: &BetheFactory<Rat>,
    raw: Vec<(Rat, Params<Rat>)>,
) -> Result<ActionExpansion<Rat>> {
    let mut merged: BTreeMap<Vec<Vec<Rat>>, (Rat, Params<Rat>)> = BTreeMap::new();
    for (coeff, params) in raw {
        let canon = params.canonicalized();
        let key = canon.key();
        match merged.get_mut(&key) {
            Some((acc, _)) => *acc = &*acc + &coeff,
            None => {
                merged.insert(key, (coeff, canon));
            }
        }
    }
    let mut terms = Vec::new();
    let mut assembled = ChainVector::zero(f.ctx.spec.n(), f.ctx.spec.sites);
    for (_, (coeff, params)) in merged {
        if coeff.is_zero() {
            continue;
        }
        assembled = assembled.add(&f.build(&params)?.scale_ref(&coeff))?;
        terms.push((coeff, params));
    }
    Ok(ActionExpansion { terms, assembled })
}

/// Weight of a single tripartition in the action sum (without the global
/// prefactor).
fn tri_weight(
    f: &BetheFactory<Rat>,
    part: &TriPartition<Rat>,
    n: usize,
) -> Result<Rat> {
    let c = f.c();
    let mut w = Rat::one();
    for s in 0..n {
        w = &w * &f.alpha_over(s, part.third(s))?;
        w = &w
            * &prod_pair(
                |a, b| gamma_s_fn(s, c, a, b),
                part.first(s),
                part.second(s),
            )?;
        w = &w
            * &prod_pair(
                |a, b| gamma_s_fn(s, c, a, b),
                part.second(s),
                part.third(s),
            )?;
        w = &w
            * &prod_pair(
                |a, b| gamma_s_fn(s, c, a, b),
                part.first(s),
                part.third(s),
            )?;
        w = &w * &prod_pair(|a, b| h_fn(c, a, b), part.second(s + 1), part.first(s))?;
        w = &w * &prod_pair(|a, b| h_fn(c, a, b), part.third(s + 1), part.first(s))?;
        w = &w * &prod_pair(|a, b| h_fn(c, a, b), part.third(s + 1), part.second(s))?;
        w = &w * &prod_pair(|a, b| g_inv(c, a, b), part.first(s + 1), part.second(s))?;
        w = &w * &prod_pair(|a, b| g_inv(c, a, b), part.first(s + 1), part.third(s))?;
        w = &w * &prod_pair(|a, b| g_inv(c, a, b), part.second(s + 1), part.third(s))?;
        if w.is_zero() {
            return Ok(w);
        }
    }
    Ok(w)
}

/// The action T_{i,j}(z) . B(t-bar) as an explicit partition sum.
pub fn action_formula(
    f: &BetheFactory<Rat>,
    i: i32,
    j: i32,
    z: &Rat,
    t: &BetheParams,
) -> Result<ActionExpansion<Rat>> {
    let n = f.n();
    let c = f.c();
    t.check_with_point(c, z, n)?;
    let w = WSets::new(t, z, c);
    let parts = enumerate_tripartitions(&w, i, j)?;
    let z1 = z_shift(c, z, 1);
    let sign = Rat::int((sigma(i) * sigma(-j)) as i64);
    let mut pref = -&(&sign * &f.lambda_at(n as i8, z)?);
    pref = &pref
        * &prod_pair(
            |a, b| crate::partitions::g_fn(c, a, b),
            &[z1],
            t.set(0),
        )?;
    let denom = &f.ctx.spec.params.kappa()
        * &prod_pair(|a, b| h_fn(c, a, b), std::slice::from_ref(z), t.set(0))?;
    pref = pref.div_checked(&denom)?;
    let mut raw = Vec::new();
    for part in &parts {
        let w_term = tri_weight(f, part, n)?;
        if w_term.is_zero() {
            continue;
        }
        let params = Params::from_sets((0..n).map(|s| part.second(s).to_vec()).collect());
        raw.push((&pref * &w_term, params));
    }
    merge_terms(f, raw)
}

/// Compare the action formula against direct matrix application, exactly.
pub fn verify_action(
    f: &BetheFactory<Rat>,
    i: i32,
    j: i32,
    z: &Rat,
    t: &BetheParams,
) -> Result<bool> {
    let expansion = action_formula(f, i, j, z, t)?;
    let direct = f
        .entry_op(i as i8, j as i8, z)?
        .apply(&f.build(t)?)?;
    Ok(direct == expansion.assembled)
}

/// Action of the zero mode T_{j,i}[0], 0 <= i < j <= n, as a partition sum
/// with the twist-weighted two-term bracket.
pub fn zero_mode_action(
    f: &BetheFactory<Rat>,
    j: usize,
    i: usize,
    t: &BetheParams,
) -> Result<ActionExpansion<Rat>> {
    let n = f.n();
    if !(i < j && j <= n) {
        return Err(Error::Index(format!(
            "zero-mode action needs 0 <= i < j <= n, got ({j}, {i})"
        )));
    }
    let c = f.c();
    let spec = &f.ctx.spec;
    let cards: Vec<usize> = (0..n).map(|s| usize::from(s >= i && s < j)).collect();
    let empty: Vec<Rat> = vec![];
    let mut raw = Vec::new();
    for part in enumerate_bipartitions(t.sets(), &cards) {
        let first = |s: usize| -> &[Rat] {
            if s < n {
                &part.levels[s].0
            } else {
                &empty
            }
        };
        let second = |s: usize| -> &[Rat] { &part.levels[s].1 };
        let full = |s: i32| -> &[Rat] {
            if (0..n as i32).contains(&s) {
                t.set(s as usize)
            } else {
                &empty
            }
        };
        let mut base = Rat::one();
        for s in 1..n {
            base = &base * &prod_pair(|a, b| g_inv(c, a, b), second(s), first(s - 1))?;
            base = &base * &prod_pair(|a, b| g_inv(c, a, b), first(s), second(s - 1))?;
            base = &base * &prod_pair(|a, b| g_inv(c, a, b), first(s), first(s - 1))?;
            // Within-level symmetrization: the per-pair factor
            // gamma_s/f_s, which is 1/(h(u,v)h(v,u)) here and trivial at
            // the short-root level s = 0.
            let hh = prod_pair(|a, b| h_fn(c, a, b), second(s), first(s))?
                .ring_mul(&prod_pair(|a, b| h_fn(c, a, b), first(s), second(s))?);
            base = base.div_checked(&hh)?;
        }
        let mut term_a = spec.chi_at(j as i8);
        let mut term_b = spec.chi_at(i as i8);
        for s in i..j {
            term_a = &term_a * &f.alpha_over(s, first(s))?;
            term_a = &term_a * &prod_pair(|a, b| f_fn(c, a, b), first(s), full(s as i32 - 1))?;
            term_a = &term_a * &prod_pair(|a, b| f_s_fn(s, c, a, b), second(s), first(s))?;
            let ha = if s >= 1 {
                prod_pair(|a, b| h_fn(c, a, b), first(s), first(s - 1))?
            } else {
                Rat::one()
            };
            term_a = term_a.div_checked(&ha)?;
            term_b = &term_b * &prod_pair(|a, b| f_fn(c, a, b), full(s as i32 + 1), first(s))?;
            term_b = &term_b * &prod_pair(|a, b| f_s_fn(s, c, a, b), first(s), second(s))?;
            let hb = if s + 1 < n {
                prod_pair(|a, b| h_fn(c, a, b), first(s + 1), first(s))?
            } else {
                Rat::one()
            };
            term_b = term_b.div_checked(&hb)?;
        }
        let coeff = &base * &(&term_a - &term_b);
        if coeff.is_zero() {
            continue;
        }
        let params = Params::from_sets(part.levels.iter().map(|l| l.1.clone()).collect());
        raw.push((coeff, params));
    }
    merge_terms(f, raw)
}

/// Independent coding of the simple-root case j = i + 1:
///
/// T_{i+1,i}[0] . B = sum_l B(..t^i_l..) (chi_{i+1} alpha_i(t^i_l)
///     - chi_i f_i(t^i_l,t^i_l..)f(t^{i+1},t^i_l)/(f_i(t^i_l..,t^i_l)f(t^i_l,t^{i-1})))
///     f_i(t^i_l..,t^i_l)/g(t^{i+1},t^i_l) h(t^i_l,t^{i-1})/(h(t^i_l,t^i)h(t^i,t^i_l)).
pub fn simple_root_action(
    f: &BetheFactory<Rat>,
    i: usize,
    t: &BetheParams,
) -> Result<ActionExpansion<Rat>> {
    let n = f.n();
    if i >= n {
        return Err(Error::Index(format!("simple-root level {i} outside 0..{n}")));
    }
    let c = f.c();
    let spec = &f.ctx.spec;
    let empty: Vec<Rat> = vec![];
    let level = |s: i32| -> &[Rat] {
        if (0..n as i32).contains(&s) {
            t.set(s as usize)
        } else {
            &empty
        }
    };
    let mut raw = Vec::new();
    for (l, t_l) in t.set(i).iter().enumerate() {
        let rest: Vec<Rat> = t
            .set(i)
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != l)
            .map(|(_, x)| x.clone())
            .collect();
        let one = [t_l.clone()];
        let alpha = f.alpha_at(i, t_l)?;
        let bracket = {
            let a = &spec.chi_at(i as i8 + 1) * &alpha;
            let num = prod_pair(|x, y| f_s_fn(i, c, x, y), &one, &rest)?
                .ring_mul(&prod_pair(|x, y| f_fn(c, x, y), level(i as i32 + 1), &one)?);
            let den = prod_pair(|x, y| f_s_fn(i, c, x, y), &rest, &one)?
                .ring_mul(&prod_pair(|x, y| f_fn(c, x, y), &one, level(i as i32 - 1))?);
            &a - &(&spec.chi_at(i as i8) * &num.div_checked(&den)?)
        };
        let mut tail = prod_pair(|x, y| f_s_fn(i, c, x, y), &rest, &one)?;
        // 1/g(t^{i+1}, t^i_l) as the non-singular product (u-v)/c.
        tail = &tail * &prod_pair(|x, y| g_inv(c, x, y), level(i as i32 + 1), &one)?;
        tail = &tail * &prod_pair(|x, y| h_fn(c, x, y), &one, level(i as i32 - 1))?;
        if i >= 1 {
            // gamma_i/f_i per within-level pair: 1/(h h) off the
            // short-root level, absent at i = 0.
            let hset = prod_pair(|x, y| h_fn(c, x, y), &one, &rest)?
                .ring_mul(&prod_pair(|x, y| h_fn(c, x, y), &rest, &one)?);
            tail = tail.div_checked(&hset)?;
        }
        let coeff = &bracket * &tail;
        if coeff.is_zero() {
            continue;
        }
        raw.push((coeff, t.without(i, l)));
    }
    merge_terms(f, raw)
}

/// Corner action: T_{-n,n}(z) . B(t-bar) is a single term proportional to
/// B over the augmented collection with z and z_s added at every level.
pub fn corner_action(
    f: &BetheFactory<Rat>,
    z: &Rat,
    t: &BetheParams,
) -> Result<ActionExpansion<Rat>> {
    let n = f.n();
    let c = f.c();
    t.check_with_point(c, z, n)?;
    let z1 = z_shift(c, z, 1);
    let zn = z_shift(c, z, n);
    let g_fn = crate::partitions::g_fn::<Rat>;
    let mut coeff = -&(&f.ctx.spec.params.kappa() * &f.lambda_at(n as i8, z)?);
    coeff = &coeff * &prod_pair(|a, b| g_fn(c, a, b), &[z1], t.set(0))?;
    coeff = &coeff * &prod_pair(|a, b| h_fn(c, a, b), std::slice::from_ref(z), t.set(n - 1))?;
    coeff = coeff.div_checked(&prod_pair(|a, b| h_fn(c, a, b), std::slice::from_ref(z), t.set(0))?)?;
    coeff = coeff.div_checked(&prod_pair(|a, b| g_fn(c, a, b), &[zn], t.set(n - 1))?)?;
    let w = WSets::new(t, z, c);
    let params = Params::from_sets((0..n).map(|s| w.level(s).to_vec()).collect());
    merge_terms(f, vec![(coeff, params)])
}

/// Outcome of the gl(n) collapse checks at empty t^0.
#[derive(Clone, Debug)]
pub struct GlnReport {
    /// T_{1,n}(z) acting as the pure gl(n) raising operator on the
    /// renormalized vectors.
    pub raising_ok: bool,
    /// Simple-root zero-mode actions on renormalized vectors, levels 1..n-1.
    pub simple_roots_ok: Vec<bool>,
}

impl GlnReport {
    pub fn all_ok(&self) -> bool {
        self.raising_ok && self.simple_roots_ok.iter().all(|b| *b)
    }
}

/// Renormalization prod h(t^s,t^s) / prod h(t^s,t^{s-1}) mapping B to the
/// gl(n) normalization.
fn gln_renorm(f: &BetheFactory<Rat>, t: &Params<Rat>) -> Result<Rat> {
    let c = f.c();
    let n = f.n();
    let mut num = Rat::one();
    for s in 1..n {
        num = &num * &prod_pair(|a, b| h_fn(c, a, b), t.set(s), t.set(s))?;
    }
    let mut den = Rat::one();
    for s in 2..n {
        den = &den * &prod_pair(|a, b| h_fn(c, a, b), t.set(s), t.set(s - 1))?;
    }
    num.div_checked(&den)
}

fn gln_tilde(f: &BetheFactory<Rat>, t: &Params<Rat>) -> Result<ChainVector<Rat>> {
    Ok(f.build(t)?.scale_ref(&gln_renorm(f, t)?))
}

/// With t^0 empty, check that T_{1,n}(z) acts as the gl(n) raising
/// operator on renormalized vectors and that the simple-root zero modes
/// act by the two-term gl(n) bracket.
pub fn gln_reduction_checks(
    f: &BetheFactory<Rat>,
    z: &Rat,
    t: &BetheParams,
) -> Result<GlnReport> {
    let n = f.n();
    let c = f.c();
    if !t.set(0).is_empty() {
        return Err(Error::Genericity(
            "gl(n) reduction requires an empty level-0 parameter set".into(),
        ));
    }
    t.check_with_point(c, z, n)?;
    let lhs = f.entry_op(1, n as i8, z)?.apply(&gln_tilde(f, t)?)?;
    let mut plus_sets: Vec<Vec<Rat>> = t.sets().to_vec();
    for set in plus_sets.iter_mut().skip(1) {
        set.push(z.clone());
    }
    let t_plus = Params::from_sets(plus_sets);
    let rhs = gln_tilde(f, &t_plus)?.scale_ref(&f.lambda_at(n as i8, z)?);
    let raising_ok = lhs == rhs;
    let mut simple_roots_ok = Vec::new();
    let empty: Vec<Rat> = vec![];
    for i in 1..n {
        let zm = f.ctx.monodromy.zero_mode(i as i8 + 1, i as i8)?;
        let lhs = zm.apply(&gln_tilde(f, t)?)?;
        let mut rhs = ChainVector::zero(f.ctx.spec.n(), f.ctx.spec.sites);
        for (l, t_l) in t.set(i).iter().enumerate() {
            let rest: Vec<Rat> = t
                .set(i)
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != l)
                .map(|(_, x)| x.clone())
                .collect();
            let one = [t_l.clone()];
            let upper = if i + 1 < n { t.set(i + 1) } else { &empty };
            let lower = if i >= 2 { t.set(i - 1) } else { &empty };
            let a = {
                let ratio = prod_pair(|x, y| f_fn(c, x, y), &rest, &one)?
                    .div_checked(&prod_pair(|x, y| f_fn(c, x, y), upper, &one)?)?;
                &(&f.ctx.spec.chi_at(i as i8 + 1) * &f.alpha_at(i, t_l)?) * &ratio
            };
            let b = {
                let ratio = prod_pair(|x, y| f_fn(c, x, y), &one, &rest)?
                    .div_checked(&prod_pair(|x, y| f_fn(c, x, y), &one, lower)?)?;
                &f.ctx.spec.chi_at(i as i8) * &ratio
            };
            let reduced = t.without(i, l);
            rhs = rhs.add(&gln_tilde(f, &reduced)?.scale_ref(&(&a - &b)))?;
        }
        simple_roots_ok.push(lhs == rhs);
    }
    Ok(GlnReport {
        raising_ok,
        simple_roots_ok,
    })
}

/// Rank-1 action formula coded directly from its closed form:
///
/// T_{i,j}(z) . B(t^0) = (-1)^(d_{i,-1}+d_{j,-1}) lambda_1(z)/2
///   sum_part B(w^0_II) alpha_0(w^0_III)
///   frak_f(w^0_I,w^0_II) frak_f(w^0_II,w^0_III) frak_f(w^0_I,w^0_III)
///   / (h(z,w^0_III) h(w^0_I, z+c/2)),
///
/// over partitions of w^0 = {t^0, z, z+c/2} with #I = i+1 and #III = 1-j.
/// Valid verbatim on the innermost embedded block of a higher-rank chain
/// (n > 1 with every level above 0 empty and |i|, |j| <= 1).
pub fn rank1_action(
    f: &BetheFactory<Rat>,
    i: i32,
    j: i32,
    z: &Rat,
    t: &BetheParams,
) -> Result<ActionExpansion<Rat>> {
    let n = f.n();
    if i.abs() > 1 || j.abs() > 1 {
        return Err(Error::Index(
            "rank-1 action formula covers |i|, |j| <= 1".into(),
        ));
    }
    if t.sets().iter().skip(1).any(|s| !s.is_empty()) {
        return Err(Error::Index(
            "rank-1 action formula needs empty levels above 0".into(),
        ));
    }
    let c = f.c();
    t.check_with_point(c, z, n)?;
    let z0 = z_shift(c, z, 0);
    let mut level: Vec<Rat> = t.set(0).to_vec();
    level.push(z.clone());
    level.push(z0.clone());
    let sign = if (i == -1) ^ (j == -1) {
        -Rat::one()
    } else {
        Rat::one()
    };
    let pref = &(&sign * &f.lambda_at(1, z)?) * &Rat::new(1, 2);
    let c1 = usize::try_from(i + 1).map_err(|_| Error::Index("i below -1".into()))?;
    let c3 = usize::try_from(1 - j).map_err(|_| Error::Index("j above 1".into()))?;
    let mut raw = Vec::new();
    if c1 + c3 <= level.len() {
        let wrap = vec![level.clone()];
        for part in enumerate_bipartitions(&wrap, &[c1]) {
            let first = part.levels[0].0.clone();
            let rest = part.levels[0].1.clone();
            for part3 in enumerate_bipartitions([rest].as_ref(), &[c3]) {
                let third = part3.levels[0].0.clone();
                let second = part3.levels[0].1.clone();
                let mut w = f.alpha_over(0, &third)?;
                w = &w * &prod_pair(|a, b| frak_f_fn(c, a, b), &first, &second)?;
                w = &w * &prod_pair(|a, b| frak_f_fn(c, a, b), &second, &third)?;
                w = &w * &prod_pair(|a, b| frak_f_fn(c, a, b), &first, &third)?;
                w = w.div_checked(&prod_pair(|a, b| h_fn(c, a, b), std::slice::from_ref(z), &third)?)?;
                w = w.div_checked(&prod_pair(|a, b| h_fn(c, a, b), &first, std::slice::from_ref(&z0))?)?;
                if w.is_zero() {
                    continue;
                }
                raw.push((&pref * &w, f.pad_params(vec![second])));
            }
        }
    }
    merge_terms(f, raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy::lowest_product_state;
    use crate::rmatrix::ModelParams;

    fn r(p: i64, q: i64) -> Rat {
        Rat::new(p, q)
    }

    fn ctx(n: u8, xi: Vec<Rat>, twisted: bool) -> BetheContext {
        let params = ModelParams::new(n, Rat::int(1)).unwrap();
        let spec = if twisted {
            let chi = [2i64, 3, 5]
                .iter()
                .take(n as usize)
                .map(|&p| Rat::int(p))
                .collect();
            ChainSpec::new(params, xi, chi).unwrap()
        } else {
            ChainSpec::untwisted(params, xi).unwrap()
        };
        BetheContext::new(spec).unwrap()
    }

    fn params_n(ctx: &BetheContext, sets: Vec<Vec<Rat>>) -> BetheParams {
        let mut sets = sets;
        sets.resize(ctx.n(), vec![]);
        BetheParams::new(sets, &ctx.spec.params.c).unwrap()
    }

    #[test]
    fn empty_collection_gives_vacuum() {
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let t = params_n(&ctx, vec![]);
        let b = build_bethe(&f, &t).unwrap();
        assert_eq!(
            b.vector,
            ChainVector::basis(2, lowest_product_state(2, 1)).unwrap()
        );
    }

    #[test]
    fn action_and_zero_modes_at_rank3() {
        // Rank 3 exercises a three-deep descent and the full auxiliary
        // partition ladder.
        let ctx_t = ctx(3, vec![r(1, 3)], true);
        let f = BetheFactory::<Rat>::new(&ctx_t);
        let t = params_n(
            &ctx_t,
            vec![vec![r(2, 7)], vec![r(3, 5)], vec![r(4, 13)]],
        );
        let z = r(-5, 11);
        let built = f.build(&t).unwrap();
        assert!(!built.is_zero());
        assert_eq!(built, f.build_alt(&t).unwrap());
        for (j, i) in [(1usize, 0usize), (2, 1), (3, 2), (3, 0)] {
            let expansion = zero_mode_action(&f, j, i, &t).unwrap();
            let zm = f.ctx.monodromy.zero_mode(j as i8, i as i8).unwrap();
            assert_eq!(
                zm.apply(&built).unwrap(),
                expansion.assembled,
                "zero mode ({j}, {i})"
            );
        }
        // Untwisted chain for the asserted action checks.
        let ctx_u = ctx(3, vec![r(1, 3)], false);
        let fu = BetheFactory::<Rat>::new(&ctx_u);
        let tu = params_n(
            &ctx_u,
            vec![vec![r(2, 7)], vec![r(3, 5)], vec![r(4, 13)]],
        );
        for (i, j) in [(0, 0), (3, 3), (-3, 3), (1, -2), (-1, 2), (2, 1)] {
            assert!(
                verify_action(&fu, i, j, &z, &tu).unwrap(),
                "action mismatch at rank 3, (i,j)=({i},{j})"
            );
        }
    }

    #[test]
    fn action_holds_on_random_parameters() {
        // Seeded sweep over admissible random parameters at rank 1.
        use rand::{Rng, SeedableRng};
        let ctx = ctx(1, vec![r(1, 3), r(-1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
        let mut draws = 0;
        while draws < 6 {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
                Rat::new(rng.gen_range(-30..=30), [7, 11, 13][rng.gen_range(0..3)])
            };
            let t0 = pick(&mut rng);
            let t1 = pick(&mut rng);
            let z = pick(&mut rng);
            let Ok(t) = BetheParams::new(vec![vec![t0, t1]], &ctx.spec.params.c) else {
                continue;
            };
            if t.check_with_point(&ctx.spec.params.c, &z, 1).is_err() {
                continue;
            }
            draws += 1;
            for i in -1..=1 {
                for j in -1..=1 {
                    assert!(
                        verify_action(&f, i, j, &z, &t).unwrap(),
                        "random action mismatch at ({i},{j}), t={t:?}, z={z}"
                    );
                }
            }
        }
    }

    /// First o_5 ground-truth display:
    /// B(t0; t1) = T_{0,2}(t1)|0>/l2(t1)
    ///           + T_{1,2}(t1)T_{0,1}(t0)|0>/(g(t1,t0) l2(t1) l1(t0)).
    #[test]
    fn ground_truth_o5_one_one() {
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let c = f.c();
        let (t0, t1) = (r(2, 7), r(3, 5));
        let t = params_n(&ctx, vec![vec![t0.clone()], vec![t1.clone()]]);
        let built = f.build(&t).unwrap();
        let vac = f.vacuum_vector();
        let g = crate::partitions::g_fn(c, &t1, &t0).unwrap();
        let term1 = f
            .entry_op(0, 2, &t1)
            .unwrap()
            .apply(&vac)
            .unwrap()
            .scale_ref(&f.lambda_at(2, &t1).unwrap().recip().unwrap());
        let inner = f.entry_op(0, 1, &t0).unwrap().apply(&vac).unwrap();
        let term2 = f
            .entry_op(1, 2, &t1)
            .unwrap()
            .apply(&inner)
            .unwrap()
            .scale_ref(
                &(&(&f.lambda_at(2, &t1).unwrap() * &f.lambda_at(1, &t0).unwrap()) * &g)
                    .recip()
                    .unwrap(),
            );
        assert_eq!(built, term1.add(&term2).unwrap());
    }

    /// Second o_5 display, two parameters at level 1.
    #[test]
    fn ground_truth_o5_one_two() {
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let c = f.c();
        let t0 = r(2, 7);
        let (t11, t12) = (r(3, 5), r(9, 11));
        let t = params_n(
            &ctx,
            vec![vec![t0.clone()], vec![t11.clone(), t12.clone()]],
        );
        let built = f.build(&t).unwrap();
        let vac = f.vacuum_vector();
        let lam2 = |u: &Rat| f.lambda_at(2, u).unwrap();
        let lam1 = |u: &Rat| f.lambda_at(1, u).unwrap();
        let gf = |u: &Rat, v: &Rat| crate::partitions::g_fn(c, u, v).unwrap();
        let hf = |u: &Rat, v: &Rat| h_fn(c, u, v).unwrap();
        let h_bar = &hf(&t11, &t12) * &hf(&t12, &t11);
        let apply2 = |i1: i8, u1: &Rat, i2: i8, u2: &Rat| {
            let inner = f.entry_op(i2, 2, u2).unwrap().apply(&vac).unwrap();
            f.entry_op(i1, 2, u1).unwrap().apply(&inner).unwrap()
        };
        // h(t11,t0)/h(tbar,tbar) T02(t12) T12(t11) / (l2 l2)
        let mut expect = apply2(0, &t12, 1, &t11).scale_ref(
            &(&hf(&t11, &t0) / &(&(&h_bar * &lam2(&t12)) * &lam2(&t11))),
        );
        // 1/(g(t12,t0) h) T12(t12) T02(t11) / (l2 l2)
        expect = expect
            .add(&apply2(1, &t12, 0, &t11).scale_ref(
                &(&gf(&t12, &t0) * &(&h_bar * &(&lam2(&t12) * &lam2(&t11)))).recip().unwrap(),
            ))
            .unwrap();
        // 1/(g(tbar,t0) h) T12(t12) T12(t11) T01(t0) / (l2 l2 l1)
        let innermost = f.entry_op(0, 1, &t0).unwrap().apply(&vac).unwrap();
        let mid = f.entry_op(1, 2, &t11).unwrap().apply(&innermost).unwrap();
        let top = f.entry_op(1, 2, &t12).unwrap().apply(&mid).unwrap();
        let g_bar = &gf(&t11, &t0) * &gf(&t12, &t0);
        expect = expect
            .add(&top.scale_ref(
                &(&g_bar * &(&h_bar * &(&(&lam2(&t12) * &lam2(&t11)) * &lam1(&t0))))
                    .recip()
                    .unwrap(),
            ))
            .unwrap();
        assert_eq!(built, expect);
    }

    /// Third o_5 display, two parameters at level 0.
    #[test]
    fn ground_truth_o5_two_one() {
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let c = f.c();
        let (t01, t02) = (r(2, 7), r(3, 7));
        let t1 = r(3, 5);
        let t = params_n(
            &ctx,
            vec![vec![t01.clone(), t02.clone()], vec![t1.clone()]],
        );
        let built = f.build(&t).unwrap();
        let vac = f.vacuum_vector();
        let lam2 = f.lambda_at(2, &t1).unwrap();
        let lam1 = |u: &Rat| f.lambda_at(1, u).unwrap();
        let gf = |u: &Rat, v: &Rat| crate::partitions::g_fn(c, u, v).unwrap();
        let hf = |u: &Rat, v: &Rat| h_fn(c, u, v).unwrap();
        let ff = |u: &Rat, v: &Rat| frak_f_fn(c, u, v).unwrap();
        // -T_{-1,2}(t1)|0>/l2
        let mut expect = f
            .entry_op(-1, 2, &t1)
            .unwrap()
            .apply(&vac)
            .unwrap()
            .scale_ref(&-&lam2.recip().unwrap());
        // frak_f(t02,t01)/g(t1,t01) T02 T01(t01) / (l2 l1(t01)) and the swap
        for (a, b) in [(&t01, &t02), (&t02, &t01)] {
            let inner = f.entry_op(0, 1, a).unwrap().apply(&vac).unwrap();
            let top = f.entry_op(0, 2, &t1).unwrap().apply(&inner).unwrap();
            let coeff = &ff(b, a) / &(&gf(&t1, a) * &(&lam2 * &lam1(a)));
            expect = expect.add(&top.scale_ref(&coeff)).unwrap();
        }
        let g_bar = &gf(&t1, &t01) * &gf(&t1, &t02);
        // -1/(g(t1,tbar0) h(t02,t01)) T12 T_{-1,1}(t02) / (l2 l1(t02))
        let inner = f.entry_op(-1, 1, &t02).unwrap().apply(&vac).unwrap();
        let top = f.entry_op(1, 2, &t1).unwrap().apply(&inner).unwrap();
        let coeff = -&(&(&g_bar * &hf(&t02, &t01)) * &(&lam2 * &lam1(&t02)))
            .recip()
            .unwrap();
        expect = expect.add(&top.scale_ref(&coeff)).unwrap();
        // +1/(g(t1,tbar0) frak_f(t02+c/2,t01)) T12 T01(t02) T01(t01) / (l2 l1 l1)
        let innermost = f.entry_op(0, 1, &t01).unwrap().apply(&vac).unwrap();
        let mid = f.entry_op(0, 1, &t02).unwrap().apply(&innermost).unwrap();
        let top = f.entry_op(1, 2, &t1).unwrap().apply(&mid).unwrap();
        let shifted = &t02 + &(c * &r(1, 2));
        let coeff = (&(&g_bar * &ff(&shifted, &t01))
            * &(&lam2 * &(&lam1(&t02) * &lam1(&t01))))
            .recip()
            .unwrap();
        expect = expect.add(&top.scale_ref(&coeff)).unwrap();
        assert_eq!(built, expect);
    }

    /// o_7 ground-truth display (denominator of the last term corrected to
    /// l3(t2) l2(t1) l1(t0); cf. the recursion step).
    #[test]
    fn ground_truth_o7() {
        let ctx = ctx(3, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let c = f.c();
        let (t0, t1, t2) = (r(2, 7), r(3, 5), r(-5, 11));
        let t = params_n(
            &ctx,
            vec![vec![t0.clone()], vec![t1.clone()], vec![t2.clone()]],
        );
        let built = f.build(&t).unwrap();
        let vac = f.vacuum_vector();
        let lam = |i: i8, u: &Rat| f.lambda_at(i, u).unwrap();
        let gf = |u: &Rat, v: &Rat| crate::partitions::g_fn(c, u, v).unwrap();
        let mut expect = f
            .entry_op(0, 3, &t2)
            .unwrap()
            .apply(&vac)
            .unwrap()
            .scale_ref(&lam(3, &t2).recip().unwrap());
        let inner01 = f.entry_op(0, 1, &t0).unwrap().apply(&vac).unwrap();
        let t13 = f.entry_op(1, 3, &t2).unwrap().apply(&inner01).unwrap();
        expect = expect
            .add(&t13.scale_ref(
                &(&gf(&t1, &t0) * &(&lam(3, &t2) * &lam(1, &t0))).recip().unwrap(),
            ))
            .unwrap();
        let inner02 = f.entry_op(0, 2, &t1).unwrap().apply(&vac).unwrap();
        let t23 = f.entry_op(2, 3, &t2).unwrap().apply(&inner02).unwrap();
        expect = expect
            .add(&t23.scale_ref(
                &(&gf(&t2, &t1) * &(&lam(3, &t2) * &lam(2, &t1))).recip().unwrap(),
            ))
            .unwrap();
        let mid12 = f.entry_op(1, 2, &t1).unwrap().apply(&inner01).unwrap();
        let top = f.entry_op(2, 3, &t2).unwrap().apply(&mid12).unwrap();
        let denom = &(&gf(&t2, &t1) * &gf(&t1, &t0))
            * &(&lam(3, &t2) * &(&lam(2, &t1) * &lam(1, &t0)));
        expect = expect.add(&top.scale_ref(&denom.recip().unwrap())).unwrap();
        assert_eq!(built, expect);
    }

    #[test]
    fn permutation_invariance_and_alt_path() {
        let ctx = ctx(2, vec![r(1, 3), r(-1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let sets = vec![vec![r(2, 7)], vec![r(3, 5), r(9, 11)]];
        let t = params_n(&ctx, sets.clone());
        let shuffled = params_n(&ctx, vec![sets[0].clone(), vec![r(9, 11), r(3, 5)]]);
        let a = f.build(&t).unwrap();
        assert!(!a.is_zero());
        assert_eq!(a, f.build(&shuffled).unwrap());
        assert_eq!(a, f.build_alt(&t).unwrap());
        // r = (1, 1) as well
        let t2 = params_n(&ctx, vec![vec![r(2, 7)], vec![r(3, 5)]]);
        assert_eq!(f.build(&t2).unwrap(), f.build_alt(&t2).unwrap());
    }

    #[test]
    fn empty_weight_spaces_give_zero_vectors() {
        // On tensor powers of the vector representation a lone level-0
        // excitation has no states: B(r = (1,0)) vanishes identically.
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let t = params_n(&ctx, vec![vec![r(2, 7)]]);
        assert!(f.build(&t).unwrap().is_zero());
        // The action formula must respect this: the expansion of
        // T_{i,j}(z) B collapses to zero despite nonzero per-term vectors.
        let z = r(-5, 11);
        for (i, j) in [(1, 2), (0, 0), (-1, 1)] {
            assert!(verify_action(&f, i, j, &z, &t).unwrap(), "({i}, {j})");
        }
    }

    #[test]
    fn action_matches_direct_application_rank1() {
        let ctx = ctx(1, vec![r(1, 3), r(-1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let t = params_n(&ctx, vec![vec![r(2, 7)]]);
        let z = r(-5, 11);
        for i in -1..=1 {
            for j in -1..=1 {
                assert!(
                    verify_action(&f, i, j, &z, &t).unwrap(),
                    "action mismatch at ({i}, {j})"
                );
            }
        }
    }

    #[test]
    fn rank1_display_matches_general_formula() {
        let ctx = ctx(1, vec![r(1, 3), r(-1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let z = r(-5, 11);
        for sets in [vec![vec![r(2, 7)]], vec![vec![r(2, 7), r(3, 7)]]] {
            let t = params_n(&ctx, sets);
            for i in -1..=1 {
                for j in -1..=1 {
                    let general = action_formula(&f, i, j, &z, &t).unwrap();
                    let display = rank1_action(&f, i, j, &z, &t).unwrap();
                    assert_eq!(general.terms, display.terms, "terms at ({i}, {j})");
                    assert_eq!(general.assembled, display.assembled);
                }
            }
        }
    }

    #[test]
    fn remark_only_zn_in_first_subset_survives() {
        // Nonzero tripartition weights force w^n_I = {z_n}, w^n_III = {z}.
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let t = params_n(&ctx, vec![vec![r(2, 7)], vec![r(3, 5)]]);
        let z = r(-5, 11);
        let w = WSets::new(&t, &z, f.c());
        let n = f.n();
        let zn = z_shift(f.c(), &z, n);
        for (i, j) in [(0, 0), (1, -1), (2, 2), (-2, 1)] {
            for part in enumerate_tripartitions(&w, i, j).unwrap() {
                let weight = tri_weight(&f, &part, n).unwrap();
                if !weight.is_zero() {
                    assert_eq!(part.first(n), &[zn.clone()][..]);
                    assert_eq!(part.third(n), &[z.clone()][..]);
                }
            }
        }
    }

    #[test]
    fn corner_action_consistency() {
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let t = params_n(&ctx, vec![vec![r(2, 7)], vec![r(3, 5)]]);
        let z = r(-5, 11);
        let corner = corner_action(&f, &z, &t).unwrap();
        assert_eq!(corner.terms.len(), 1);
        let general = action_formula(&f, -2, 2, &z, &t).unwrap();
        assert_eq!(corner.terms, general.terms);
        // and against the direct matrix product
        let direct = f.entry_op(-2, 2, &z).unwrap().apply(&f.build(&t).unwrap()).unwrap();
        assert_eq!(direct, corner.assembled);
    }

    #[test]
    fn zero_mode_action_matches_operators() {
        let ctx = ctx(2, vec![r(1, 3)], true);
        let f = BetheFactory::<Rat>::new(&ctx);
        let t = params_n(&ctx, vec![vec![r(2, 7)], vec![r(3, 5)]]);
        for (j, i) in [(1usize, 0usize), (2, 0), (2, 1)] {
            let expansion = zero_mode_action(&f, j, i, &t).unwrap();
            let zm = f.ctx.monodromy.zero_mode(j as i8, i as i8).unwrap();
            let direct = zm.apply(&f.build(&t).unwrap()).unwrap();
            assert_eq!(direct, expansion.assembled, "zero mode ({j}, {i})");
            if j == i + 1 {
                let simple = simple_root_action(&f, i, &t).unwrap();
                assert_eq!(simple.terms, expansion.terms);
            }
        }
    }

    #[test]
    fn on_shell_untwisted_highest_weight() {
        // n = 1, L = 2, xi = (1/3, -1/3): the single Bethe equation
        // alpha_0(t) = 1 has the exact root t = (xi_1 + xi_2)/2 = 0.  With
        // chi = 1 the zero mode T_{1,0}[0] must annihilate B({0}) exactly.
        let ctx = ctx(1, vec![r(1, 3), r(-1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let root = Rat::zero();
        assert!(f.alpha_at(0, &root).unwrap().is_one());
        let t = params_n(&ctx, vec![vec![root]]);
        let b = f.build(&t).unwrap();
        assert!(!b.is_zero());
        let zm = f.ctx.monodromy.zero_mode(1, 0).unwrap();
        assert!(zm.apply(&b).unwrap().is_zero());
        // Off-shell parameters are not annihilated.
        let t_off = params_n(&ctx, vec![vec![r(2, 7)]]);
        let b_off = f.build(&t_off).unwrap();
        assert!(!zm.apply(&b_off).unwrap().is_zero());
    }

    #[test]
    fn gln_collapse_single_term() {
        // i = 1, j = n with empty t^0: the action reduces to one term
        // lambda_n(z) h(t^1, z) h(z, t^{n-1}) B(0, {t^1,z}, ...).
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let c = f.c();
        let t = params_n(&ctx, vec![vec![], vec![r(3, 5)]]);
        let z = r(-5, 11);
        let exp = action_formula(&f, 1, 2, &z, &t).unwrap();
        assert_eq!(exp.terms.len(), 1);
        let coeff = &exp.terms[0].0;
        let h1 = prod_pair(|a, b| h_fn(c, a, b), t.set(1), std::slice::from_ref(&z)).unwrap();
        let h2 = prod_pair(|a, b| h_fn(c, a, b), std::slice::from_ref(&z), t.set(1)).unwrap();
        let expect = &f.lambda_at(2, &z).unwrap() * &(&h1 * &h2);
        assert_eq!(coeff, &expect);
        let mut plus = t.sets().to_vec();
        plus[1].push(z.clone());
        assert_eq!(
            exp.terms[0].1,
            Params::from_sets(plus).canonicalized()
        );
    }

    #[test]
    fn gln_reduction_checks_pass() {
        let ctx = ctx(2, vec![r(1, 3)], true);
        let f = BetheFactory::<Rat>::new(&ctx);
        let z = r(-5, 11);
        for sets in [vec![vec![], vec![r(3, 5)]], vec![vec![], vec![r(3, 5), r(9, 11)]]] {
            let t = params_n(&ctx, sets);
            let report = gln_reduction_checks(&f, &z, &t).unwrap();
            assert!(report.all_ok(), "{report:?}");
        }
    }

    #[test]
    fn embedded_block_reduces_to_rank1_action() {
        // With the top level empty, the rank-2 action at |i|, |j| <= 1
        // restricts to the rank-1 action formula of the embedded block
        // (same measured lambda_1 and alpha_0).
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let z = r(-5, 11);
        for sets in [vec![vec![r(2, 7)]], vec![vec![r(2, 7), r(3, 7)]]] {
            let t = params_n(&ctx, sets);
            for i in -1..=1 {
                for j in -1..=1 {
                    let general = action_formula(&f, i, j, &z, &t).unwrap();
                    let embedded = rank1_action(&f, i, j, &z, &t).unwrap();
                    assert_eq!(general.terms, embedded.terms, "(i,j)=({i},{j})");
                    assert_eq!(general.assembled, embedded.assembled);
                }
            }
        }
    }

    #[test]
    fn expansion_reassembles() {
        let ctx = ctx(2, vec![r(1, 3)], false);
        let f = BetheFactory::<Rat>::new(&ctx);
        let t = params_n(&ctx, vec![vec![r(2, 7)], vec![r(3, 5)]]);
        let z = r(-5, 11);
        let exp = action_formula(&f, 0, 1, &z, &t).unwrap();
        assert_eq!(exp.reassemble(&f).unwrap(), exp.assembled);
    }
}
