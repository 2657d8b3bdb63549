//! Scalar weight functions, shorthand set-products, Bethe parameter
//! collections and the constrained partition enumerators.
//!
//! The rational building blocks are
//!
//!   g(u,v) = c/(u-v),          f(u,v) = (u-v+c)/(u-v),
//!   h(u,v) = (u-v+c)/c,        frak_f(u,v) = (u-v+c/2)/(u-v),
//!
//! with the level-dependent variants f_s (frak_f at the short-root level
//! s = 0, f otherwise) and
//!
//!   gamma_s(u,v) = frak_f(u,v)                 for s = 0,
//!   gamma_s(u,v) = c^2/((u-v)(v-u+c))          for s >= 1.
//!
//! Set arguments mean products over all pairs, with empty products equal
//! to one.  The tripartition enumerator produces, level by level, the
//! ordered subsets (I, II, III) with the cardinalities
//!
//!   #I_s   = Theta(i+s) + Theta(i-s-1),
//!   #III_s = Theta(s-j) + Theta(-j-s-1),
//!
//! that the action formula for T_{i,j}(z) sums over.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Rat, Scalar};

/// Heaviside step on integers: 1 for p >= 0, else 0.
pub fn theta(p: i32) -> usize {
    usize::from(p >= 0)
}

/// sigma_i = 2 Theta(i-1) - 1: -1 for i <= 0 and +1 for i > 0.
pub fn sigma(i: i32) -> i32 {
    2 * theta(i - 1) as i32 - 1
}

/// g(u,v) = c/(u-v).
pub fn g_fn<S: Scalar>(c: &S, u: &S, v: &S) -> Result<S> {
    c.div_checked(&u.ring_sub(v))
}

/// 1/g(u,v) = (u-v)/c; vanishes (without a pole) at u = v.
pub fn g_inv<S: Scalar>(c: &S, u: &S, v: &S) -> Result<S> {
    u.ring_sub(v).div_checked(c)
}

/// f(u,v) = (u-v+c)/(u-v).
pub fn f_fn<S: Scalar>(c: &S, u: &S, v: &S) -> Result<S> {
    let d = u.ring_sub(v);
    d.ring_add(c).div_checked(&d)
}

/// h(u,v) = f(u,v)/g(u,v) = (u-v+c)/c.
pub fn h_fn<S: Scalar>(c: &S, u: &S, v: &S) -> Result<S> {
    u.ring_sub(v).ring_add(c).div_checked(c)
}

/// frak_f(u,v) = (u-v+c/2)/(u-v).
pub fn frak_f_fn<S: Scalar>(c: &S, u: &S, v: &S) -> Result<S> {
    let half = c.div_checked(&S::from_rat(&Rat::int(2)))?;
    let d = u.ring_sub(v);
    d.ring_add(&half).div_checked(&d)
}

/// f_s: frak_f at the short-root level s = 0, f for s >= 1.
pub fn f_s_fn<S: Scalar>(s: usize, c: &S, u: &S, v: &S) -> Result<S> {
    if s == 0 {
        frak_f_fn(c, u, v)
    } else {
        f_fn(c, u, v)
    }
}

/// gamma_s: frak_f at level 0, c^2/((u-v)(v-u+c)) for s >= 1.
pub fn gamma_s_fn<S: Scalar>(s: usize, c: &S, u: &S, v: &S) -> Result<S> {
    if s == 0 {
        return frak_f_fn(c, u, v);
    }
    let d = u.ring_sub(v);
    let c2 = c.ring_mul(c);
    c2.div_checked(&d.ring_mul(&v.ring_sub(u).ring_add(c)))
}

/// z_s = z - c(s - 1/2).
pub fn z_shift<S: Scalar>(c: &S, z: &S, s: usize) -> S {
    let offset = S::from_rat(&(&Rat::int(s as i64) - &Rat::new(1, 2)));
    z.ring_sub(&c.ring_mul(&offset))
}

/// prod over a in A, b in B of fn(a, b); empty sets give 1.
pub fn prod_pair<S: Scalar>(
    mut weight: impl FnMut(&S, &S) -> Result<S>,
    a: &[S],
    b: &[S],
) -> Result<S> {
    let mut acc = S::ring_one();
    for x in a {
        for y in b {
            acc = acc.ring_mul(&weight(x, y)?);
        }
    }
    Ok(acc)
}

/// Bethe parameter collection: one list of parameters per level 0..n-1,
/// with cardinalities r_s = #sets[s] possibly zero.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Params<S> {
    sets: Vec<Vec<S>>,
}

/// Exact-parameter collection used by all identity checks.
pub type BetheParams = Params<Rat>;

impl<S: Scalar> Params<S> {
    /// Unguarded constructor for internally generated collections (action
    /// expansions put the evaluation point and its shifts into the sets,
    /// which the genericity guard would reject).
    pub fn from_sets(sets: Vec<Vec<S>>) -> Self {
        Params { sets }
    }

    pub fn empty(levels: usize) -> Self {
        Params {
            sets: vec![vec![]; levels],
        }
    }

    pub fn levels(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, s: usize) -> &[S] {
        &self.sets[s]
    }

    pub fn sets(&self) -> &[Vec<S>] {
        &self.sets
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.sets.iter().map(|s| s.len()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.iter().all(|s| s.is_empty())
    }

    /// 1 + the highest level carrying a parameter; 0 when all sets are
    /// empty.  This is the rank of the embedded algebra the recursion
    /// currently works in.
    pub fn top_rank(&self) -> usize {
        self.sets
            .iter()
            .rposition(|s| !s.is_empty())
            .map_or(0, |p| p + 1)
    }

    /// Memoization / merge key: per-level scalar keys in the stored order.
    pub fn key(&self) -> Vec<Vec<S::Key>> {
        self.sets
            .iter()
            .map(|lvl| lvl.iter().map(|x| x.key()).collect())
            .collect()
    }

    /// Copy with each level sorted by scalar key; canonical representative
    /// for term merging.
    pub fn canonicalized(&self) -> Self {
        let mut sets = self.sets.clone();
        for lvl in &mut sets {
            lvl.sort_by_key(|a| a.key());
        }
        Params { sets }
    }

    /// Copy with one parameter removed from level s.
    pub fn without(&self, s: usize, pos: usize) -> Self {
        let mut sets = self.sets.clone();
        sets[s].remove(pos);
        Params { sets }
    }
}

impl BetheParams {
    /// Guarded constructor: within each level parameters must be pairwise
    /// distinct, and across the whole collection no difference may hit
    /// {0, +-c, +-c/2}.
    pub fn new(sets: Vec<Vec<Rat>>, c: &Rat) -> Result<Self> {
        let p = Params { sets };
        p.check_internal(c)?;
        Ok(p)
    }

    fn check_internal(&self, c: &Rat) -> Result<()> {
        for (s, lvl) in self.sets.iter().enumerate() {
            for a in 0..lvl.len() {
                for b in 0..a {
                    if lvl[a] == lvl[b] {
                        return Err(Error::Genericity(format!(
                            "level {s} contains {} twice",
                            lvl[a]
                        )));
                    }
                }
            }
        }
        let flat: Vec<&Rat> = self.sets.iter().flatten().collect();
        for a in 0..flat.len() {
            for b in 0..a {
                check_diff(c, flat[a], flat[b], "Bethe parameters")?;
            }
        }
        Ok(())
    }

    /// Joint guard with an evaluation point z: every parameter must stay
    /// off {0, +-c, +-c/2} differences with z and all its shifts z_0..z_n.
    /// Differences among the shifts themselves are forced by construction
    /// and are not checked.
    pub fn check_with_point(&self, c: &Rat, z: &Rat, n: usize) -> Result<()> {
        self.check_internal(c)?;
        let mut shifts = vec![z.clone()];
        for s in 0..=n {
            shifts.push(z_shift(c, z, s));
        }
        for t in self.sets.iter().flatten() {
            for w in &shifts {
                check_diff(c, t, w, "Bethe parameter vs evaluation point")?;
            }
        }
        Ok(())
    }
}

fn check_diff(c: &Rat, a: &Rat, b: &Rat, what: &str) -> Result<()> {
    let d = a - b;
    let half = &Rat::new(1, 2) * c;
    if d.is_zero() || d == *c || d == -c || d == half || d == -&half {
        return Err(Error::Genericity(format!(
            "{what}: difference {a} - {b} = {d} hits a pole locus"
        )));
    }
    Ok(())
}

/// The augmented collection w-bar: levels 0..n-1 are t-bar^s with z and
/// z_s appended, level n is the auxiliary pair {z, z_n}.
#[derive(Clone, Debug)]
pub struct WSets<S> {
    levels: Vec<Vec<S>>,
}

impl<S: Scalar> WSets<S> {
    pub fn new(t: &Params<S>, z: &S, c: &S) -> Self {
        let n = t.levels();
        let mut levels = Vec::with_capacity(n + 1);
        for s in 0..n {
            let mut lvl = t.set(s).to_vec();
            lvl.push(z.clone());
            lvl.push(z_shift(c, z, s));
            levels.push(lvl);
        }
        levels.push(vec![z.clone(), z_shift(c, z, n)]);
        WSets { levels }
    }

    /// Number of Bethe levels n (the stored collection has n+1 levels).
    pub fn rank(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, s: usize) -> &[S] {
        &self.levels[s]
    }
}

/// The ordered subsets (I, II, III) of one level.
pub type LevelSplit<S> = (Vec<S>, Vec<S>, Vec<S>);

/// One tripartition: per level s = 0..n the ordered subsets
/// (I_s, II_s, III_s) covering w-bar^s.
#[derive(Clone, Debug)]
pub struct TriPartition<S> {
    pub levels: Vec<LevelSplit<S>>,
}

impl<S: Clone> TriPartition<S> {
    pub fn first(&self, s: usize) -> &[S] {
        &self.levels[s].0
    }
    pub fn second(&self, s: usize) -> &[S] {
        &self.levels[s].1
    }
    pub fn third(&self, s: usize) -> &[S] {
        &self.levels[s].2
    }
}

/// Required cardinality of I_s for the action of T_{i,j}.
pub fn card_first(i: i32, s: usize) -> usize {
    theta(i + s as i32) + theta(i - s as i32 - 1)
}

/// Required cardinality of III_s for the action of T_{i,j}.
pub fn card_third(j: i32, s: usize) -> usize {
    theta(s as i32 - j) + theta(-j - s as i32 - 1)
}

/// Index-sorted k-subsets of 0..len.
fn combinations(len: usize, k: usize) -> Vec<Vec<usize>> {
    if k > len {
        return vec![];
    }
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Advance the rightmost index that can still move.
        let mut i = k - 1;
        while cur[i] == i + len - k {
            if i == 0 {
                return out;
            }
            i -= 1;
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// All ways to split one level into (I, II, III) with the given
/// cardinalities of I and III, in canonical (index-sorted) order.
fn split_level<S: Clone>(
    level: &[S],
    c1: usize,
    c3: usize,
) -> Result<Vec<LevelSplit<S>>> {
    let len = level.len();
    if c1 > len || c3 > len {
        return Err(Error::Cardinality(format!(
            "required cardinalities ({c1}, {c3}) exceed the set size {len}"
        )));
    }
    if c1 + c3 > len {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    for first_idx in combinations(len, c1) {
        let rest: Vec<usize> = (0..len).filter(|i| !first_idx.contains(i)).collect();
        for third_pick in combinations(rest.len(), c3) {
            let third_idx: Vec<usize> = third_pick.iter().map(|&p| rest[p]).collect();
            let first: Vec<S> = first_idx.iter().map(|&i| level[i].clone()).collect();
            let third: Vec<S> = third_idx.iter().map(|&i| level[i].clone()).collect();
            let second: Vec<S> = (0..len)
                .filter(|i| !first_idx.contains(i) && !third_idx.contains(i))
                .map(|i| level[i].clone())
                .collect();
            out.push((first, second, third));
        }
    }
    Ok(out)
}

/// Enumerate every tripartition of the collection w-bar with the
/// cardinalities dictated by (i, j), each exactly once, in canonical
/// order.  The result is empty (not an error) when some level cannot
/// accommodate #I_s + #III_s elements, which is how vanishing actions
/// such as strictly-lower entries on few parameters manifest.
pub fn enumerate_tripartitions<S: Scalar>(
    w: &WSets<S>,
    i: i32,
    j: i32,
) -> Result<Vec<TriPartition<S>>> {
    let n = w.rank();
    if i.unsigned_abs() as usize > n || j.unsigned_abs() as usize > n {
        return Err(Error::Index(format!(
            "aux indices ({i}, {j}) outside rank {n}"
        )));
    }
    let mut per_level = Vec::with_capacity(n + 1);
    for s in 0..=n {
        per_level.push(split_level(w.level(s), card_first(i, s), card_third(j, s))?);
    }
    let mut parts: Vec<TriPartition<S>> = vec![TriPartition { levels: vec![] }];
    for splits in per_level {
        if splits.is_empty() {
            return Ok(vec![]);
        }
        let mut next = Vec::with_capacity(parts.len() * splits.len());
        for p in &parts {
            for s in &splits {
                let mut levels = p.levels.clone();
                levels.push(s.clone());
                next.push(TriPartition { levels });
            }
        }
        parts = next;
    }
    Ok(parts)
}

/// One bipartition of a parameter collection: per level the ordered
/// subsets (I, II) covering t-bar^s.
#[derive(Clone, Debug)]
pub struct BiPartition<S> {
    pub levels: Vec<(Vec<S>, Vec<S>)>,
}

/// Enumerate bipartitions of the collection with prescribed #I_s per
/// level; empty when some level is too small.
pub fn enumerate_bipartitions<S: Scalar>(sets: &[Vec<S>], cards: &[usize]) -> Vec<BiPartition<S>> {
    debug_assert_eq!(sets.len(), cards.len());
    let mut parts: Vec<BiPartition<S>> = vec![BiPartition { levels: vec![] }];
    for (lvl, &k) in sets.iter().zip(cards) {
        if k > lvl.len() {
            return vec![];
        }
        let splits: Vec<(Vec<S>, Vec<S>)> = combinations(lvl.len(), k)
            .into_iter()
            .map(|idx| {
                let first: Vec<S> = idx.iter().map(|&i| lvl[i].clone()).collect();
                let second: Vec<S> = (0..lvl.len())
                    .filter(|i| !idx.contains(i))
                    .map(|i| lvl[i].clone())
                    .collect();
                (first, second)
            })
            .collect();
        let mut next = Vec::with_capacity(parts.len() * splits.len());
        for p in &parts {
            for s in &splits {
                let mut levels = p.levels.clone();
                levels.push(s.clone());
                next.push(BiPartition { levels });
            }
        }
        parts = next;
    }
    parts
}
