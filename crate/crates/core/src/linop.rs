//! Sparse linear operators and vectors on C^N and its L-fold tensor powers,
//! N = 2n+1, with site components indexed -n..n.
//!
//! Multi-indices are ordered lexicographically with -n < ... < n; that
//! single ordering fixes serialization layout and float summation order.
//! Also provides the two-site building blocks P (permutation) and
//! Q = sum e_{i,j} (x) e_{-i,-j}, which obey P^2 = I, Q^2 = N Q and
//! P Q = Q P = Q.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::scalar::{Rat, Ring, Scalar};

/// Multi-index over chain sites; component k addresses the k-th tensor
/// factor and takes values in [-n, n].
pub type Sites = SmallVec<[i8; 6]>;

fn check_component(n: u8, i: i8) -> Result<()> {
    if i.unsigned_abs() > n {
        return Err(Error::Index(format!("component {i} outside [-{n}, {n}]")));
    }
    Ok(())
}

/// Iterate all multi-indices of the given length in canonical order.
pub fn all_indices(n: u8, sites: usize) -> Vec<Sites> {
    let mut out: Vec<Sites> = vec![smallvec![]];
    for _ in 0..sites {
        let mut next = Vec::with_capacity(out.len() * (2 * n as usize + 1));
        for idx in &out {
            for comp in -(n as i8)..=(n as i8) {
                let mut e = idx.clone();
                e.push(comp);
                next.push(e);
            }
        }
        out = next;
    }
    out
}

/// Sparse linear operator on the `sites`-fold tensor power of C^(2n+1).
#[derive(Clone, PartialEq, Debug)]
pub struct ChainOperator<S: Ring> {
    n: u8,
    sites: usize,
    entries: BTreeMap<(Sites, Sites), S>,
}

/// Sparse vector on the `sites`-fold tensor power of C^(2n+1).
#[derive(Clone, PartialEq, Debug)]
pub struct ChainVector<S: Ring> {
    n: u8,
    sites: usize,
    entries: BTreeMap<Sites, S>,
}

impl<S: Ring> ChainOperator<S> {
    pub fn zero(n: u8, sites: usize) -> Self {
        ChainOperator {
            n,
            sites,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: u8, sites: usize) -> Self {
        let mut entries = BTreeMap::new();
        for idx in all_indices(n, sites) {
            entries.insert((idx.clone(), idx), S::ring_one());
        }
        ChainOperator { n, sites, entries }
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        (2 * self.n as usize + 1).pow(self.sites as u32)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Sites, Sites), &S)> {
        self.entries.iter()
    }

    pub fn get(&self, row: &Sites, col: &Sites) -> Option<&S> {
        self.entries.get(&(row.clone(), col.clone()))
    }

    /// Insert-accumulate, pruning exact zeros.
    pub fn accumulate(&mut self, row: Sites, col: Sites, value: S) {
        if value.ring_is_zero() {
            return;
        }
        let key = (row, col);
        match self.entries.get_mut(&key) {
            Some(slot) => {
                let sum = slot.ring_add(&value);
                if sum.ring_is_zero() {
                    self.entries.remove(&key);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.entries.insert(key, value);
            }
        }
    }

    fn check_same_space(&self, other: &ChainOperator<S>) -> Result<()> {
        if self.n != other.n || self.sites != other.sites {
            return Err(Error::Mismatch(format!(
                "operator on n={}, sites={} combined with n={}, sites={}",
                self.n, self.sites, other.n, other.sites
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &ChainOperator<S>) -> Result<ChainOperator<S>> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for ((r, c), v) in &other.entries {
            out.accumulate(r.clone(), c.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &ChainOperator<S>) -> Result<ChainOperator<S>> {
        self.add(&other.scale_ref(&S::ring_one().ring_neg()))
    }

    pub fn scale_ref(&self, c: &S) -> ChainOperator<S> {
        if c.ring_is_zero() {
            return ChainOperator::zero(self.n, self.sites);
        }
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), v.ring_mul(c)))
            .filter(|(_, v)| !v.ring_is_zero())
            .collect();
        ChainOperator {
            n: self.n,
            sites: self.sites,
            entries,
        }
    }

    /// Operator product self . other.
    pub fn compose(&self, other: &ChainOperator<S>) -> Result<ChainOperator<S>> {
        self.check_same_space(other)?;
        // Group the right factor by row for cache-friendly accumulation.
        let mut by_row: HashMap<&Sites, Vec<(&Sites, &S)>> = HashMap::new();
        for ((r, c), v) in &other.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut acc: HashMap<(Sites, Sites), S> = HashMap::new();
        for ((r, k), a) in &self.entries {
            if let Some(row) = by_row.get(k) {
                for (c, b) in row {
                    let prod = a.ring_mul(b);
                    if prod.ring_is_zero() {
                        continue;
                    }
                    let key = (r.clone(), (*c).clone());
                    match acc.get_mut(&key) {
                        Some(slot) => *slot = slot.ring_add(&prod),
                        None => {
                            acc.insert(key, prod);
                        }
                    }
                }
            }
        }
        let entries = acc.into_iter().filter(|(_, v)| !v.ring_is_zero()).collect();
        Ok(ChainOperator {
            n: self.n,
            sites: self.sites,
            entries,
        })
    }

    /// Tensor product; `self` acts on the first block of sites.
    pub fn kron(&self, other: &ChainOperator<S>) -> Result<ChainOperator<S>> {
        if self.n != other.n {
            return Err(Error::Mismatch(format!(
                "kron of operators with n={} and n={}",
                self.n, other.n
            )));
        }
        let mut entries = BTreeMap::new();
        for ((r1, c1), v1) in &self.entries {
            for ((r2, c2), v2) in &other.entries {
                let prod = v1.ring_mul(v2);
                if prod.ring_is_zero() {
                    continue;
                }
                let mut r = r1.clone();
                r.extend_from_slice(r2);
                let mut c = c1.clone();
                c.extend_from_slice(c2);
                entries.insert((r, c), prod);
            }
        }
        Ok(ChainOperator {
            n: self.n,
            sites: self.sites + other.sites,
            entries,
        })
    }

    /// Insert an idle tensor factor at position `pos` (0 = before the first
    /// site).  Used to embed two-site operators into larger chains at
    /// non-adjacent positions.
    pub fn with_identity_site(&self, pos: usize) -> ChainOperator<S> {
        assert!(pos <= self.sites, "insertion position out of range");
        let mut entries = BTreeMap::new();
        for ((r, c), v) in &self.entries {
            for comp in -(self.n as i8)..=(self.n as i8) {
                let mut nr = r.clone();
                nr.insert(pos, comp);
                let mut nc = c.clone();
                nc.insert(pos, comp);
                entries.insert((nr, nc), v.clone());
            }
        }
        ChainOperator {
            n: self.n,
            sites: self.sites + 1,
            entries,
        }
    }

    pub fn apply(&self, v: &ChainVector<S>) -> Result<ChainVector<S>> {
        if self.n != v.n || self.sites != v.sites {
            return Err(Error::Mismatch(format!(
                "operator on n={}, sites={} applied to vector on n={}, sites={}",
                self.n, self.sites, v.n, v.sites
            )));
        }
        let mut out = ChainVector::zero(self.n, self.sites);
        for ((r, c), a) in &self.entries {
            if let Some(x) = v.entries.get(c) {
                out.accumulate(r.clone(), a.ring_mul(x));
            }
        }
        Ok(out)
    }

    /// Commutator [self, other].
    pub fn commutator(&self, other: &ChainOperator<S>) -> Result<ChainOperator<S>> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Extract the quantum-space operator sitting at auxiliary matrix
    /// element (i, j); the auxiliary space is tensor factor 0.
    pub fn aux_entry(&self, i: i8, j: i8) -> Result<ChainOperator<S>> {
        check_component(self.n, i)?;
        check_component(self.n, j)?;
        assert!(self.sites >= 1, "aux_entry needs at least one site");
        let mut entries = BTreeMap::new();
        for ((r, c), v) in &self.entries {
            if r[0] == i && c[0] == j {
                let rr: Sites = r[1..].iter().copied().collect();
                let cc: Sites = c[1..].iter().copied().collect();
                entries.insert((rr, cc), v.clone());
            }
        }
        Ok(ChainOperator {
            n: self.n,
            sites: self.sites - 1,
            entries,
        })
    }

    /// Apply a scalar map entrywise (e.g. exact -> float conversion).
    pub fn map_scalars<T: Ring>(&self, f: impl Fn(&S) -> T) -> ChainOperator<T> {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), f(v)))
            .filter(|(_, v)| !v.ring_is_zero())
            .collect();
        ChainOperator {
            n: self.n,
            sites: self.sites,
            entries,
        }
    }

    /// Fallible entrywise map (e.g. symbolic -> evaluated at a point).
    pub fn try_map_scalars<T: Ring>(
        &self,
        mut f: impl FnMut(&S) -> Result<T>,
    ) -> Result<ChainOperator<T>> {
        let mut entries = BTreeMap::new();
        for (k, v) in &self.entries {
            let w = f(v)?;
            if !w.ring_is_zero() {
                entries.insert(k.clone(), w);
            }
        }
        Ok(ChainOperator {
            n: self.n,
            sites: self.sites,
            entries,
        })
    }
}

impl<S: Ring> ChainVector<S> {
    pub fn zero(n: u8, sites: usize) -> Self {
        ChainVector {
            n,
            sites,
            entries: BTreeMap::new(),
        }
    }

    /// Product basis vector e_{idx}.
    pub fn basis(n: u8, idx: Sites) -> Result<Self> {
        for &i in &idx {
            check_component(n, i)?;
        }
        let sites = idx.len();
        let mut entries = BTreeMap::new();
        entries.insert(idx, S::ring_one());
        Ok(ChainVector { n, sites, entries })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Sites, &S)> {
        self.entries.iter()
    }

    pub fn get(&self, idx: &Sites) -> Option<&S> {
        self.entries.get(idx)
    }

    pub fn accumulate(&mut self, idx: Sites, value: S) {
        if value.ring_is_zero() {
            return;
        }
        match self.entries.get_mut(&idx) {
            Some(slot) => {
                let sum = slot.ring_add(&value);
                if sum.ring_is_zero() {
                    self.entries.remove(&idx);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.entries.insert(idx, value);
            }
        }
    }

    pub fn add(&self, other: &ChainVector<S>) -> Result<ChainVector<S>> {
        if self.n != other.n || self.sites != other.sites {
            return Err(Error::Mismatch("vector addition on different spaces".into()));
        }
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.accumulate(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &ChainVector<S>) -> Result<ChainVector<S>> {
        self.add(&other.scale_ref(&S::ring_one().ring_neg()))
    }

    pub fn scale_ref(&self, c: &S) -> ChainVector<S> {
        if c.ring_is_zero() {
            return ChainVector::zero(self.n, self.sites);
        }
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), v.ring_mul(c)))
            .filter(|(_, v)| !v.ring_is_zero())
            .collect();
        ChainVector {
            n: self.n,
            sites: self.sites,
            entries,
        }
    }

    pub fn map_scalars<T: Ring>(&self, f: impl Fn(&S) -> T) -> ChainVector<T> {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), f(v)))
            .filter(|(_, v)| !v.ring_is_zero())
            .collect();
        ChainVector {
            n: self.n,
            sites: self.sites,
            entries,
        }
    }
}

impl ChainVector<crate::scalar::C64> {
    /// Euclidean norm; deterministic because entries iterate in canonical
    /// index order.
    pub fn norm(&self) -> f64 {
        self.entries
            .values()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Matrix unit e_{i,j} on a single site: the N x N matrix with a single 1
/// in row i, column j.
pub fn matrix_unit<S: Ring>(n: u8, i: i8, j: i8) -> Result<ChainOperator<S>> {
    check_component(n, i)?;
    check_component(n, j)?;
    let mut op = ChainOperator::zero(n, 1);
    op.accumulate(smallvec![i], smallvec![j], S::ring_one());
    Ok(op)
}

/// Two-site permutation operator P = sum_{i,j} e_{i,j} (x) e_{j,i}.
pub fn build_p<S: Ring>(n: u8) -> ChainOperator<S> {
    let mut op = ChainOperator::zero(n, 2);
    for i in -(n as i8)..=(n as i8) {
        for j in -(n as i8)..=(n as i8) {
            op.accumulate(smallvec![i, j], smallvec![j, i], S::ring_one());
        }
    }
    op
}

/// Two-site operator Q = sum_{i,j} e_{i,j} (x) e_{-i,-j}.
pub fn build_q<S: Ring>(n: u8) -> ChainOperator<S> {
    let mut op = ChainOperator::zero(n, 2);
    for i in -(n as i8)..=(n as i8) {
        for j in -(n as i8)..=(n as i8) {
            op.accumulate(smallvec![i, -i], smallvec![j, -j], S::ring_one());
        }
    }
    op
}

// --- Serialization: records in canonical index order -------------------

#[derive(Serialize, Deserialize)]
struct VectorEntry<S> {
    index: Vec<i8>,
    value: S,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr<S> {
    n: u8,
    sites: usize,
    entries: Vec<VectorEntry<S>>,
}

#[derive(Serialize)]
struct OperatorEntry<'a, S> {
    row: &'a [i8],
    col: &'a [i8],
    value: &'a S,
}

#[derive(Serialize)]
struct OperatorRepr<'a, S> {
    n: u8,
    sites: usize,
    entries: Vec<OperatorEntry<'a, S>>,
}

impl<S: Ring + Serialize> Serialize for ChainVector<S> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let repr = VectorRepr {
            n: self.n,
            sites: self.sites,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| VectorEntry {
                    index: k.to_vec(),
                    value: v.clone(),
                })
                .collect(),
        };
        repr.serialize(s)
    }
}

impl<'de, S: Ring + Deserialize<'de>> Deserialize<'de> for ChainVector<S> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = VectorRepr::<S>::deserialize(d)?;
        let mut v = ChainVector::zero(repr.n, repr.sites);
        for e in repr.entries {
            if e.index.len() != repr.sites {
                return Err(serde::de::Error::custom("index length != sites"));
            }
            v.accumulate(e.index.into_iter().collect(), e.value);
        }
        Ok(v)
    }
}

impl<S: Ring + Serialize> Serialize for ChainOperator<S> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let repr = OperatorRepr {
            n: self.n,
            sites: self.sites,
            entries: self
                .entries
                .iter()
                .map(|((r, c), v)| OperatorEntry {
                    row: r,
                    col: c,
                    value: v,
                })
                .collect(),
        };
        repr.serialize(s)
    }
}

/// Convert an exact operator to the float backend.
pub fn to_float_operator(op: &ChainOperator<Rat>) -> ChainOperator<crate::scalar::C64> {
    op.map_scalars(crate::scalar::C64::from_rat)
}

/// Convert an exact vector to the float backend.
pub fn to_float_vector(v: &ChainVector<Rat>) -> ChainVector<crate::scalar::C64> {
    v.map_scalars(crate::scalar::C64::from_rat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    type Op = ChainOperator<Rat>;

    fn e(n: u8, i: i8, j: i8) -> Op {
        matrix_unit(n, i, j).unwrap()
    }

    #[test]
    fn matrix_unit_action() {
        // e_{0,1} e_1 = e_0
        let op = e(1, 0, 1);
        let v = ChainVector::<Rat>::basis(1, smallvec![1]).unwrap();
        let w = op.apply(&v).unwrap();
        assert_eq!(w, ChainVector::basis(1, smallvec![0]).unwrap());
        // e_{1,0} e_{0,1} = e_{1,1}
        assert_eq!(e(1, 1, 0).compose(&e(1, 0, 1)).unwrap(), e(1, 1, 1));
        // e_{1,0} e_{1,0} = 0
        assert!(e(1, 1, 0).compose(&e(1, 1, 0)).unwrap().is_zero());
        // out-of-range index rejected
        assert!(matrix_unit::<Rat>(1, 2, 0).is_err());
    }

    #[test]
    fn p_q_relations() {
        for n in [1u8, 2] {
            let big_n = Rat::int(2 * n as i64 + 1);
            let p = build_p::<Rat>(n);
            let q = build_q::<Rat>(n);
            let id = Op::identity(n, 2);
            assert_eq!(p.compose(&p).unwrap(), id);
            assert_eq!(q.compose(&q).unwrap(), q.scale_ref(&big_n));
            assert_eq!(p.compose(&q).unwrap(), q);
            assert_eq!(q.compose(&p).unwrap(), q);
        }
    }

    #[test]
    fn permutation_swaps_factors() {
        let p = build_p::<Rat>(2);
        let v = ChainVector::<Rat>::basis(2, smallvec![-2, 1]).unwrap();
        assert_eq!(
            p.apply(&v).unwrap(),
            ChainVector::basis(2, smallvec![1, -2]).unwrap()
        );
    }

    #[test]
    fn kron_basics() {
        let id1 = Op::identity(1, 1);
        assert_eq!(id1.kron(&id1).unwrap(), Op::identity(1, 2));
        let op = e(1, 1, 1).kron(&e(1, 0, 0)).unwrap();
        let v = ChainVector::<Rat>::basis(1, smallvec![1, 0]).unwrap();
        assert_eq!(op.apply(&v).unwrap(), v);
        assert!(e(1, 0, 0).kron(&e(2, 0, 0)).unwrap_err().to_string().contains("mismatch"));
    }

    /// Dense application oracle: exercise every basis vector.
    fn dense(op: &Op) -> Vec<Vec<Rat>> {
        let idxs = all_indices(op.n(), op.sites());
        let dim = idxs.len();
        let mut m = vec![vec![Rat::zero(); dim]; dim];
        let pos: HashMap<&Sites, usize> = idxs.iter().zip(0..).collect();
        for ((r, c), v) in op.entries() {
            m[pos[r]][pos[c]] = v.clone();
        }
        m
    }

    #[test]
    fn kron_with_identity_matches_embedding() {
        // kron(P, I) equals P acting on factors (1,2) of a 3-site space,
        // checked densely (27 x 27 at n = 1).
        let p = build_p::<Rat>(1);
        let embedded = p.kron(&Op::identity(1, 1)).unwrap();
        let via_insert = p.with_identity_site(2);
        assert_eq!(embedded, via_insert);
        let m = dense(&embedded);
        let idxs = all_indices(1, 3);
        for (col, idx) in idxs.iter().enumerate() {
            let target: Sites = smallvec![idx[1], idx[0], idx[2]];
            for (row, ridx) in idxs.iter().enumerate() {
                let expect = if *ridx == target { Rat::one() } else { Rat::zero() };
                assert_eq!(m[row][col], expect);
            }
        }
    }

    fn random_op(rng: &mut StdRng, n: u8, sites: usize, fill: usize) -> Op {
        let idxs = all_indices(n, sites);
        let mut op = Op::zero(n, sites);
        for _ in 0..fill {
            let r = idxs[rng.gen_range(0..idxs.len())].clone();
            let c = idxs[rng.gen_range(0..idxs.len())].clone();
            op.accumulate(r, c, Rat::new(rng.gen_range(-9..10), rng.gen_range(1..5)));
        }
        op
    }

    fn random_vec(rng: &mut StdRng, n: u8, sites: usize, fill: usize) -> ChainVector<Rat> {
        let idxs = all_indices(n, sites);
        let mut v = ChainVector::zero(n, sites);
        for _ in 0..fill {
            let idx = idxs[rng.gen_range(0..idxs.len())].clone();
            v.accumulate(idx, Rat::new(rng.gen_range(-9..10), rng.gen_range(1..5)));
        }
        v
    }

    #[test]
    fn composition_associates_with_application() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_op(&mut rng, 1, 2, 12);
            let b = random_op(&mut rng, 1, 2, 12);
            let v = random_vec(&mut rng, 1, 2, 5);
            let lhs = a.compose(&b).unwrap().apply(&v).unwrap();
            let rhs = a.apply(&b.apply(&v).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
        let a = random_op(&mut rng, 1, 2, 12);
        assert_eq!(a.compose(&Op::identity(1, 2)).unwrap(), a);
    }

    #[test]
    fn application_is_linear() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_op(&mut rng, 1, 2, 15);
            let v = random_vec(&mut rng, 1, 2, 6);
            let w = random_vec(&mut rng, 1, 2, 6);
            let alpha = Rat::new(3, 7);
            let beta = Rat::new(-5, 2);
            let lhs = a
                .apply(&v.scale_ref(&alpha).add(&w.scale_ref(&beta)).unwrap())
                .unwrap();
            let rhs = a
                .apply(&v)
                .unwrap()
                .scale_ref(&alpha)
                .add(&a.apply(&w).unwrap().scale_ref(&beta))
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn sparse_apply_matches_dense_oracle() {
        let mut rng = StdRng::seed_from_u64(13);
        for sites in 1..=3usize {
            let a = random_op(&mut rng, 1, sites, 20);
            let v = random_vec(&mut rng, 1, sites, 6);
            let m = dense(&a);
            let idxs = all_indices(1, sites);
            let mut expect = ChainVector::zero(1, sites);
            for (row, ridx) in idxs.iter().enumerate() {
                let mut acc = Rat::zero();
                for (col, cidx) in idxs.iter().enumerate() {
                    if let Some(x) = v.get(cidx) {
                        acc = &acc + &(&m[row][col] * x);
                    }
                }
                expect.accumulate(ridx.clone(), acc);
            }
            assert_eq!(a.apply(&v).unwrap(), expect);
        }
    }

    #[test]
    fn vector_json_round_trip() {
        let mut v = ChainVector::<Rat>::zero(1, 2);
        v.accumulate(smallvec![-1, 1], Rat::new(2, 3));
        v.accumulate(smallvec![0, 0], Rat::int(-4));
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"2/3\""));
        let back: ChainVector<Rat> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
