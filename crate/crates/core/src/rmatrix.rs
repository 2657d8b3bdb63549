//! The o(2n+1)-invariant rational R-matrix
//!
//!   R(u,v) = I (x) I + c P / (u - v) - c Q / (u - v + c kappa),
//!
//! with kappa = N/2 - 1 = n - 1/2, together with checks of the
//! Yang-Baxter equation and the unitarity relation
//! R(u,v) R(v,u) = (1 - c^2/(u-v)^2) I (x) I.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linop::{build_p, build_q, ChainOperator};
use crate::ratfun::RatFun;
use crate::scalar::Rat;

/// Global model parameters: the rank n and the coupling constant c.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ModelParams {
    pub n: u8,
    pub c: Rat,
}

impl ModelParams {
    pub fn new(n: u8, c: Rat) -> Result<Self> {
        if n == 0 {
            return Err(Error::Genericity("rank n must be at least 1".into()));
        }
        if c.is_zero() {
            return Err(Error::Genericity("coupling constant c must be nonzero".into()));
        }
        Ok(ModelParams { n, c })
    }

    /// Dimension N = 2n + 1 of the local space.
    pub fn big_n(&self) -> usize {
        2 * self.n as usize + 1
    }

    /// kappa = N/2 - 1 = n - 1/2.
    pub fn kappa(&self) -> Rat {
        &Rat::int(self.n as i64) - &Rat::new(1, 2)
    }
}

fn pole_guard(p: &ModelParams, u: &Rat, v: &Rat) -> Result<(Rat, Rat)> {
    let d = u - v;
    if d.is_zero() {
        return Err(Error::Pole(format!("R-matrix pole at u - v = 0 (u = v = {u})")));
    }
    let dq = &d + &(&p.c * &p.kappa());
    if dq.is_zero() {
        return Err(Error::Pole(format!(
            "R-matrix pole at u - v = -c*kappa (u - v = {d})"
        )));
    }
    Ok((d, dq))
}

/// Evaluate R(u, v) on two sites.
pub fn build_r(p: &ModelParams, u: &Rat, v: &Rat) -> Result<ChainOperator<Rat>> {
    let (d, dq) = pole_guard(p, u, v)?;
    let id = ChainOperator::identity(p.n, 2);
    let pp = build_p::<Rat>(p.n).scale_ref(&(&p.c / &d));
    let qq = build_q::<Rat>(p.n).scale_ref(&-&(&p.c / &dq));
    id.add(&pp)?.add(&qq)
}

/// R(u, xi) with u left symbolic: entries are rational functions of u.
/// This is the single-site factor of the symbolic monodromy.
pub fn build_r_symbolic(p: &ModelParams, xi: &Rat) -> ChainOperator<RatFun> {
    let id = ChainOperator::<RatFun>::identity(p.n, 2);
    // c / (u - xi)
    let p_coeff = RatFun::simple_pole(&p.c, &-xi);
    // -c / (u - xi + c*kappa)
    let q_shift = &-xi + &(&p.c * &p.kappa());
    let q_coeff = RatFun::simple_pole(&-&p.c, &q_shift);
    let pp = build_p::<RatFun>(p.n).scale_ref(&p_coeff);
    let qq = build_q::<RatFun>(p.n).scale_ref(&q_coeff);
    id.add(&pp).unwrap().add(&qq).unwrap()
}

/// Check R12 R13 R23 = R23 R13 R12 on (C^N)^(x3), exactly.
pub fn check_yang_baxter(p: &ModelParams, u1: &Rat, u2: &Rat, u3: &Rat) -> Result<bool> {
    let r12 = build_r(p, u1, u2)?.with_identity_site(2);
    let r13 = build_r(p, u1, u3)?.with_identity_site(1);
    let r23 = build_r(p, u2, u3)?.with_identity_site(0);
    let lhs = r12.compose(&r13)?.compose(&r23)?;
    let rhs = r23.compose(&r13)?.compose(&r12)?;
    Ok(lhs == rhs)
}

/// Check R(u,v) R(v,u) = (1 - c^2/(u-v)^2) I, exactly.
pub fn check_unitarity(p: &ModelParams, u: &Rat, v: &Rat) -> Result<bool> {
    pole_guard(p, v, u)?;
    let lhs = build_r(p, u, v)?.compose(&build_r(p, v, u)?)?;
    let d = u - v;
    let scalar = &Rat::one() - &(&(&p.c * &p.c) / &(&d * &d));
    let rhs = ChainOperator::<Rat>::identity(p.n, 2).scale_ref(&scalar);
    Ok(lhs == rhs)
}

/// Difference form of the symbolic R-matrix entries as functions of u - v,
/// used by unit tests for the shift-invariance property.
pub fn r_depends_on_difference(p: &ModelParams, u: &Rat, v: &Rat, shift: &Rat) -> Result<bool> {
    let plain = build_r(p, u, v)?;
    let shifted = build_r(p, &(u + shift), &(v + shift))?;
    Ok(plain == shifted)
}

/// Entrywise expansion of R(u, xi) around u = infinity, order zero; the
/// identity term of the R-matrix.
pub fn r_infinity_limit(p: &ModelParams, xi: &Rat) -> Result<ChainOperator<Rat>> {
    build_r_symbolic(p, xi).try_map_scalars(|f| f.coeff_at_infinity(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::ChainVector;
    use smallvec::smallvec;

    fn params(n: u8, c: i64) -> ModelParams {
        ModelParams::new(n, Rat::int(c)).unwrap()
    }

    #[test]
    fn kappa_values() {
        assert_eq!(params(1, 1).kappa(), Rat::new(1, 2));
        assert_eq!(params(2, 1).kappa(), Rat::new(3, 2));
        assert_eq!(params(3, 1).kappa(), Rat::new(5, 2));
    }

    #[test]
    fn unitarity_examples() {
        let p = params(1, 1);
        assert!(check_unitarity(&p, &Rat::int(5), &Rat::int(2)).unwrap());
        assert!(check_unitarity(&p, &Rat::int(4), &Rat::int(1)).unwrap());
        let p2 = params(2, 3);
        assert!(check_unitarity(&p2, &Rat::int(10), &Rat::int(2)).unwrap());
        assert!(matches!(
            check_unitarity(&p, &Rat::int(3), &Rat::int(3)),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn yang_baxter_examples() {
        let p = params(1, 1);
        assert!(check_yang_baxter(&p, &Rat::int(3), &Rat::int(5), &Rat::int(9)).unwrap());
        let p2 = params(2, 2);
        assert!(check_yang_baxter(&p2, &Rat::int(0), &Rat::int(7), &Rat::int(13)).unwrap());
        assert!(matches!(
            check_yang_baxter(&p, &Rat::int(3), &Rat::int(3), &Rat::int(9)),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn r_shift_invariance() {
        let p = params(2, 2);
        assert!(r_depends_on_difference(&p, &Rat::new(7, 3), &Rat::new(-2, 5), &Rat::new(12, 7)).unwrap());
    }

    #[test]
    fn r_tends_to_identity_at_large_separation() {
        // At u - v = 10^6 every entry of R - I is O(10^-6).
        let p = params(1, 1);
        let r = build_r(&p, &Rat::int(1_000_000), &Rat::int(0)).unwrap();
        let diff = r.sub(&ChainOperator::identity(1, 2)).unwrap();
        let bound = Rat::new(3, 1_000_000);
        for (_, v) in diff.entries() {
            assert!(v.abs() <= bound, "entry {v} larger than {bound}");
        }
    }

    #[test]
    fn symbolic_r_evaluates_to_direct_r() {
        let p = params(2, 1);
        let xi = Rat::new(1, 3);
        let sym = build_r_symbolic(&p, &xi);
        for u in [Rat::int(2), Rat::new(7, 5), Rat::new(-9, 4)] {
            let eval = sym.try_map_scalars(|f| f.eval(&u)).unwrap();
            assert_eq!(eval, build_r(&p, &u, &xi).unwrap());
        }
        assert_eq!(r_infinity_limit(&p, &xi).unwrap(), ChainOperator::identity(2, 2));
    }

    #[test]
    fn permutation_term_dominates_near_pole() {
        // R(u,v)(e_a (x) e_b) at generic points keeps the e_b (x) e_a part:
        // a quick action sanity check.
        let p = params(1, 1);
        let r = build_r(&p, &Rat::int(5), &Rat::int(3)).unwrap();
        let v = ChainVector::<Rat>::basis(1, smallvec![0, 1]).unwrap();
        let w = r.apply(&v).unwrap();
        assert_eq!(w.get(&smallvec![1, 0]), Some(&Rat::new(1, 2)));
        assert_eq!(w.get(&smallvec![0, 1]), Some(&Rat::one()));
    }
}
