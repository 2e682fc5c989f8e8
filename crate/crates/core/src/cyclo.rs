//! The ring `(Z/p^N)[x]/(Phi_p(x))`, written in the uniformizer `y = x - 1`.
//!
//! `Phi_p(1 + y)` is Eisenstein in `y`, so `y` behaves like a uniformizer of
//! `Z_p[zeta_p]` with `y^(p-1) ~ p`.

use crate::padic::{integer_binomial, PadicContext};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloElem {
    ctx: PadicContext,
    /// Coefficients of `1, y, ..., y^(p-2)`.
    coeffs: Vec<u64>,
}

/// Coefficients of `E(y) = Phi_p(1 + y)`, lowest first; monic of degree `p - 1`.
fn eisenstein(ctx: &PadicContext) -> Vec<u64> {
    let p = ctx.p();
    (1..=p).map(|k| integer_binomial(*ctx, p as i64, k)).collect()
}

impl CycloElem {
    pub fn degree(ctx: &PadicContext) -> usize {
        ctx.p() as usize - 1
    }

    pub fn zero(ctx: PadicContext) -> Self {
        Self { ctx, coeffs: vec![0; Self::degree(&ctx)] }
    }

    pub fn scalar(ctx: PadicContext, c: u64) -> Self {
        let mut e = Self::zero(ctx);
        e.coeffs[0] = c % ctx.modulus();
        e
    }

    pub fn one(ctx: PadicContext) -> Self {
        Self::scalar(ctx, 1)
    }

    /// `zeta^c` with `zeta = 1 + y`.
    pub fn zeta_power(ctx: PadicContext, c: i64) -> Self {
        let p = ctx.p() as i64;
        let c = c.rem_euclid(p) as u64;
        let mut acc = Self::one(ctx);
        let zeta = Self::from_poly(ctx, &[1, 1]);
        for _ in 0..c {
            acc = acc.mul(&zeta);
        }
        acc
    }

    /// Reduces an arbitrary polynomial in `y` modulo `E(y)`.
    pub fn from_poly(ctx: PadicContext, poly: &[u64]) -> Self {
        let deg = Self::degree(&ctx);
        let e = eisenstein(&ctx);
        let mut work: Vec<u64> = poly.iter().map(|c| c % ctx.modulus()).collect();
        for top in (deg..work.len()).rev() {
            let c = work[top];
            if c == 0 {
                continue;
            }
            work[top] = 0;
            for (k, &ek) in e.iter().enumerate().take(deg) {
                let slot = top - deg + k;
                work[slot] = ctx.sub(work[slot], ctx.mul(c, ek));
            }
        }
        work.resize(deg, 0);
        Self { ctx, coeffs: work }
    }

    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn add(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| self.ctx.add(*a, *b)).collect();
        Self { ctx: self.ctx, coeffs }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| self.ctx.sub(*a, *b)).collect();
        Self { ctx: self.ctx, coeffs }
    }

    pub fn neg(&self) -> Self {
        Self::zero(self.ctx).sub(self)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.coeffs.len();
        let mut prod = vec![0u64; 2 * n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                prod[i + j] = self.ctx.add(prod[i + j], self.ctx.mul(a, b));
            }
        }
        Self::from_poly(self.ctx, &prod)
    }

    pub fn is_unit(&self) -> bool {
        self.ctx.is_unit(self.coeffs[0])
    }

    /// `min_i ((p-1) v_p(d_i) + i)`; a zero element reports `(p-1) N`.
    pub fn y_valuation(&self) -> u32 {
        let pm1 = self.ctx.p() as u32 - 1;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| pm1 * self.ctx.val(c) + i as u32)
            .min()
            .unwrap_or(pm1 * self.ctx.precision())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_has_order_p() {
        for p in [2u64, 3, 5, 7] {
            let ctx = PadicContext::new(p, 4).unwrap();
            assert_eq!(CycloElem::zeta_power(ctx, p as i64), CycloElem::one(ctx));
            assert_ne!(CycloElem::zeta_power(ctx, 1), CycloElem::one(ctx));
            // 1 + zeta + ... + zeta^(p-1) = 0
            let mut s = CycloElem::zero(ctx);
            for k in 0..p as i64 {
                s = s.add(&CycloElem::zeta_power(ctx, k));
            }
            assert_eq!(s, CycloElem::zero(ctx));
        }
    }

    #[test]
    fn y_is_a_uniformizer() {
        let ctx = PadicContext::new(5, 3).unwrap();
        let y = CycloElem::from_poly(ctx, &[0, 1]);
        assert_eq!(y.y_valuation(), 1);
        let y4 = y.mul(&y).mul(&y).mul(&y);
        assert_eq!(y4.y_valuation(), 4);
        assert_eq!(CycloElem::scalar(ctx, 5).y_valuation(), 4);
        assert_eq!(CycloElem::zero(ctx).y_valuation(), 12);
    }
}
