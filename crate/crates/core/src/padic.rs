//! Fixed-precision p-adic integers.
//!
//! Values live in `Z/p^N`. Every [`PadicInt`] also carries an effective
//! precision `prec <= N`: only the residue modulo `p^prec` is meaningful, and
//! the stored residue is always reduced modulo `p^prec`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest modulus we admit, so that products fit comfortably in `u128`.
const MAX_MODULUS: u64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PadicContext {
    p: u64,
    n: u32,
    modulus: u64,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PadicContext {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("precision must be at least 1".into()));
        }
        let mut modulus: u64 = 1;
        for _ in 0..n {
            modulus = modulus
                .checked_mul(p)
                .filter(|m| *m <= MAX_MODULUS)
                .ok_or_else(|| Error::InvalidArgument(format!("{p}^{n} exceeds 2^62")))?;
        }
        Ok(Self { p, n, modulus })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// The precision exponent `N`.
    #[inline]
    pub fn precision(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `p^k` for `k <= N`.
    pub fn pow(&self, k: u32) -> u64 {
        debug_assert!(k <= self.n);
        self.p.pow(k)
    }

    pub fn with_precision(&self, n: u32) -> Result<Self> {
        Self::new(self.p, n)
    }

    #[inline]
    pub fn reduce(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    /// `min(v_p(x), N)`; the value `N` also covers `x = 0`.
    pub fn val(&self, x: u64) -> u32 {
        if x == 0 {
            return self.n;
        }
        let mut v = 0;
        let mut x = x;
        while x % self.p == 0 && v < self.n {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, x: u64) -> bool {
        x % self.p != 0
    }

    /// Inverse of a unit modulo `p^N`.
    pub fn inv(&self, x: u64) -> Option<u64> {
        if !self.is_unit(x) {
            return None;
        }
        let (mut r0, mut r1) = (self.modulus as i128, (x % self.modulus) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Some(self.reduce(s0))
    }

    pub fn pow_mod(&self, base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        let mut b = base % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// Signed representative in `(-p^N/2, p^N/2]`.
    pub fn signed(&self, x: u64) -> i128 {
        if x > self.modulus / 2 {
            x as i128 - self.modulus as i128
        } else {
            x as i128
        }
    }
}

/// Valuation with the zero / precision-limited case kept explicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Exact(u32),
    /// The value vanishes at effective precision; the true valuation is at least this.
    AtLeast(u32),
}

impl Valuation {
    pub fn is_precision_limited(&self) -> bool {
        matches!(self, Valuation::AtLeast(_))
    }

    /// The bound as an integer, flag discarded.
    pub fn bound(&self) -> u32 {
        match *self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PadicInt {
    residue: u64,
    prec: u32,
    ctx: PadicContext,
}

impl PadicInt {
    pub fn new(ctx: PadicContext, value: i128) -> Self {
        Self { residue: ctx.reduce(value), prec: ctx.n, ctx }
    }

    pub fn with_precision(ctx: PadicContext, value: i128, prec: u32) -> Self {
        let prec = prec.min(ctx.n);
        let m = ctx.pow(prec) as i128;
        Self { residue: value.rem_euclid(m) as u64, prec, ctx }
    }

    pub fn zero(ctx: PadicContext) -> Self {
        Self::new(ctx, 0)
    }

    pub fn one(ctx: PadicContext) -> Self {
        Self::new(ctx, 1)
    }

    #[inline]
    pub fn residue(&self) -> u64 {
        self.residue
    }

    #[inline]
    pub fn precision(&self) -> u32 {
        self.prec
    }

    #[inline]
    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn valuation(&self) -> Valuation {
        if self.residue == 0 {
            Valuation::AtLeast(self.prec)
        } else {
            Valuation::Exact(self.ctx.val(self.residue))
        }
    }

    pub fn is_unit(&self) -> bool {
        self.prec > 0 && self.ctx.is_unit(self.residue)
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    fn combine(&self, other: &Self, residue: u64) -> Self {
        let prec = self.prec.min(other.prec);
        let m = self.ctx.pow(prec);
        Self { residue: residue % m, prec, ctx: self.ctx }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, self.ctx.add(self.residue, other.residue))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, self.ctx.sub(self.residue, other.residue))
    }

    pub fn mul(&self, other: &Self) -> Self {
        // p^a u * p^b w is known to precision min(a + prec_w, b + prec_u).
        let va = self.valuation().bound();
        let vb = other.valuation().bound();
        let prec = (va + other.prec).min(vb + self.prec).min(self.ctx.n);
        let r = self.ctx.mul(self.residue, other.residue) % self.ctx.pow(prec);
        Self { residue: r, prec, ctx: self.ctx }
    }

    pub fn neg(&self) -> Self {
        let m = self.ctx.pow(self.prec);
        Self { residue: (m - self.residue) % m, prec: self.prec, ctx: self.ctx }
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::ZeroDivisor);
        }
        let inv = self.ctx.inv(self.residue).ok_or(Error::ZeroDivisor)?;
        Ok(Self { residue: inv % self.ctx.pow(self.prec), prec: self.prec, ctx: self.ctx })
    }

    pub fn equals_at_precision(&self, other: &Self) -> bool {
        let prec = self.prec.min(other.prec);
        let m = self.ctx.pow(prec);
        self.residue % m == other.residue % m
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.residue, self.ctx.p, self.prec)
    }
}

/// The unit root of `x^2 - a x + q` in `Z_p`, lifted by Newton iteration.
///
/// Requires `a` to be a unit and `q` a positive power of `p`; the root is the
/// one congruent to `a` modulo `p`.
pub fn hensel_unit_root(a: &PadicInt, q: u64) -> Result<PadicInt> {
    let ctx = a.context();
    if !a.is_unit() {
        return Err(Error::NonOrdinary(format!("trace {} is not a p-adic unit", a.residue())));
    }
    if q < ctx.p() || !is_power_of(q, ctx.p()) {
        return Err(Error::InvalidArgument(format!("q = {q} is not a positive power of {}", ctx.p())));
    }
    let av = a.residue();
    let qv = ctx.reduce(q as i128);
    let f = |x: u64| ctx.add(ctx.sub(ctx.mul(x, x), ctx.mul(av, x)), qv);
    let mut x = av % ctx.modulus();
    // Newton doubles the number of correct digits; N + 1 steps is plenty.
    for _ in 0..=ctx.precision().max(1) {
        let fx = f(x);
        if fx == 0 {
            break;
        }
        let dfx = ctx.sub(ctx.mul(2, x), av);
        let inv = ctx.inv(dfx).ok_or_else(|| Error::NonOrdinary("derivative not a unit".into()))?;
        x = ctx.sub(x, ctx.mul(fx, inv));
    }
    debug_assert_eq!(f(x), 0);
    Ok(PadicInt::with_precision(ctx, x as i128, a.precision()))
}

pub fn is_power_of(mut q: u64, p: u64) -> bool {
    if q == 0 {
        return false;
    }
    while q % p == 0 {
        q /= p;
    }
    q == 1
}

/// `v_p(k!)` by Legendre's formula.
pub fn factorial_valuation(p: u64, k: u64) -> u32 {
    let mut v = 0u64;
    let mut pk = p;
    while pk <= k {
        v += k / pk;
        pk = match pk.checked_mul(p) {
            Some(x) => x,
            None => break,
        };
    }
    v as u32
}

/// `C(e, k) = e (e-1) ... (e-k+1) / k!` for a p-adic `e`.
///
/// The result is known modulo `p^(prec(e) - v_p(k!))`.
pub fn padic_binomial(e: &PadicInt, k: u64) -> Result<PadicInt> {
    let ctx = e.context();
    if k == 0 {
        return Ok(PadicInt::with_precision(ctx, 1, e.precision()));
    }
    let loss = factorial_valuation(ctx.p(), k);
    if loss >= e.precision() {
        return Err(Error::PrecisionExhausted(format!(
            "binomial C(e, {k}) needs more than {} digits",
            e.precision()
        )));
    }
    let mut num = 1 % ctx.modulus();
    let mut kfact_unit = 1 % ctx.modulus();
    for i in 0..k {
        num = ctx.mul(num, ctx.sub(e.residue(), ctx.reduce(i as i128)));
        let mut f = i + 1;
        while f % ctx.p() == 0 {
            f /= ctx.p();
        }
        kfact_unit = ctx.mul(kfact_unit, f % ctx.modulus());
    }
    let scale = ctx.pow(loss);
    let num = num % ctx.pow(e.precision());
    assert_eq!(num % scale, 0, "product of {k} consecutive p-adic integers not divisible by k!");
    let unit_part = num / scale;
    let inv = ctx.inv(kfact_unit).expect("unit part of k! is a unit");
    let value = ctx.mul(unit_part, inv);
    Ok(PadicInt::with_precision(ctx, value as i128, e.precision() - loss))
}

/// `C(e, k) mod p^N` for an exact integer exponent, with no precision loss.
pub fn integer_binomial(ctx: PadicContext, e: i64, k: u64) -> u64 {
    if k == 0 {
        return 1 % ctx.modulus();
    }
    let extra = factorial_valuation(ctx.p(), k);
    let wide = PadicContext::new(ctx.p(), ctx.precision() + extra)
        .expect("widened context for an exact binomial");
    let c = padic_binomial(&PadicInt::new(wide, e as i128), k).expect("widened precision suffices");
    c.residue() % ctx.modulus()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, n: u32) -> PadicContext {
        PadicContext::new(p, n).unwrap()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(PadicInt::new(ctx(5, 4), 75).valuation(), Valuation::Exact(2));
        let z = PadicInt::new(ctx(5, 4), 0).valuation();
        assert_eq!(z, Valuation::AtLeast(4));
        assert!(z.is_precision_limited());
        assert_eq!(PadicInt::new(ctx(3, 6), 7).valuation(), Valuation::Exact(0));
    }

    #[test]
    fn hensel_examples() {
        let a = PadicInt::new(ctx(5, 2), -3);
        assert_eq!(hensel_unit_root(&a, 5).unwrap().residue(), 7);
        let a = PadicInt::new(ctx(5, 1), -3);
        assert_eq!(hensel_unit_root(&a, 5).unwrap().residue(), 2);
        let a = PadicInt::new(ctx(5, 3), 5);
        assert!(matches!(hensel_unit_root(&a, 5), Err(Error::NonOrdinary(_))));
    }

    #[test]
    fn binomial_examples() {
        let c = ctx(5, 4);
        assert_eq!(padic_binomial(&PadicInt::new(c, -1), 2).unwrap().residue(), 1);
        assert_eq!(padic_binomial(&PadicInt::new(c, 1234), 0).unwrap().residue(), 1);
        let b = padic_binomial(&PadicInt::new(ctx(2, 8), 2), 1).unwrap();
        assert_eq!(b.residue(), 2);
        assert_eq!(b.precision(), 8);
    }

    #[test]
    fn binomial_reports_loss_and_exhaustion() {
        let c = ctx(2, 3);
        let b = padic_binomial(&PadicInt::new(c, 7), 2).unwrap();
        assert_eq!(b.precision(), 2);
        assert_eq!(b.residue(), 21 % 4);
        assert!(matches!(
            padic_binomial(&PadicInt::new(c, 7), 4),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn integer_binomial_is_exact() {
        let c = ctx(2, 8);
        assert_eq!(integer_binomial(c, 10, 4), 210);
        assert_eq!(integer_binomial(c, -1, 5), 255);
        assert_eq!(integer_binomial(c, 3, 5), 0);
    }

    proptest! {
        #[test]
        fn valuation_is_additive(x in 0i128..100_000, y in 0i128..100_000) {
            let c = ctx(3, 6);
            let a = PadicInt::new(c, x);
            let b = PadicInt::new(c, y);
            let prod = PadicInt::new(c, x * y);
            let expect = (a.valuation().bound() + b.valuation().bound()).min(6);
            prop_assert_eq!(prod.valuation().bound(), expect);
        }

        #[test]
        fn hensel_root_is_a_root(a in 1i128..10_000, k in 1u32..3) {
            let p = 5u64;
            prop_assume!(a % 5 != 0);
            let c = ctx(p, 6);
            let q = p.pow(k);
            let alpha = hensel_unit_root(&PadicInt::new(c, a), q).unwrap();
            let x = alpha.residue();
            let f = c.add(c.sub(c.mul(x, x), c.mul(c.reduce(a), x)), q % c.modulus());
            prop_assert_eq!(f, 0);
            prop_assert_eq!(x % p, (a % 5) as u64);
            // the cofactor root q / alpha has valuation v_p(q)
            let co = c.mul(q % c.modulus(), c.inv(x).unwrap());
            prop_assert_eq!(c.val(co), k);
        }

        #[test]
        fn binomial_pascal(e in -500i128..500, k in 1u64..10) {
            let c = ctx(3, 8);
            let lhs = padic_binomial(&PadicInt::new(c, e), k).unwrap();
            let a = padic_binomial(&PadicInt::new(c, e - 1), k).unwrap();
            let b = padic_binomial(&PadicInt::new(c, e - 1), k - 1).unwrap();
            prop_assert!(lhs.equals_at_precision(&a.add(&b)));
        }
    }
}
