//! The truncated Iwasawa algebra `(Z/p^N)[t_1..t_d] / (t_1^M, ..., t_d^M)`.
//!
//! Elements are stored densely by exponent tuple. The group-ring view is
//! `gamma_i = 1 + t_i`. Each element carries an effective precision `prec <= N`
//! and its coefficients are kept reduced modulo `p^prec`.

use std::fmt;

use crate::cyclo::CycloElem;
use crate::error::{Error, Result};
use crate::linalg;
use crate::padic::{integer_binomial, padic_binomial, PadicContext, PadicInt, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TruncationProfile {
    ctx: PadicContext,
    vars: usize,
    trunc: usize,
}

impl TruncationProfile {
    pub fn new(ctx: PadicContext, vars: usize, trunc: usize) -> Result<Self> {
        if trunc == 0 {
            return Err(Error::InvalidArgument("truncation degree must be at least 1".into()));
        }
        let size = (trunc as u64).checked_pow(vars as u32).filter(|s| *s <= 1 << 20);
        if size.is_none() {
            return Err(Error::InvalidArgument(format!("{trunc}^{vars} monomials is too many")));
        }
        Ok(Self { ctx, vars, trunc })
    }

    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    pub fn precision(&self) -> u32 {
        self.ctx.precision()
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// Number of monomials `M^d`.
    pub fn size(&self) -> usize {
        self.trunc.pow(self.vars as u32)
    }

    pub fn with_vars(&self, vars: usize) -> Result<Self> {
        Self::new(self.ctx, vars, self.trunc)
    }

    /// The profile one refinement step finer: `(N + k, M + k)`.
    pub fn refined(&self, k: u32) -> Result<Self> {
        Self::new(self.ctx.with_precision(self.precision() + k)?, self.vars, self.trunc + k as usize)
    }

    pub fn index(&self, exps: &[usize]) -> usize {
        debug_assert_eq!(exps.len(), self.vars);
        let mut idx = 0;
        for &e in exps.iter().rev() {
            debug_assert!(e < self.trunc);
            idx = idx * self.trunc + e;
        }
        idx
    }

    pub fn exponents(&self, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.vars);
        for _ in 0..self.vars {
            out.push(idx % self.trunc);
            idx /= self.trunc;
        }
        out
    }
}

/// An element of `Z_p^d` given by exact integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupExponent(pub Vec<i64>);

impl GroupExponent {
    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![0; d];
        v[i] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        Self(self.0.iter().map(|a| a * k).collect())
    }

    /// Keeps the first `j` coordinates (the image under `G -> G/G_j`).
    pub fn project(&self, j: usize) -> Self {
        Self(self.0[..j].to_vec())
    }
}

/// A continuous character of `Z_p^d` of order 1 or `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterSpec {
    /// Order of the character; only 1 and `p` are supported.
    pub order: u64,
    /// `omega(gamma_i) = zeta^{c_i}` for a fixed primitive `p`-th root `zeta`.
    pub exponents: Vec<u64>,
}

impl CharacterSpec {
    pub fn trivial(d: usize) -> Self {
        Self { order: 1, exponents: vec![0; d] }
    }

    pub fn order_p(p: u64, exponents: Vec<u64>) -> Self {
        Self { order: p, exponents }
    }
}

/// Result of evaluating an element at a character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterValue {
    pub value: CycloElem,
    /// The value is determined modulo `y^y_precision`, where `y = zeta - 1`.
    pub y_precision: u32,
}

impl CharacterValue {
    pub fn agrees_with(&self, other: &CharacterValue) -> bool {
        let bound = self.y_precision.min(other.y_precision);
        self.value.sub(&other.value).y_valuation() >= bound
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IwasawaElement {
    profile: TruncationProfile,
    coeffs: Vec<u64>,
    prec: u32,
}

impl fmt::Debug for IwasawaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IwasawaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = self.profile.ctx;
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let exps = self.profile.exponents(i);
            let mono: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| if e == 1 { format!("t{}", v + 1) } else { format!("t{}^{}", v + 1, e) })
                .collect();
            let m = ctx.pow(self.prec);
            let signed = if c > m / 2 { c as i128 - m as i128 } else { c as i128 };
            if mono.is_empty() {
                terms.push(format!("{signed}"));
            } else if signed == 1 {
                terms.push(mono.join("*"));
            } else {
                terms.push(format!("{signed}*{}", mono.join("*")));
            }
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        write!(f, "{} [mod {}^{}]", terms.join(" + "), ctx.p(), self.prec)
    }
}

impl IwasawaElement {
    pub fn zero(profile: TruncationProfile) -> Self {
        Self { profile, coeffs: vec![0; profile.size()], prec: profile.precision() }
    }

    pub fn one(profile: TruncationProfile) -> Self {
        Self::constant(profile, 1)
    }

    pub fn constant(profile: TruncationProfile, c: i128) -> Self {
        let mut e = Self::zero(profile);
        e.coeffs[0] = profile.ctx.reduce(c);
        e
    }

    /// The variable `t_i` (0-based `i`).
    pub fn var(profile: TruncationProfile, i: usize) -> Self {
        let mut exps = vec![0; profile.vars];
        exps[i] = 1;
        Self::monomial(profile, &exps, 1)
    }

    /// The group element `gamma_i = 1 + t_i`.
    pub fn gamma(profile: TruncationProfile, i: usize) -> Self {
        Self::one(profile).add(&Self::var(profile, i))
    }

    pub fn monomial(profile: TruncationProfile, exps: &[usize], c: i128) -> Self {
        let mut e = Self::zero(profile);
        if exps.iter().all(|&x| x < profile.trunc) {
            e.coeffs[profile.index(exps)] = profile.ctx.reduce(c);
        }
        e
    }

    /// Builds from `(exponents, coefficient)` pairs; out-of-range monomials are dropped.
    pub fn from_terms(profile: TruncationProfile, terms: &[(Vec<usize>, i128)]) -> Self {
        let mut e = Self::zero(profile);
        for (exps, c) in terms {
            if exps.len() == profile.vars && exps.iter().all(|&x| x < profile.trunc) {
                let i = profile.index(exps);
                e.coeffs[i] = profile.ctx.add(e.coeffs[i], profile.ctx.reduce(*c));
            }
        }
        e
    }

    /// A univariate element (`d = 1`) from its coefficient list.
    pub fn from_coeffs(profile: TruncationProfile, coeffs: &[i128]) -> Self {
        let terms: Vec<(Vec<usize>, i128)> =
            coeffs.iter().enumerate().map(|(i, &c)| (vec![i], c)).collect();
        Self::from_terms(profile, &terms)
    }

    pub(crate) fn from_raw(profile: TruncationProfile, coeffs: Vec<u64>, prec: u32) -> Self {
        debug_assert_eq!(coeffs.len(), profile.size());
        let mut e = Self { profile, coeffs, prec: prec.min(profile.precision()) };
        e.normalize();
        e
    }

    fn normalize(&mut self) {
        let m = self.profile.ctx.pow(self.prec);
        for c in self.coeffs.iter_mut() {
            *c %= m;
        }
    }

    pub fn profile(&self) -> TruncationProfile {
        self.profile
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coefficient(&self, exps: &[usize]) -> u64 {
        self.coeffs[self.profile.index(exps)]
    }

    pub fn constant_term(&self) -> PadicInt {
        PadicInt::with_precision(self.profile.ctx, self.coeffs[0] as i128, self.prec)
    }

    /// Lowers the effective precision.
    pub fn with_precision(&self, prec: u32) -> Self {
        let mut e = self.clone();
        e.prec = prec.min(self.prec);
        e.normalize();
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Equality of residues at the common effective precision.
    pub fn equals_at_precision(&self, other: &Self) -> bool {
        if self.profile != other.profile {
            return false;
        }
        let m = self.profile.ctx.pow(self.prec.min(other.prec));
        self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a % m == b % m)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.profile != other.profile {
            Err(Error::ProfileMismatch)
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let ctx = self.profile.ctx;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| ctx.add(*a, *b)).collect();
        Ok(Self::from_raw(self.profile, coeffs, self.prec.min(other.prec)))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let ctx = self.profile.ctx;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| ctx.sub(*a, *b)).collect();
        Ok(Self::from_raw(self.profile, coeffs, self.prec.min(other.prec)))
    }

    /// Truncated product; precision is the minimum of the inputs.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let p = self.profile;
        let ctx = p.ctx;
        let m = ctx.modulus() as u128;
        let mut out = vec![0u128; p.size()];
        let a_terms: Vec<(usize, Vec<usize>, u64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i, p.exponents(i), c))
            .collect();
        let b_terms: Vec<(usize, Vec<usize>, u64)> = other
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i, p.exponents(i), c))
            .collect();
        for (ia, ea, ca) in &a_terms {
            for (ib, eb, cb) in &b_terms {
                if ea.iter().zip(eb).all(|(x, y)| x + y < p.trunc) {
                    let slot = &mut out[ia + ib];
                    *slot = (*slot + (*ca as u128) * (*cb as u128)) % m;
                }
            }
        }
        let coeffs = out.into_iter().map(|x| x as u64).collect();
        Ok(Self::from_raw(p, coeffs, self.prec.min(other.prec)))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("profile mismatch")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("profile mismatch")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("profile mismatch")
    }

    pub fn neg(&self) -> Self {
        let ctx = self.profile.ctx;
        let coeffs = self.coeffs.iter().map(|&c| ctx.neg(c)).collect();
        Self::from_raw(self.profile, coeffs, self.prec)
    }

    pub fn scale(&self, c: u64) -> Self {
        let ctx = self.profile.ctx;
        let coeffs = self.coeffs.iter().map(|&x| ctx.mul(x, c)).collect();
        Self::from_raw(self.profile, coeffs, self.prec)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.profile).with_precision(self.prec);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `min_i v_p(coefficient_i)`: the exponent of `p` dividing the element.
    pub fn content_valuation(&self) -> Valuation {
        let ctx = self.profile.ctx;
        let v = self.coeffs.iter().filter(|&&c| c != 0).map(|&c| ctx.val(c)).min();
        match v {
            Some(v) => Valuation::Exact(v),
            None => Valuation::AtLeast(self.prec),
        }
    }

    /// Exact division by `p^k`; the precision drops by `k`.
    pub fn divide_by_p_power(&self, k: u32) -> Result<Self> {
        if k > self.prec {
            return Err(Error::PrecisionExhausted("dividing out more p-powers than are known".into()));
        }
        let pk = self.profile.ctx.pow(k);
        if self.coeffs.iter().any(|&c| c % pk != 0) {
            return Err(Error::InvalidArgument(format!("element not divisible by p^{k}")));
        }
        let coeffs = self.coeffs.iter().map(|&c| c / pk).collect();
        Ok(Self::from_raw(self.profile, coeffs, self.prec - k))
    }

    /// Multiplicative inverse, available when the constant term is a unit.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if !c0.is_unit() {
            return Err(Error::ZeroDivisor);
        }
        // Newton iteration x <- x (2 - f x); the error lies in the maximal
        // ideal and every power of (p, t_1..t_d) beyond N + d(M-1) vanishes.
        let p = self.profile;
        let mut x = Self::constant(p, c0.inverse()?.residue() as i128).with_precision(self.prec);
        let two = Self::constant(p, 2);
        let bound = self.prec as usize + p.vars * p.trunc.saturating_sub(1) + 1;
        let mut reach = 1usize;
        while reach < bound {
            x = x.mul(&two.sub(&self.mul(&x)));
            reach *= 2;
        }
        debug_assert!(self.mul(&x).equals_at_precision(&Self::one(p)));
        Ok(x)
    }

    pub fn is_unit(&self) -> bool {
        self.constant_term().is_unit()
    }

    /// Ring map `t_i -> images[i]` (images in the same profile).
    pub fn substitute(&self, images: &[IwasawaElement]) -> Self {
        let p = self.profile;
        assert_eq!(images.len(), p.vars);
        let mut powers: Vec<Vec<IwasawaElement>> = Vec::with_capacity(p.vars);
        for img in images {
            let mut row = vec![Self::one(p)];
            for k in 1..p.trunc {
                let next = row[k - 1].mul(img);
                row.push(next);
            }
            powers.push(row);
        }
        let ctx = p.ctx;
        let mut acc = vec![0u64; p.size()];
        let mut prec = self.prec;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let exps = p.exponents(i);
            let mut term = Self::constant(p, c as i128);
            for (v, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&powers[v][e]);
                }
            }
            prec = prec.min(term.prec);
            for (a, b) in acc.iter_mut().zip(&term.coeffs) {
                *a = ctx.add(*a, *b);
            }
        }
        for img in images {
            prec = prec.min(img.prec);
        }
        Self::from_raw(p, acc, prec)
    }

    /// The involution induced by `gamma -> gamma^{-1}` on the group.
    pub fn sharp(&self) -> Self {
        let p = self.profile;
        let images: Vec<IwasawaElement> = (0..p.vars)
            .map(|i| {
                let inv = Self::gamma(p, i).inverse().expect("gamma is a unit");
                inv.sub(&Self::one(p))
            })
            .collect();
        self.substitute(&images)
    }

    /// `pi^d_j`: sets `t_{j+1} = ... = t_d = 0` and drops those variables.
    pub fn project(&self, j: usize) -> Result<Self> {
        let p = self.profile;
        if j > p.vars {
            return Err(Error::InvalidArgument(format!("cannot project {} variables to {j}", p.vars)));
        }
        let target = p.with_vars(j)?;
        let mut coeffs = vec![0u64; target.size()];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let mut exps = target.exponents(i);
            exps.resize(p.vars, 0);
            *c = self.coeffs[p.index(&exps)];
        }
        Ok(Self::from_raw(target, coeffs, self.prec))
    }

    /// Views the element inside a ring with more variables.
    pub fn extend_vars(&self, vars: usize) -> Result<Self> {
        let p = self.profile;
        if vars < p.vars {
            return Err(Error::InvalidArgument("extend_vars cannot drop variables".into()));
        }
        let target = p.with_vars(vars)?;
        let mut out = vec![0u64; target.size()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let mut exps = p.exponents(i);
            exps.resize(vars, 0);
            out[target.index(&exps)] = c;
        }
        Ok(Self::from_raw(target, out, self.prec))
    }

    /// Reduces into a coarser profile (smaller `N` and/or `M`, same `d`).
    pub fn truncate_to(&self, target: TruncationProfile) -> Result<Self> {
        let p = self.profile;
        if target.vars != p.vars || target.trunc > p.trunc || target.precision() > p.precision() {
            return Err(Error::InvalidArgument("truncate_to needs a coarser profile".into()));
        }
        let mut out = vec![0u64; target.size()];
        let m = target.ctx.modulus();
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.coeffs[p.index(&target.exponents(i))] % m;
        }
        Ok(Self::from_raw(target, out, self.prec.min(target.precision())))
    }

    /// Lifts into a finer profile; the precision stays that of `self`.
    pub fn lift_to(&self, target: TruncationProfile) -> Result<Self> {
        let p = self.profile;
        if target.vars != p.vars || target.trunc < p.trunc || target.p() != p.p() || target.precision() < p.precision() {
            return Err(Error::InvalidArgument("lift_to needs a finer profile".into()));
        }
        let mut out = vec![0u64; target.size()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[target.index(&p.exponents(i))] = c;
        }
        let mut e = Self { profile: target, coeffs: out, prec: self.prec };
        e.normalize();
        Ok(e)
    }

    /// Lifts into a finer profile reading coefficients as balanced residues,
    /// treating the result as exact there. Used to rebuild integer-defined
    /// data at a higher truncation.
    pub fn lift_exact(&self, target: TruncationProfile) -> Result<Self> {
        let p = self.profile;
        if target.vars != p.vars || target.trunc < p.trunc || target.p() != p.p() || target.precision() < p.precision() {
            return Err(Error::InvalidArgument("lift_exact needs a finer profile".into()));
        }
        let ctx = p.ctx.with_precision(self.prec.max(1))?;
        let mut out = vec![0u64; target.size()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[target.index(&p.exponents(i))] = target.ctx.reduce(ctx.signed(c));
        }
        Ok(Self { profile: target, coeffs: out, prec: target.precision() })
    }

    /// Matrix of `h -> self * h` in the monomial basis, one row per monomial of `h`.
    pub fn multiplication_rows(&self) -> Vec<linalg::Row> {
        let p = self.profile;
        (0..p.size())
            .map(|i| {
                let m = Self::monomial(p, &p.exponents(i), 1);
                self.mul(&m).coeffs
            })
            .collect()
    }

    /// Ring-map evaluation `gamma_i -> omega(gamma_i)`.
    pub fn evaluate_character(&self, omega: &CharacterSpec) -> Result<CharacterValue> {
        let p = self.profile;
        let ctx = p.ctx.with_precision(self.prec.max(1))?;
        if omega.exponents.len() != p.vars {
            return Err(Error::InvalidArgument("character has the wrong number of generators".into()));
        }
        let trivial = omega.order == 1 || omega.exponents.iter().all(|&c| c % p.p() == 0);
        if omega.order != 1 && omega.order != p.p() {
            return Err(Error::UnsupportedCharacter(format!("order {} is not 1 or p", omega.order)));
        }
        let images: Vec<CycloElem> = omega
            .exponents
            .iter()
            .map(|&c| {
                if omega.order == 1 {
                    CycloElem::zero(ctx)
                } else {
                    CycloElem::zeta_power(ctx, c as i64).sub(&CycloElem::one(ctx))
                }
            })
            .collect();
        let mut pows: Vec<Vec<CycloElem>> = Vec::new();
        for img in &images {
            let mut row = vec![CycloElem::one(ctx)];
            for k in 1..p.trunc {
                let next = row[k - 1].mul(img);
                row.push(next);
            }
            pows.push(row);
        }
        let mut acc = CycloElem::zero(ctx);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut term = CycloElem::scalar(ctx, c);
            for (v, &e) in p.exponents(i).iter().enumerate() {
                if e > 0 {
                    term = term.mul(&pows[v][e]);
                }
            }
            acc = acc.add(&term);
        }
        let p_part = (p.p() as u32 - 1) * self.prec;
        let y_precision = if trivial { p_part } else { p_part.min(p.trunc as u32) };
        Ok(CharacterValue { value: acc, y_precision })
    }

    /// Weierstrass preparation for `d = 1`.
    pub fn weierstrass_prepare(&self) -> Result<WeierstrassForm> {
        weierstrass_prepare(self)
    }
}

/// Neutral determinant over any commutative element type.
pub trait RingElem: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn r_add(&self, o: &Self) -> Self;
    fn r_sub(&self, o: &Self) -> Self;
    fn r_mul(&self, o: &Self) -> Self;
}

impl RingElem for IwasawaElement {
    fn zero_like(&self) -> Self {
        Self::zero(self.profile).with_precision(self.prec)
    }
    fn one_like(&self) -> Self {
        Self::one(self.profile).with_precision(self.prec)
    }
    fn r_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn r_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn r_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
}

impl RingElem for CycloElem {
    fn zero_like(&self) -> Self {
        CycloElem::zero(self.context())
    }
    fn one_like(&self) -> Self {
        CycloElem::one(self.context())
    }
    fn r_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn r_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn r_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
}

/// Division-free determinant by dynamic programming over column subsets.
pub fn determinant<R: RingElem>(m: &[Vec<R>]) -> Option<R> {
    let n = m.len();
    let seed = m.first()?.first()?.clone();
    assert!(n <= 16, "determinant of a {n}x{n} matrix is too large for subset expansion");
    let mut dp: Vec<Option<R>> = vec![None; 1 << n];
    dp[0] = Some(seed.one_like());
    for mask in 0usize..(1 << n) {
        let Some(cur) = dp[mask].clone() else { continue };
        let row = mask.count_ones() as usize;
        if row == n {
            continue;
        }
        for col in 0..n {
            if mask & (1 << col) != 0 {
                continue;
            }
            let above = (mask >> col).count_ones();
            let term = cur.r_mul(&m[row][col]);
            let next = mask | (1 << col);
            let slot = dp[next].take().unwrap_or_else(|| seed.zero_like());
            dp[next] = Some(if above % 2 == 0 { slot.r_add(&term) } else { slot.r_sub(&term) });
        }
    }
    dp[(1 << n) - 1].take()
}

/// Output of Weierstrass preparation: `f = p^mu * poly * unit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassForm {
    pub mu: u32,
    pub lambda: usize,
    /// Monic distinguished polynomial of degree `lambda`.
    pub poly: IwasawaElement,
    pub unit: IwasawaElement,
    /// `p^mu * poly * unit` reproduces the input modulo `p^(mu + precision)`.
    pub precision: u32,
    /// Digits of `poly` that do not depend on the discarded tail `t^M`.
    pub canonical_precision: u32,
}

impl WeierstrassForm {
    pub fn reconstruct(&self) -> IwasawaElement {
        let ctx = self.poly.profile().context();
        let pm = ctx.pow(self.mu);
        self.poly.mul(&self.unit).scale(pm).with_precision(self.mu + self.precision)
    }
}

fn weierstrass_prepare(f: &IwasawaElement) -> Result<WeierstrassForm> {
    let prof = f.profile();
    if prof.vars() != 1 {
        return Err(Error::InvalidArgument("Weierstrass preparation is only for one variable".into()));
    }
    let mu = match f.content_valuation() {
        Valuation::Exact(v) => v,
        Valuation::AtLeast(_) => {
            return Err(Error::PrecisionExhausted("all coefficients vanish at effective precision".into()))
        }
    };
    let g = f.divide_by_p_power(mu)?;
    let prec = g.precision();
    if prec == 0 {
        return Err(Error::PrecisionExhausted("no digits left after removing p-power".into()));
    }
    let ctx = prof.context();
    let m = prof.trunc();
    let lambda = g.coeffs.iter().position(|&c| ctx.is_unit(c)).expect("content valuation is zero");
    if lambda >= m {
        return Err(Error::TruncationTooSmall(format!("lambda >= M = {m}")));
    }
    let one = IwasawaElement::one(prof).with_precision(prec);
    let split = |h: &IwasawaElement| -> (IwasawaElement, IwasawaElement) {
        let mut low = vec![0u64; m];
        let mut high = vec![0u64; m];
        for (i, &c) in h.coeffs.iter().enumerate() {
            if i < lambda {
                low[i] = c;
            } else {
                high[i - lambda] = c;
            }
        }
        (
            IwasawaElement::from_raw(prof, low, h.prec),
            IwasawaElement::from_raw(prof, high, h.prec),
        )
    };
    // Maintain g = cur * unit; push the degree >= lambda part of cur into the unit.
    let mut unit = one.clone();
    let mut cur = g.clone();
    let mut converged = false;
    for _ in 0..(prec as usize + 2) * 2 {
        let (low, high) = split(&cur);
        if high.equals_at_precision(&one) {
            converged = true;
            break;
        }
        let hinv = high.inverse()?;
        unit = unit.mul(&high);
        // cur / high = t^lambda + low / high
        let tl = IwasawaElement::monomial(prof, &[lambda], 1).with_precision(prec);
        cur = tl.add(&low.mul(&hinv));
    }
    if !converged {
        return Err(Error::PrecisionExhausted("Weierstrass iteration did not converge".into()));
    }
    let (low, _) = split(&cur);
    let poly = low.add(&IwasawaElement::monomial(prof, &[lambda], 1)).with_precision(prec);
    debug_assert!(poly.mul(&unit).equals_at_precision(&g));
    let canonical_precision = if lambda == 0 {
        prec
    } else {
        let c = match low.content_valuation() {
            Valuation::Exact(v) => v,
            Valuation::AtLeast(_) => prec,
        };
        let steps = (m - lambda + 1).div_ceil(lambda) as u32;
        prec.min(c.saturating_mul(steps))
    };
    Ok(WeierstrassForm { mu, lambda, poly, unit, precision: prec, canonical_precision })
}

/// `gamma^e = prod_i (1 + t_i)^{e_i}` for exact integer exponents.
pub fn embed_group_element(profile: TruncationProfile, e: &GroupExponent) -> Result<IwasawaElement> {
    if e.len() != profile.vars() {
        return Err(Error::InvalidArgument(format!(
            "group exponent of length {} in {} variables",
            e.len(),
            profile.vars()
        )));
    }
    let ctx = profile.context();
    let mut acc = IwasawaElement::one(profile);
    for (i, &ei) in e.0.iter().enumerate() {
        if ei == 0 {
            continue;
        }
        let mut terms = Vec::with_capacity(profile.trunc());
        for k in 0..profile.trunc() {
            let mut exps = vec![0; profile.vars()];
            exps[i] = k;
            terms.push((exps, integer_binomial(ctx, ei, k as u64) as i128));
        }
        acc = acc.mul(&IwasawaElement::from_terms(profile, &terms));
    }
    Ok(acc)
}

/// `gamma^e` for p-adic exponents, losing `max_k v_p(k!)` digits for `k < M`.
pub fn embed_padic_exponent(profile: TruncationProfile, e: &[PadicInt]) -> Result<IwasawaElement> {
    if e.len() != profile.vars() {
        return Err(Error::InvalidArgument("group exponent length mismatch".into()));
    }
    let mut acc = IwasawaElement::one(profile);
    for (i, ei) in e.iter().enumerate() {
        let mut coeffs = vec![0u64; profile.size()];
        let mut prec = profile.precision();
        for k in 0..profile.trunc() {
            let c = padic_binomial(ei, k as u64)?;
            prec = prec.min(c.precision());
            let mut exps = vec![0; profile.vars()];
            exps[i] = k;
            coeffs[profile.index(&exps)] = c.residue();
        }
        acc = acc.mul(&IwasawaElement::from_raw(profile, coeffs, prec));
    }
    Ok(acc)
}

/// Some `h` with `g = f h` in the truncated ring, or `None` if none exists.
pub fn divides(f: &IwasawaElement, g: &IwasawaElement) -> Result<Option<IwasawaElement>> {
    if f.profile() != g.profile() {
        return Err(Error::ProfileMismatch);
    }
    let prec = f.precision().min(g.precision());
    if prec == 0 || f.with_precision(prec).is_zero() {
        return Err(Error::ZeroDivisor);
    }
    let prof = f.profile();
    let ctx = prof.context().with_precision(prec)?;
    let m = ctx.modulus();
    let rows: Vec<linalg::Row> = f
        .multiplication_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| x % m).collect())
        .collect();
    let b: Vec<u64> = g.coeffs().iter().map(|x| x % m).collect();
    Ok(linalg::solve_left(ctx, &rows, prof.size(), &b)
        .map(|h| IwasawaElement::from_raw(prof, h, prec)))
}

/// `f ~ g`: equal p-power content and mutual divisibility by units.
pub fn associate_test(f: &IwasawaElement, g: &IwasawaElement) -> Result<bool> {
    if f.profile() != g.profile() {
        return Err(Error::ProfileMismatch);
    }
    let (vf, vg) = (f.content_valuation(), g.content_valuation());
    let (Valuation::Exact(mf), Valuation::Exact(mg)) = (vf, vg) else {
        return Err(Error::ZeroDivisor);
    };
    if mf != mg {
        return Ok(false);
    }
    let prec = f.precision().min(g.precision());
    if mf >= prec {
        return Err(Error::PrecisionExhausted("no digits left after removing common p-power".into()));
    }
    let f1 = f.with_precision(prec).divide_by_p_power(mf)?;
    let g1 = g.with_precision(prec).divide_by_p_power(mf)?;
    let forward = divides(&f1, &g1)?;
    let backward = divides(&g1, &f1)?;
    Ok(matches!((forward, backward), (Some(h), Some(k)) if h.is_unit() && k.is_unit()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prof(p: u64, n: u32, d: usize, m: usize) -> TruncationProfile {
        TruncationProfile::new(PadicContext::new(p, n).unwrap(), d, m).unwrap()
    }

    fn random(rng: &mut ChaCha8Rng, pr: TruncationProfile) -> IwasawaElement {
        let m = pr.context().modulus();
        let coeffs = (0..pr.size()).map(|_| rng.gen_range(0..m)).collect();
        IwasawaElement::from_raw(pr, coeffs, pr.precision())
    }

    #[test]
    fn geometric_series_inverts_gamma() {
        let pr = prof(5, 4, 1, 8);
        let g = IwasawaElement::gamma(pr, 0);
        let geo = IwasawaElement::from_coeffs(pr, &[1, -1, 1, -1, 1, -1, 1, -1]);
        assert!(g.mul(&geo).equals_at_precision(&IwasawaElement::one(pr)));
        assert!(g.mul(&IwasawaElement::zero(pr)).is_zero());
        let t = IwasawaElement::var(pr, 0);
        let a = t.add(&IwasawaElement::constant(pr, 5));
        let b = t.sub(&IwasawaElement::constant(pr, 5));
        assert_eq!(a.mul(&b), IwasawaElement::from_coeffs(pr, &[-25, 0, 1]));
    }

    #[test]
    fn sharp_examples() {
        let pr = prof(5, 4, 1, 6);
        let g = IwasawaElement::gamma(pr, 0);
        assert_eq!(g.sharp(), IwasawaElement::from_coeffs(pr, &[1, -1, 1, -1, 1, -1]));
        let f = IwasawaElement::from_coeffs(pr, &[3, 2, 1]);
        // (f^#)^# loses nothing below degree M when composing two series
        assert_eq!(f.sharp().sharp(), f);
        let p5 = IwasawaElement::constant(pr, 5);
        assert_eq!(p5.sharp(), p5);
    }

    #[test]
    fn projection_examples() {
        let pr = prof(5, 4, 2, 4);
        let g2 = IwasawaElement::gamma(pr, 1);
        assert_eq!(g2.project(1).unwrap(), IwasawaElement::one(pr.with_vars(1).unwrap()));
        let g1g2 = IwasawaElement::gamma(pr, 0).mul(&g2);
        assert_eq!(g1g2.project(1).unwrap(), IwasawaElement::gamma(pr.with_vars(1).unwrap(), 0));
        let p1 = prof(5, 4, 1, 4);
        let f = IwasawaElement::var(p1, 0).add(&IwasawaElement::constant(p1, 5));
        assert_eq!(f.project(0).unwrap().constant_term().residue(), 5);
    }

    #[test]
    fn embed_examples() {
        let pr = prof(2, 6, 1, 4);
        assert_eq!(embed_group_element(pr, &GroupExponent(vec![1])).unwrap(), IwasawaElement::gamma(pr, 0));
        assert_eq!(
            embed_group_element(pr, &GroupExponent(vec![-1])).unwrap(),
            IwasawaElement::from_coeffs(pr, &[1, -1, 1, -1])
        );
        assert_eq!(
            embed_group_element(pr, &GroupExponent(vec![2])).unwrap(),
            IwasawaElement::from_coeffs(pr, &[1, 2, 1])
        );
    }

    #[test]
    fn embed_padic_reports_loss() {
        let pr = prof(2, 6, 1, 4);
        let e = PadicInt::new(pr.context(), 3);
        let el = embed_padic_exponent(pr, &[e]).unwrap();
        // v_2(3!) = 1
        assert_eq!(el.precision(), 5);
        assert!(el.equals_at_precision(&embed_group_element(pr, &GroupExponent(vec![3])).unwrap()));
    }

    #[test]
    fn divides_examples() {
        let pr = prof(5, 4, 1, 6);
        let t = IwasawaElement::var(pr, 0);
        let t2 = t.mul(&t);
        let h = divides(&t, &t2).unwrap().unwrap();
        assert!(t.mul(&h).equals_at_precision(&t2));
        assert!(divides(&t2, &t).unwrap().is_none());
        assert!(matches!(divides(&IwasawaElement::zero(pr), &t), Err(Error::ZeroDivisor)));
    }

    #[test]
    fn associate_examples() {
        let pr = prof(5, 4, 1, 6);
        let t = IwasawaElement::var(pr, 0);
        assert!(associate_test(&t, &t.scale(3)).unwrap());
        assert!(!associate_test(&t, &t.scale(5)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = t.mul(&t).sub(&IwasawaElement::constant(pr, 5));
        for _ in 0..10 {
            let mut u = random(&mut rng, pr);
            u = u.add(&IwasawaElement::constant(pr, 1 + 5 * rng.gen_range(0..5) as i128 - u.coeffs[0] as i128 + 1));
            prop_assume_unit(&u);
            assert!(associate_test(&f, &f.mul(&u)).unwrap());
        }
    }

    fn prop_assume_unit(u: &IwasawaElement) {
        assert!(u.is_unit());
    }

    #[test]
    fn weierstrass_examples() {
        let pr = prof(5, 6, 1, 8);
        let f = IwasawaElement::from_coeffs(pr, &[-5, 0, 1]);
        let w = f.weierstrass_prepare().unwrap();
        assert_eq!((w.mu, w.lambda), (0, 2));
        assert_eq!(w.poly, f);
        assert!(w.unit.equals_at_precision(&IwasawaElement::one(pr)));

        let f = IwasawaElement::from_coeffs(pr, &[0, 5]);
        let w = f.weierstrass_prepare().unwrap();
        assert_eq!((w.mu, w.lambda), (1, 1));
        assert_eq!(w.poly, IwasawaElement::var(pr, 0).with_precision(5));

        // t + p + t^2: root near -p
        let f = IwasawaElement::from_coeffs(pr, &[5, 1, 1]);
        let w = f.weierstrass_prepare().unwrap();
        assert_eq!((w.mu, w.lambda), (0, 1));
        let c = w.poly.coeffs()[0];
        // P = t - r with r = -p - r^2, so P(0) = -r = p + p^2 + ... = 5 mod 25
        assert_eq!(c % 25, 5);
        assert!(w.reconstruct().equals_at_precision(&f));
        assert_eq!(w.unit.coeffs()[1] % 5, 1);
        assert_eq!(w.unit.coeffs()[0] % 5, 1);
    }

    #[test]
    fn weierstrass_errors() {
        let pr = prof(5, 3, 1, 4);
        assert!(matches!(
            IwasawaElement::zero(pr).weierstrass_prepare(),
            Err(Error::PrecisionExhausted(_))
        ));
        let f = IwasawaElement::from_coeffs(pr, &[5, 5, 5, 5]);
        // all coefficients divisible by p once: mu = 1, then the unit part is 1 + t + ..
        assert_eq!(f.weierstrass_prepare().unwrap().mu, 1);
        let f = IwasawaElement::from_coeffs(pr, &[5, 10, 5, 25]);
        assert!(f.weierstrass_prepare().is_ok());
        let f = IwasawaElement::from_coeffs(pr, &[25, 5, 10, 5]);
        let w = f.weierstrass_prepare().unwrap();
        assert_eq!((w.mu, w.lambda), (1, 1));
        assert!(matches!(
            IwasawaElement::var(pr, 0).weierstrass_prepare().unwrap().canonical_precision,
            3
        ));
    }

    #[test]
    fn character_evaluation_examples() {
        let pr = prof(5, 3, 1, 8);
        let f = IwasawaElement::var(pr, 0).add(&IwasawaElement::constant(pr, 5));
        let v = f.evaluate_character(&CharacterSpec::trivial(1)).unwrap();
        assert_eq!(v.value, CycloElem::scalar(pr.context(), 5));
        let g = IwasawaElement::gamma(pr, 0);
        let v = g.evaluate_character(&CharacterSpec::order_p(5, vec![1])).unwrap();
        assert!(v.agrees_with(&CharacterValue { value: CycloElem::zeta_power(pr.context(), 1), y_precision: 100 }));
        let e = embed_group_element(pr, &GroupExponent(vec![7])).unwrap();
        let v = e.evaluate_character(&CharacterSpec::trivial(1)).unwrap();
        assert_eq!(v.value, CycloElem::one(pr.context()));
        assert!(matches!(
            g.evaluate_character(&CharacterSpec { order: 25, exponents: vec![1] }),
            Err(Error::UnsupportedCharacter(_))
        ));
    }

    #[test]
    fn determinant_matches_formula() {
        let pr = prof(7, 3, 1, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m: Vec<Vec<IwasawaElement>> =
            (0..2).map(|_| (0..2).map(|_| random(&mut rng, pr)).collect()).collect();
        let det = determinant(&m).unwrap();
        let expect = m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0]));
        assert_eq!(det, expect);
        let m3: Vec<Vec<IwasawaElement>> =
            (0..3).map(|_| (0..3).map(|_| random(&mut rng, pr)).collect()).collect();
        let d3 = determinant(&m3).unwrap();
        let mut cof = IwasawaElement::zero(pr);
        for j in 0..3 {
            let minor: Vec<Vec<IwasawaElement>> = (1..3)
                .map(|i| (0..3).filter(|&c| c != j).map(|c| m3[i][c].clone()).collect())
                .collect();
            let term = m3[0][j].mul(&determinant(&minor).unwrap());
            cof = if j % 2 == 0 { cof.add(&term) } else { cof.sub(&term) };
        }
        assert_eq!(d3, cof);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn multiplication_commutes_and_associates(seed in 0u64..10_000) {
            let pr = prof(3, 4, 2, 4);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c) = (random(&mut rng, pr), random(&mut rng, pr), random(&mut rng, pr));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn sharp_is_multiplicative(seed in 0u64..10_000) {
            let pr = prof(3, 4, 2, 4);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = (random(&mut rng, pr), random(&mut rng, pr));
            prop_assert_eq!(a.mul(&b).sharp(), a.sharp().mul(&b.sharp()));
        }

        #[test]
        fn projections_compose(seed in 0u64..10_000) {
            let pr = prof(3, 3, 3, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random(&mut rng, pr);
            prop_assert_eq!(a.project(2).unwrap().project(1).unwrap(), a.project(1).unwrap());
            prop_assert_eq!(a.project(1).unwrap().project(0).unwrap(), a.project(0).unwrap());
        }

        #[test]
        fn embedding_is_a_homomorphism(e1 in -50i64..50, e2 in -50i64..50, f1 in -50i64..50, f2 in -50i64..50) {
            let pr = prof(2, 6, 2, 4);
            let a = GroupExponent(vec![e1, e2]);
            let b = GroupExponent(vec![f1, f2]);
            let lhs = embed_group_element(pr, &a.add(&b)).unwrap();
            let rhs = embed_group_element(pr, &a).unwrap().mul(&embed_group_element(pr, &b).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn weierstrass_roundtrip(seed in 0u64..100_000) {
            let pr = prof(3, 6, 1, 10);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut f = random(&mut rng, pr);
            let lam = rng.gen_range(0..6usize);
            for i in 0..lam { f.coeffs[i] = 3 * (f.coeffs[i] / 3) % pr.context().modulus(); }
            if f.coeffs[lam] % 3 == 0 { f.coeffs[lam] += 1; }
            let w = f.weierstrass_prepare().unwrap();
            prop_assert_eq!(w.lambda, lam);
            prop_assert!(w.reconstruct().equals_at_precision(&f));
        }

        #[test]
        fn associate_is_symmetric_under_units(seed in 0u64..10_000) {
            let pr = prof(3, 3, 2, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random(&mut rng, pr);
            prop_assume!(!f.is_zero());
            let mut u = random(&mut rng, pr);
            if u.coeffs[0] % 3 == 0 { u.coeffs[0] += 1; }
            let g = f.mul(&u);
            prop_assert!(associate_test(&f, &g).unwrap());
            prop_assert!(associate_test(&g, &f).unwrap());
        }
    }
}
