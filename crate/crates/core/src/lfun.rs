//! Places of `F_q(t)`, Frobenius assignments for `Z_p^d`-extensions, truncated
//! Stickelberger series and the Stickelberger element of a constant ordinary
//! abelian variety given by its twist matrix.

use std::collections::BTreeMap;
use std::fmt;

use crate::akashi::EulerCharacteristic;
use crate::cyclo::CycloElem;
use crate::error::{Error, Result};
use crate::padic::{hensel_unit_root, is_power_of, is_prime, PadicContext, PadicInt, Valuation};
use crate::ring::{
    determinant, embed_group_element, CharacterSpec, CharacterValue, GroupExponent, IwasawaElement, RingElem,
    TruncationProfile,
};

/// `F_q` by addition and multiplication tables; elements are base-`p` digit
/// vectors of polynomials in a fixed generator.
#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u64,
    q: u64,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut k = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1 && is_prime(p)).then_some((p, k))
}

impl FiniteField {
    pub fn new(q: u64) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or_else(|| Error::InvalidArgument(format!("{q} is not a prime power")))?;
        if q > 1024 {
            return Err(Error::InvalidArgument(format!("q = {q} is too large for table arithmetic")));
        }
        // monic irreducible of degree k over F_p, by trial division
        let digits = |mut x: u64, len: usize| -> Vec<u64> {
            (0..len)
                .map(|_| {
                    let d = x % p;
                    x /= p;
                    d
                })
                .collect()
        };
        let rem = |a: &[u64], b: &[u64]| -> Vec<u64> {
            let mut r = a.to_vec();
            let db = b.len() - 1;
            while r.len() > db {
                let c = *r.last().expect("nonempty");
                let top = r.len() - 1;
                for (i, &bi) in b.iter().enumerate() {
                    let slot = top - db + i;
                    r[slot] = (r[slot] + p * p - c * bi % p) % p;
                }
                r.pop();
            }
            r
        };
        let modulus: Vec<u64> = if k == 1 {
            vec![0, 1]
        } else {
            (0..p.pow(k))
                .map(|low| {
                    let mut f = digits(low, k as usize);
                    f.push(1);
                    f
                })
                .find(|f| {
                    (1..=k as usize / 2).all(|e| {
                        (0..p.pow(e as u32)).all(|low| {
                            let mut g = digits(low, e);
                            g.push(1);
                            rem(f, &g).iter().any(|&x| x != 0)
                        })
                    })
                })
                .expect("irreducible polynomials exist in every degree")
        };
        let qs = q as usize;
        let mut add = vec![0u32; qs * qs];
        let mut mul = vec![0u32; qs * qs];
        let from_digits = |v: &[u64]| -> u32 { v.iter().rev().fold(0, |acc, &d| acc * p + d) as u32 };
        for a in 0..q {
            let da = digits(a, k as usize);
            for b in 0..q {
                let db = digits(b, k as usize);
                let s: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = from_digits(&s);
                let mut prod = vec![0u64; 2 * k as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let mut r = if k == 1 { vec![prod[0]] } else { rem(&prod, &modulus) };
                r.resize(k as usize, 0);
                mul[(a * q + b) as usize] = from_digits(&r);
            }
        }
        let neg = (0..q).map(|a| (0..q).find(|&b| add[(a * q + b) as usize] == 0).expect("additive inverse") as u32).collect();
        Ok(Self { p, q, add, mul, neg })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[(a as u64 * self.q + b as u64) as usize]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a as u64 * self.q + b as u64) as usize]
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    /// Product of polynomials (coefficients lowest first).
    pub fn poly_mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut out = vec![0u32; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        out
    }
}

/// A place of `F_q(t)`: a monic irreducible polynomial or the infinite place.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinite,
    /// Coefficients lowest first, monic.
    Finite(Vec<u32>),
}

impl Place {
    pub fn degree(&self) -> u32 {
        match self {
            Place::Infinite => 1,
            Place::Finite(c) => c.len() as u32 - 1,
        }
    }

    /// `inf` or the coefficients joined by commas, lowest first.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "inf" || spec == "infinity" {
            return Ok(Place::Infinite);
        }
        let coeffs = spec
            .split(',')
            .map(|s| s.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<u32>, _>>()
            .map_err(|e| Error::InvalidArgument(format!("bad place '{spec}': {e}")))?;
        if coeffs.len() < 2 || *coeffs.last().expect("nonempty") != 1 {
            return Err(Error::InvalidArgument(format!("place '{spec}' must be a monic polynomial of degree >= 1")));
        }
        Ok(Place::Finite(coeffs))
    }

    fn sort_key(&self) -> (u32, u8, Vec<u32>) {
        match self {
            Place::Infinite => (1, 0, Vec::new()),
            Place::Finite(c) => (self.degree(), 1, c.iter().rev().copied().collect()),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => write!(f, "inf"),
            Place::Finite(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// Places of degree at most `max_degree`, in (degree, polynomial) order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceTable {
    pub q: u64,
    pub max_degree: u32,
    pub places: Vec<Place>,
}

impl PlaceTable {
    pub fn new(q: u64, max_degree: u32, mut places: Vec<Place>) -> Result<Self> {
        for pl in &places {
            if pl.degree() > max_degree {
                return Err(Error::InvalidArgument(format!("place {pl} exceeds the maximal degree {max_degree}")));
            }
            if let Place::Finite(c) = pl {
                if c.iter().any(|&x| x as u64 >= q) {
                    return Err(Error::InvalidArgument(format!("place {pl} has coefficients outside F_{q}")));
                }
            }
        }
        places.sort_by_key(|p| p.sort_key());
        places.dedup();
        Ok(Self { q, max_degree, places })
    }

    /// Finite places of each degree `1..=max_degree`.
    pub fn counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.max_degree as usize];
        for pl in &self.places {
            if let Place::Finite(_) = pl {
                c[pl.degree() as usize - 1] += 1;
            }
        }
        c
    }

    /// `sum_{e | n} e N_e = q^n` for every `n <= max_degree`.
    pub fn necklace_identity_holds(&self) -> bool {
        let c = self.counts();
        (1..=self.max_degree as u64).all(|n| {
            let lhs: u64 = (1..=n).filter(|e| n % e == 0).map(|e| e * c[e as usize - 1]).sum();
            Some(lhs) == self.q.checked_pow(n as u32)
        })
    }

    pub fn contains(&self, pl: &Place) -> bool {
        self.places.contains(pl)
    }
}

/// All monic irreducibles over `F_q` of degree `<= max_degree`, plus the infinite place.
pub fn enumerate_places(q: u64, max_degree: u32) -> Result<PlaceTable> {
    if max_degree == 0 {
        return Err(Error::InvalidArgument("maximal degree must be at least 1".into()));
    }
    let field = FiniteField::new(q)?;
    if q.checked_pow(max_degree).map_or(true, |s| s > 20_000_000) {
        return Err(Error::InvalidArgument(format!("q^D = {q}^{max_degree} is too large to sieve")));
    }
    let index = |c: &[u32]| -> usize { c[..c.len() - 1].iter().rev().fold(0usize, |acc, &x| acc * q as usize + x as usize) };
    let monic = |n: u32, mut i: usize| -> Vec<u32> {
        let mut c: Vec<u32> = (0..n)
            .map(|_| {
                let d = (i % q as usize) as u32;
                i /= q as usize;
                d
            })
            .collect();
        c.push(1);
        c
    };
    let mut irreducible: Vec<Vec<Vec<u32>>> = vec![Vec::new(); max_degree as usize + 1];
    for n in 1..=max_degree {
        let total = q.pow(n) as usize;
        let mut composite = vec![false; total];
        for e in 1..=n / 2 {
            let cofactors = q.pow(n - e) as usize;
            for f in &irreducible[e as usize] {
                for gi in 0..cofactors {
                    let g = monic(n - e, gi);
                    composite[index(&field.poly_mul(f, &g))] = true;
                }
            }
        }
        irreducible[n as usize] = (0..total).filter(|&i| !composite[i]).map(|i| monic(n, i)).collect();
    }
    let mut places = vec![Place::Infinite];
    places.extend(irreducible.into_iter().flatten().map(Place::Finite));
    PlaceTable::new(q, max_degree, places)
}

/// How places map to `Gal(F_d / F) = Z_p^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrobeniusRule {
    /// `v -> (deg v, 0, ..., 0)`: the constant-field extension in the first coordinate.
    Arithmetic,
    Table(BTreeMap<Place, GroupExponent>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusAssignment {
    pub vars: usize,
    pub rule: FrobeniusRule,
    /// Image of the `q`-power Frobenius, needed when `S` is empty.
    pub constant_frobenius: Option<GroupExponent>,
}

impl FrobeniusAssignment {
    pub fn arithmetic(vars: usize) -> Result<Self> {
        if vars == 0 {
            return Err(Error::InvalidArgument("the arithmetic rule needs at least one variable".into()));
        }
        Ok(Self { vars, rule: FrobeniusRule::Arithmetic, constant_frobenius: Some(GroupExponent::basis(vars, 0)) })
    }

    pub fn table(vars: usize, entries: BTreeMap<Place, GroupExponent>, constant_frobenius: Option<GroupExponent>) -> Result<Self> {
        if entries.values().chain(constant_frobenius.iter()).any(|e| e.len() != vars) {
            return Err(Error::InvalidArgument(format!("exponent vectors must have length {vars}")));
        }
        Ok(Self { vars, rule: FrobeniusRule::Table(entries), constant_frobenius })
    }

    pub fn exponent(&self, place: &Place) -> Result<GroupExponent> {
        match &self.rule {
            FrobeniusRule::Arithmetic => Ok(GroupExponent::basis(self.vars, 0).scale(place.degree() as i64)),
            FrobeniusRule::Table(t) => t.get(place).cloned().ok_or_else(|| Error::MissingFrobenius(place.to_string())),
        }
    }

    pub fn constant(&self) -> Result<GroupExponent> {
        self.constant_frobenius.clone().ok_or_else(|| Error::MissingFrobenius("constant Frobenius".into()))
    }

    /// The assignment for `F_j`: exponents keep their first `j` coordinates.
    pub fn project(&self, j: usize) -> Result<Self> {
        if j > self.vars {
            return Err(Error::InvalidArgument(format!("cannot project {} coordinates to {j}", self.vars)));
        }
        let rule = match &self.rule {
            FrobeniusRule::Arithmetic if j > 0 => FrobeniusRule::Arithmetic,
            FrobeniusRule::Arithmetic => FrobeniusRule::Table(BTreeMap::new()),
            FrobeniusRule::Table(t) => FrobeniusRule::Table(t.iter().map(|(k, v)| (k.clone(), v.project(j))).collect()),
        };
        Ok(Self { vars: j, rule, constant_frobenius: self.constant_frobenius.as_ref().map(|e| e.project(j)) })
    }
}

/// Power series in `u` truncated after degree `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct USeries<R> {
    pub coeffs: Vec<R>,
}

impl<R: RingElem> USeries<R> {
    pub fn one(seed: &R, max_degree: usize) -> Self {
        let mut coeffs = vec![seed.zero_like(); max_degree + 1];
        coeffs[0] = seed.one_like();
        Self { coeffs }
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.max_degree();
        let mut coeffs = vec![self.coeffs[0].zero_like(); d + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate().take(d + 1 - i) {
                coeffs[i + j] = coeffs[i + j].r_add(&a.r_mul(b));
            }
        }
        Self { coeffs }
    }

    /// Inverse of a series with constant term 1.
    pub fn inverse_unit(&self) -> Self {
        let d = self.max_degree();
        let mut b = vec![self.coeffs[0].one_like()];
        for n in 1..=d {
            let mut acc = self.coeffs[0].zero_like();
            for k in 1..=n {
                acc = acc.r_add(&self.coeffs[k].r_mul(&b[n - k]));
            }
            b.push(acc.zero_like().r_sub(&acc));
        }
        Self { coeffs: b }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(&self.coeffs[0], self.max_degree());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Value at `u = 1` of the truncation.
    pub fn sum(&self) -> R {
        self.coeffs.iter().skip(1).fold(self.coeffs[0].clone(), |acc, c| acc.r_add(c))
    }

    /// `sum_k c_k u^{n k}` from the list `c_k`.
    pub fn sparse(seed: &R, max_degree: usize, step: usize, terms: &[R]) -> Self {
        let mut coeffs = vec![seed.zero_like(); max_degree + 1];
        for (k, c) in terms.iter().enumerate() {
            if k * step <= max_degree {
                coeffs[k * step] = c.clone();
            }
        }
        Self { coeffs }
    }
}

/// Frobenius action on `A[p^infinity]` of a constant ordinary abelian variety.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistMatrix {
    ctx: PadicContext,
    q: u64,
    entries: Vec<Vec<u64>>,
}

impl TwistMatrix {
    pub fn new(ctx: PadicContext, q: u64, entries: Vec<Vec<i128>>) -> Result<Self> {
        let g = entries.len();
        if g == 0 || entries.iter().any(|r| r.len() != g) {
            return Err(Error::InvalidArgument("twist matrix must be square and nonempty".into()));
        }
        if !is_power_of(q, ctx.p()) || q == 1 {
            return Err(Error::InvalidArgument(format!("q = {q} is not a power of p = {}", ctx.p())));
        }
        let entries: Vec<Vec<u64>> = entries.iter().map(|r| r.iter().map(|&x| ctx.reduce(x)).collect()).collect();
        let m = Self { ctx, q, entries };
        if !ctx.is_unit(m.determinant()) {
            return Err(Error::SingularTwist);
        }
        Ok(m)
    }

    /// The `1 x 1` matrix of the unit root of `x^2 - a x + q`.
    pub fn from_trace(ctx: PadicContext, a: i64, q: u64) -> Result<Self> {
        let alpha = hensel_unit_root(&PadicInt::new(ctx, a as i128), q)?;
        Self::new(ctx, q, vec![vec![alpha.residue() as i128]])
    }

    pub fn diagonal(ctx: PadicContext, q: u64, alphas: &[PadicInt]) -> Result<Self> {
        let g = alphas.len();
        let entries = (0..g)
            .map(|i| (0..g).map(|j| if i == j { alphas[i].residue() as i128 } else { 0 }).collect())
            .collect();
        Self::new(ctx, q, entries)
    }

    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }

    fn scalar_profile(&self) -> TruncationProfile {
        TruncationProfile::new(self.ctx, 0, 1).expect("scalar profile")
    }

    fn as_elements(&self, m: &[Vec<u64>]) -> Vec<Vec<IwasawaElement>> {
        let prof = self.scalar_profile();
        m.iter().map(|r| r.iter().map(|&x| IwasawaElement::constant(prof, x as i128)).collect()).collect()
    }

    pub fn determinant(&self) -> u64 {
        determinant(&self.as_elements(&self.entries)).expect("nonempty").coeffs()[0]
    }

    /// `U^{-n}` for `n >= 0`.
    pub fn inverse_power(&self, n: u32) -> Result<Vec<Vec<u64>>> {
        let inv = mat_inverse(&self.ctx, &self.entries).ok_or(Error::SingularTwist)?;
        Ok(mat_pow(&self.ctx, &inv, n))
    }

    /// Elementary symmetric functions `e_0, ..., e_g` of the eigenvalues of `m`
    /// (sums of principal minors).
    pub fn elementary(&self, m: &[Vec<u64>]) -> Vec<u64> {
        let g = m.len();
        let el = self.as_elements(m);
        let mut out = vec![0u64; g + 1];
        out[0] = 1 % self.ctx.modulus();
        for mask in 1usize..(1 << g) {
            let idx: Vec<usize> = (0..g).filter(|i| mask & (1 << i) != 0).collect();
            let sub: Vec<Vec<IwasawaElement>> =
                idx.iter().map(|&i| idx.iter().map(|&j| el[i][j].clone()).collect()).collect();
            let d = determinant(&sub).expect("nonempty").coeffs()[0];
            let k = idx.len();
            out[k] = self.ctx.add(out[k], d);
        }
        out
    }
}

fn mat_mul(ctx: &PadicContext, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).fold(0u64, |acc, k| ctx.add(acc, ctx.mul(a[i][k], b[k][j])))).collect())
        .collect()
}

fn mat_pow(ctx: &PadicContext, a: &[Vec<u64>], mut e: u32) -> Vec<Vec<u64>> {
    let n = a.len();
    let mut acc: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j) % ctx.modulus()).collect()).collect();
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(ctx, &acc, &base);
        }
        base = mat_mul(ctx, &base, &base);
        e >>= 1;
    }
    acc
}

fn mat_inverse(ctx: &PadicContext, a: &[Vec<u64>]) -> Option<Vec<Vec<u64>>> {
    let n = a.len();
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| u64::from(i == j) % ctx.modulus()));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| ctx.is_unit(m[r][col]))?;
        m.swap(col, piv);
        let inv = ctx.inv(m[col][col])?;
        for x in m[col].iter_mut() {
            *x = ctx.mul(*x, inv);
        }
        for r in 0..n {
            if r != col && m[r][col] != 0 {
                let f = m[r][col];
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot_row) {
                    *x = ctx.sub(*x, ctx.mul(f, *y));
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Places of `table` outside `s` with degree `<= max_degree`, grouped by
/// `(degree, Frobenius exponent)` with multiplicities, in a fixed order.
fn grouped_places(
    table: &PlaceTable,
    s: &[Place],
    frob: &FrobeniusAssignment,
    max_degree: u32,
) -> Result<BTreeMap<(u32, GroupExponent), u64>> {
    if max_degree > table.max_degree {
        return Err(Error::InvalidArgument(format!(
            "series to degree {max_degree} needs places up to that degree (table has {})",
            table.max_degree
        )));
    }
    let mut groups = BTreeMap::new();
    for pl in &table.places {
        if pl.degree() > max_degree || s.contains(pl) {
            continue;
        }
        *groups.entry((pl.degree(), frob.exponent(pl)?)).or_insert(0u64) += 1;
    }
    Ok(groups)
}

/// `Theta_S(u) = prod_{v not in S} (1 - [v] u^{deg v})^{-1}` through `u^D`;
/// for empty `S` the factor `1 - Fr_q u` is included.
pub fn stickelberger_series(
    table: &PlaceTable,
    s: &[Place],
    frob: &FrobeniusAssignment,
    max_degree: u32,
    profile: TruncationProfile,
) -> Result<USeries<IwasawaElement>> {
    if frob.vars != profile.vars() {
        return Err(Error::ProfileMismatch);
    }
    let d = max_degree as usize;
    let one = IwasawaElement::one(profile);
    let mut theta = USeries::one(&one, d);
    for ((deg, e), mult) in grouped_places(table, s, frob, max_degree)? {
        let x = embed_group_element(profile, &e)?;
        let terms: Vec<IwasawaElement> = (0..=d / deg as usize).map(|k| x.pow(k as u64)).collect();
        let factor = USeries::sparse(&one, d, deg as usize, &terms);
        theta = theta.mul(&factor.pow(mult));
    }
    if s.is_empty() {
        let fr = embed_group_element(profile, &frob.constant()?)?;
        theta = theta.mul(&USeries::sparse(&one, d, 1, &[one.clone(), fr.neg()]));
    }
    Ok(theta)
}

/// `theta^+` together with the data it was computed from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaPlus {
    pub element: IwasawaElement,
    /// `u`-series whose value at `u = 1` is `element`.
    pub series: USeries<IwasawaElement>,
    pub max_degree: u32,
}

impl ThetaPlus {
    pub fn precision(&self) -> u32 {
        self.element.precision()
    }
}

/// `theta^+ = prod_v det(I - [v]^{-1} U^{-deg v})^{-1}`, with every factor
/// expanded as a power series in an auxiliary `u` (weight `deg v`), truncated
/// after total degree `D` and evaluated at `u = 1`.
pub fn stickelberger_element(
    table: &PlaceTable,
    s: &[Place],
    frob: &FrobeniusAssignment,
    twist: &TwistMatrix,
    max_degree: u32,
    profile: TruncationProfile,
) -> Result<ThetaPlus> {
    if frob.vars != profile.vars() {
        return Err(Error::ProfileMismatch);
    }
    if twist.context() != profile.context() {
        return Err(Error::InvalidArgument("twist matrix and profile use different precisions".into()));
    }
    let d = max_degree as usize;
    let one = IwasawaElement::one(profile);
    let g = twist.dim();
    let factor_poly = |inv_group: &IwasawaElement, n: u32| -> Result<USeries<IwasawaElement>> {
        let e = twist.elementary(&twist.inverse_power(n)?);
        let terms: Vec<IwasawaElement> = (0..=g)
            .map(|k| {
                let c = if k % 2 == 0 { e[k] } else { profile.context().neg(e[k]) };
                inv_group.pow(k as u64).scale(c)
            })
            .collect();
        Ok(USeries::sparse(&one, d, n as usize, &terms))
    };
    let mut series = USeries::one(&one, d);
    for ((deg, e), mult) in grouped_places(table, s, frob, max_degree)? {
        let inv = embed_group_element(profile, &e.neg())?;
        series = series.mul(&factor_poly(&inv, deg)?.inverse_unit().pow(mult));
    }
    if s.is_empty() {
        let fr_inv = embed_group_element(profile, &frob.constant()?.neg())?;
        series = series.mul(&factor_poly(&fr_inv, 1)?);
    }
    Ok(ThetaPlus { element: series.sum(), series, max_degree })
}

/// `sum_n c_n^# alpha^{-n}` for `Theta = sum_n c_n u^n`: the one-dimensional
/// substitution of the eigenvalue, used to cross-check the determinant route.
pub fn substitute_unit_root(theta: &USeries<IwasawaElement>, alpha: &PadicInt) -> Result<IwasawaElement> {
    let inv = alpha.inverse().map_err(|_| Error::SingularTwist)?;
    let ctx = alpha.context();
    let mut acc = theta.coeffs[0].zero_like();
    for (n, c) in theta.coeffs.iter().enumerate() {
        let w = ctx.pow_mod(inv.residue(), n as u64);
        acc = acc.add(&c.sharp().scale(w));
    }
    Ok(acc)
}

/// `L = theta^+ (theta^+)^#`.
pub fn p_adic_l(theta_plus: &IwasawaElement) -> IwasawaElement {
    theta_plus.mul(&theta_plus.sharp())
}

/// `|pi^d_0(L)|_p^{-1}`.
pub fn euler_char_prediction(l: &IwasawaElement) -> Result<EulerCharacteristic> {
    match l.project(0)?.constant_term().valuation() {
        Valuation::Exact(v) => Ok(EulerCharacteristic::new(l.profile().p(), v as i64)),
        Valuation::AtLeast(_) => Err(Error::PrecisionExhausted("augmentation of L vanishes at precision".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpolationReport {
    pub lhs: CharacterValue,
    pub rhs: CycloElem,
    pub agree: bool,
}

/// `omega(theta^+)` against an Euler product evaluated place by place.
pub fn interpolation_check(
    theta_plus: &ThetaPlus,
    omega: &CharacterSpec,
    table: &PlaceTable,
    s: &[Place],
    frob: &FrobeniusAssignment,
    twist: &TwistMatrix,
) -> Result<InterpolationReport> {
    let lhs = theta_plus.element.evaluate_character(omega)?;
    let ctx = lhs.value.context();
    let p = ctx.p() as i64;
    let d = theta_plus.max_degree as usize;
    let g = twist.dim();
    let one = CycloElem::one(ctx);
    let omega_inv = |e: &GroupExponent| -> Result<CycloElem> {
        if e.len() != omega.exponents.len() {
            return Err(Error::InvalidArgument("character and assignment disagree on d".into()));
        }
        if omega.order == 1 {
            return Ok(one.clone());
        }
        let c: i64 = e.0.iter().zip(&omega.exponents).map(|(a, &b)| a.rem_euclid(p) * b as i64).sum();
        Ok(CycloElem::zeta_power(ctx, -c))
    };
    let poly = |w: &CycloElem, n: u32| -> Result<USeries<CycloElem>> {
        let e = twist.elementary(&twist.inverse_power(n)?);
        let terms: Vec<CycloElem> = (0..=g)
            .map(|k| {
                let c = if k % 2 == 0 { e[k] } else { twist.context().neg(e[k]) };
                let mut x = CycloElem::scalar(ctx, c % ctx.modulus());
                for _ in 0..k {
                    x = x.mul(w);
                }
                x
            })
            .collect();
        Ok(USeries::sparse(&one, d, n as usize, &terms))
    };
    let mut series = USeries::one(&one, d);
    for pl in &table.places {
        if pl.degree() as usize > d || s.contains(pl) {
            continue;
        }
        let w = omega_inv(&frob.exponent(pl)?)?;
        series = series.mul(&poly(&w, pl.degree())?.inverse_unit());
    }
    if s.is_empty() {
        series = series.mul(&poly(&omega_inv(&frob.constant()?)?, 1)?);
    }
    let rhs = series.sum();
    let agree = lhs.agrees_with(&CharacterValue { value: rhs.clone(), y_precision: u32::MAX });
    Ok(InterpolationReport { lhs, rhs, agree })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof(p: u64, n: u32, d: usize, m: usize) -> TruncationProfile {
        TruncationProfile::new(PadicContext::new(p, n).unwrap(), d, m).unwrap()
    }

    /// Irreducibility by exhaustive factor search, independent of the sieve.
    fn brute_irreducible(field: &FiniteField, f: &[u32]) -> bool {
        let n = f.len() - 1;
        let q = field.q() as usize;
        for e in 1..=n / 2 {
            for a in 0..q.pow(e as u32) {
                let mut g: Vec<u32> = (0..e).map(|i| ((a / q.pow(i as u32)) % q) as u32).collect();
                g.push(1);
                for b in 0..q.pow((n - e) as u32) {
                    let mut h: Vec<u32> = (0..n - e).map(|i| ((b / q.pow(i as u32)) % q) as u32).collect();
                    h.push(1);
                    if field.poly_mul(&g, &h) == f {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn place_counts() {
        let t = enumerate_places(2, 3).unwrap();
        assert_eq!(t.counts(), vec![2, 1, 2]);
        assert!(t.places.contains(&Place::Infinite));
        let t = enumerate_places(3, 1).unwrap();
        assert_eq!(t.places.len(), 4);
        let field = FiniteField::new(2).unwrap();
        for pl in &enumerate_places(2, 4).unwrap().places {
            if let Place::Finite(c) = pl {
                assert!(brute_irreducible(&field, c), "{pl}");
            }
        }
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            assert!(enumerate_places(q, 4).unwrap().necklace_identity_holds(), "q = {q}");
        }
    }

    #[test]
    fn field_tables_are_a_field() {
        for q in [4u64, 8, 9, 25] {
            let f = FiniteField::new(q).unwrap();
            for a in 1..q as u32 {
                assert!((1..q as u32).any(|b| f.mul(a, b) == 1), "q = {q}, a = {a}");
            }
        }
    }

    #[test]
    fn closed_form_over_p1() {
        let pr = prof(2, 6, 1, 6);
        let t = enumerate_places(2, 3).unwrap();
        let frob = FrobeniusAssignment::arithmetic(1).unwrap();
        let theta = stickelberger_series(&t, &[Place::Infinite], &frob, 3, pr).unwrap();
        let gamma = IwasawaElement::gamma(pr, 0);
        for n in 0..=3u32 {
            assert_eq!(theta.coeffs[n as usize], gamma.pow(n as u64).scale(2u64.pow(n)));
        }
        let all = t.places.clone();
        let trivial = stickelberger_series(&t, &all, &frob, 3, pr).unwrap();
        assert_eq!(trivial, USeries::one(&IwasawaElement::one(pr), 3));
    }

    #[test]
    fn theta_plus_examples() {
        let pr = prof(5, 2, 1, 4);
        let ctx = pr.context();
        let twist = TwistMatrix::from_trace(ctx, -3, 5).unwrap();
        assert_eq!(twist.entries()[0][0], 7);
        let t = enumerate_places(5, 2).unwrap();
        assert_eq!(t.counts(), vec![5, 10]);
        let frob = FrobeniusAssignment::arithmetic(1).unwrap();
        let all = t.places.clone();
        let th = stickelberger_element(&t, &all, &frob, &twist, 2, pr).unwrap();
        assert_eq!(th.element, IwasawaElement::one(pr));

        // direct per-place expansion of prod (1 - g^-n a^-n u^n)^-1 through u^2
        let th = stickelberger_element(&t, &[Place::Infinite], &frob, &twist, 2, pr).unwrap();
        let ai = ctx.inv(7).unwrap();
        let gi = IwasawaElement::gamma(pr, 0).inverse().unwrap();
        let x1 = gi.scale(ai);
        let x2 = gi.mul(&gi).scale(ctx.mul(ai, ai));
        let one = IwasawaElement::one(pr);
        // coefficient of u: 5 x1; of u^2: C(5+1, 2) x1^2 + 10 x2
        let expect = one.add(&x1.scale(5)).add(&x1.mul(&x1).scale(15)).add(&x2.scale(10));
        assert_eq!(th.element, expect);

        let alpha = PadicInt::new(ctx, 7);
        let diag = TwistMatrix::diagonal(ctx, 5, &[alpha, alpha]).unwrap();
        let th2 = stickelberger_element(&t, &[Place::Infinite], &frob, &diag, 2, pr).unwrap();
        let sq = th.series.mul(&th.series).sum();
        assert_eq!(th2.element, sq);
    }

    #[test]
    fn determinant_route_matches_substitution() {
        let pr = prof(5, 2, 1, 4);
        let twist = TwistMatrix::from_trace(pr.context(), -3, 5).unwrap();
        let t = enumerate_places(5, 4).unwrap();
        let frob = FrobeniusAssignment::arithmetic(1).unwrap();
        let th = stickelberger_element(&t, &[Place::Infinite], &frob, &twist, 4, pr).unwrap();
        let series = stickelberger_series(&t, &[Place::Infinite], &frob, 4, pr).unwrap();
        let direct = substitute_unit_root(&series, &PadicInt::new(pr.context(), 7)).unwrap();
        assert_eq!(th.element, direct);
    }

    #[test]
    fn l_function_examples() {
        let pr = prof(5, 4, 1, 6);
        let g = IwasawaElement::gamma(pr, 0);
        assert_eq!(p_adic_l(&g), IwasawaElement::one(pr));
        let five = IwasawaElement::constant(pr, 5);
        assert_eq!(p_adic_l(&five), IwasawaElement::constant(pr, 25));
        assert_eq!(euler_char_prediction(&IwasawaElement::constant(pr, 25)).unwrap().exponent, 2);
        assert_eq!(euler_char_prediction(&g).unwrap().exponent, 0);
    }

    #[test]
    fn interpolation_examples() {
        let pr = prof(5, 2, 1, 6);
        let twist = TwistMatrix::from_trace(pr.context(), -3, 5).unwrap();
        let t = enumerate_places(5, 2).unwrap();
        let frob = FrobeniusAssignment::arithmetic(1).unwrap();
        let th = stickelberger_element(&t, &[Place::Infinite], &frob, &twist, 2, pr).unwrap();
        for omega in [CharacterSpec::trivial(1), CharacterSpec::order_p(5, vec![1]), CharacterSpec::order_p(5, vec![3])] {
            let r = interpolation_check(&th, &omega, &t, &[Place::Infinite], &frob, &twist).unwrap();
            assert!(r.agree, "{omega:?}");
        }
    }

    #[test]
    fn twist_errors() {
        let ctx = PadicContext::new(5, 3).unwrap();
        assert!(matches!(TwistMatrix::from_trace(ctx, 5, 5), Err(Error::NonOrdinary(_))));
        assert_eq!(TwistMatrix::from_trace(PadicContext::new(5, 1).unwrap(), -3, 5).unwrap().entries()[0][0], 2);
        assert!(matches!(TwistMatrix::new(ctx, 5, vec![vec![5]]), Err(Error::SingularTwist)));
    }
}
