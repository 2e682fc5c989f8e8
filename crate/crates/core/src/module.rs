//! Finitely presented modules over truncated `Lambda_d`, their Koszul homology
//! for the subgroups `<gamma_{s+1}, ..., gamma_d>`, and characteristic elements.
//!
//! Homology is computed by one of two routes. Square presentations with a
//! nonzero determinant (and free modules) have a two-term free resolution, so
//! their homology is read off symbolically from the specialized relation
//! matrix. Everything else is restricted to `Z/p^N`, where kernels and images
//! are exact; the truncation artifacts of that model are removed by taking
//! images of cycles from one level up, and the answer is accepted only when it
//! is stable across two consecutive levels.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{left_kernel, Howell, Row};
use crate::padic::{PadicContext, Valuation};
use crate::ring::{determinant, IwasawaElement, TruncationProfile, WeierstrassForm};

/// Cokernel of `Lambda^r -> Lambda^c` given by an `r x c` relation matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct ModulePresentation {
    profile: TruncationProfile,
    ncols: usize,
    rows: Vec<Vec<IwasawaElement>>,
}

impl fmt::Debug for ModulePresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ModulePresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lambda_{}^{} / <", self.profile.vars(), self.ncols)?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let parts: Vec<String> = r.iter().map(|e| e.to_string()).collect();
            write!(f, "({})", parts.join(", "))?;
        }
        write!(f, ">")
    }
}

impl ModulePresentation {
    pub fn new(profile: TruncationProfile, ncols: usize, rows: Vec<Vec<IwasawaElement>>) -> Result<Self> {
        for r in &rows {
            if r.len() != ncols {
                return Err(Error::InvalidArgument(format!("relation row of length {} for {ncols} generators", r.len())));
            }
            if r.iter().any(|e| e.profile() != profile) {
                return Err(Error::ProfileMismatch);
            }
        }
        Ok(Self { profile, ncols, rows })
    }

    pub fn free(profile: TruncationProfile, rank: usize) -> Self {
        Self { profile, ncols: rank, rows: Vec::new() }
    }

    pub fn zero(profile: TruncationProfile) -> Self {
        Self::free(profile, 0)
    }

    /// `Lambda / (f_1, ..., f_k)`.
    pub fn cyclic(profile: TruncationProfile, relations: &[IwasawaElement]) -> Result<Self> {
        Self::new(profile, 1, relations.iter().map(|f| vec![f.clone()]).collect())
    }

    pub fn principal(f: &IwasawaElement) -> Self {
        Self { profile: f.profile(), ncols: 1, rows: vec![vec![f.clone()]] }
    }

    pub fn profile(&self) -> TruncationProfile {
        self.profile
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn relations(&self) -> &[Vec<IwasawaElement>] {
        &self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Smallest effective precision among the entries.
    pub fn precision(&self) -> u32 {
        self.rows.iter().flatten().map(|e| e.precision()).min().unwrap_or(self.profile.precision())
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.profile != other.profile {
            return Err(Error::ProfileMismatch);
        }
        let zero = IwasawaElement::zero(self.profile);
        let ncols = self.ncols + other.ncols;
        let mut rows = Vec::with_capacity(self.rows.len() + other.rows.len());
        for r in &self.rows {
            let mut row = r.clone();
            row.resize(ncols, zero.clone());
            rows.push(row);
        }
        for r in &other.rows {
            let mut row = vec![zero.clone(); self.ncols];
            row.extend(r.iter().cloned());
            rows.push(row);
        }
        Ok(Self { profile: self.profile, ncols, rows })
    }

    pub fn direct_sum_all(profile: TruncationProfile, parts: &[Self]) -> Result<Self> {
        parts.iter().try_fold(Self::zero(profile), |acc, m| acc.direct_sum(m))
    }

    /// Appends relation rows.
    pub fn with_relations(&self, extra: Vec<Vec<IwasawaElement>>) -> Result<Self> {
        let mut rows = self.rows.clone();
        rows.extend(extra);
        Self::new(self.profile, self.ncols, rows)
    }

    /// Relation matrix with `t_{j+1} = ... = t_d = 0`, over `Lambda_j`.
    pub fn specialize(&self, j: usize) -> Result<Self> {
        let profile = self.profile.with_vars(j)?;
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|e| e.project(j)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { profile, ncols: self.ncols, rows })
    }

    /// Rebuilds the presentation at a finer profile from balanced residues.
    pub fn lift_exact(&self, target: TruncationProfile) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|e| e.lift_exact(target)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { profile: target, ncols: self.ncols, rows })
    }

    /// Reduces every entry into a coarser profile.
    pub fn truncate_to(&self, target: TruncationProfile) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|e| e.truncate_to(target)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { profile: target, ncols: self.ncols, rows })
    }

    /// The presentation at `(N + k, M + k)`.
    pub fn refine(&self, k: u32) -> Result<Self> {
        self.lift_exact(self.profile.refined(k)?)
    }

    /// Connected components of the relation matrix, as `(row indices, column indices)`.
    pub fn blocks(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let c = self.ncols;
        let mut parent: Vec<usize> = (0..c).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for r in &self.rows {
            let cols: Vec<usize> = (0..c).filter(|&j| !r[j].is_zero()).collect();
            for w in cols.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut roots: Vec<usize> = Vec::new();
        let mut cols_of: Vec<Vec<usize>> = Vec::new();
        for j in 0..c {
            let root = find(&mut parent, j);
            match roots.iter().position(|&x| x == root) {
                Some(k) => cols_of[k].push(j),
                None => {
                    roots.push(root);
                    cols_of.push(vec![j]);
                }
            }
        }
        let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); roots.len()];
        for (i, r) in self.rows.iter().enumerate() {
            if let Some(j) = (0..c).find(|&j| !r[j].is_zero()) {
                let root = find(&mut parent, j);
                let k = roots.iter().position(|&x| x == root).expect("root recorded");
                rows_of[k].push(i);
            }
        }
        rows_of.into_iter().zip(cols_of).collect()
    }

    pub fn sub_presentation(&self, rows: &[usize], cols: &[usize]) -> Self {
        let rel = rows.iter().map(|&i| cols.iter().map(|&j| self.rows[i][j].clone()).collect()).collect();
        Self { profile: self.profile, ncols: cols.len(), rows: rel }
    }

    /// Restriction of scalars to `Lambda_j`: generators become `(generator, monomial in t_{j+1..d})`.
    pub fn restrict_scalars(&self, j: usize) -> Result<Self> {
        let src = self.profile;
        let d = src.vars();
        if j > d {
            return Err(Error::InvalidArgument(format!("cannot restrict from {d} to {j} variables")));
        }
        let dst = src.with_vars(j)?;
        let m = src.trunc();
        let outer = m.pow((d - j) as u32);
        let outer_exps = |k: usize| -> Vec<usize> {
            let mut k = k;
            (0..d - j)
                .map(|_| {
                    let e = k % m;
                    k /= m;
                    e
                })
                .collect()
        };
        let outer_index = |e: &[usize]| -> usize { e.iter().rev().fold(0, |acc, &x| acc * m + x) };
        let ncols = self.ncols * outer;
        let ctx = src.context();
        let mut rows = Vec::new();
        for r in &self.rows {
            for shift in 0..outer {
                let sh = outer_exps(shift);
                let mut coeffs = vec![vec![0u64; dst.size()]; ncols];
                let mut prec = dst.precision();
                for (g, e) in r.iter().enumerate() {
                    prec = prec.min(e.precision());
                    for (idx, &c) in e.coeffs().iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        let exps = src.exponents(idx);
                        let hi: Vec<usize> = exps[j..].iter().zip(&sh).map(|(a, b)| a + b).collect();
                        if hi.iter().any(|&x| x >= m) {
                            continue;
                        }
                        let col = g * outer + outer_index(&hi);
                        let slot = dst.index(&exps[..j]);
                        coeffs[col][slot] = ctx.add(coeffs[col][slot], c);
                    }
                }
                let row: Vec<IwasawaElement> =
                    coeffs.into_iter().map(|c| IwasawaElement::from_raw(dst, c, prec)).collect();
                if row.iter().any(|e| !e.is_zero()) {
                    rows.push(row);
                }
            }
        }
        Ok(Self { profile: dst, ncols, rows })
    }

    /// `log_p` of the order, for a presentation over `Z/p^N` (no variables).
    pub fn finite_log_size(&self) -> Result<u64> {
        if self.profile.vars() != 0 {
            return Err(Error::InvalidArgument("finite_log_size needs a presentation over Z/p^N".into()));
        }
        let ctx = self.profile.context();
        let rows: Vec<Row> = self.rows.iter().map(|r| r.iter().map(|e| e.coeffs()[0]).collect()).collect();
        let h = Howell::new(ctx, self.ncols, rows);
        Ok(self.ncols as u64 * ctx.precision() as u64 - h.log_size())
    }
}

/// Characteristic element up to units: `p^mu * part`.
///
/// For one variable `part` is the distinguished polynomial of Weierstrass
/// preparation; otherwise it is a representative with content zero.
#[derive(Clone, PartialEq, Eq)]
pub struct CharElement {
    mu: u32,
    part: IwasawaElement,
    lambda: usize,
    canonical_precision: u32,
}

impl fmt::Debug for CharElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CharElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.part.profile().p();
        match (self.mu, self.is_unit_part()) {
            (0, true) => write!(f, "1"),
            (mu, true) => write!(f, "{p}^{mu}"),
            (0, false) => write!(f, "{}", self.part),
            (mu, false) => write!(f, "{p}^{mu} * ({})", self.part),
        }
    }
}

impl CharElement {
    pub fn one(profile: TruncationProfile) -> Self {
        Self { mu: 0, part: IwasawaElement::one(profile), lambda: 0, canonical_precision: profile.precision() }
    }

    pub fn p_power(profile: TruncationProfile, mu: u32) -> Self {
        Self { mu, ..Self::one(profile) }
    }

    pub fn from_element(f: &IwasawaElement) -> Result<Self> {
        let prof = f.profile();
        match prof.vars() {
            0 => match f.constant_term().valuation() {
                Valuation::Exact(v) => Ok(Self::p_power(prof, v)),
                Valuation::AtLeast(_) => Err(Error::PrecisionExhausted("constant vanishes at precision".into())),
            },
            1 => Ok(Self::from_weierstrass(&f.weierstrass_prepare()?)),
            _ => {
                let mu = match f.content_valuation() {
                    Valuation::Exact(v) => v,
                    Valuation::AtLeast(_) => {
                        return Err(Error::PrecisionExhausted("element vanishes at precision".into()))
                    }
                };
                let part = f.divide_by_p_power(mu)?;
                let canonical_precision = part.precision();
                Ok(Self { mu, part, lambda: 0, canonical_precision })
            }
        }
    }

    pub fn from_weierstrass(w: &WeierstrassForm) -> Self {
        Self { mu: w.mu, part: w.poly.clone(), lambda: w.lambda, canonical_precision: w.canonical_precision }
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    /// Degree of the distinguished part (one variable only; 0 otherwise).
    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn part(&self) -> &IwasawaElement {
        &self.part
    }

    pub fn profile(&self) -> TruncationProfile {
        self.part.profile()
    }

    pub fn canonical_precision(&self) -> u32 {
        self.canonical_precision
    }

    fn is_unit_part(&self) -> bool {
        if self.profile().vars() == 1 {
            self.lambda == 0
        } else {
            self.part.is_unit()
        }
    }

    /// True when the element is a unit (the module is pseudo-null).
    pub fn is_trivial(&self) -> bool {
        self.mu == 0 && self.is_unit_part()
    }

    /// `p^mu * part` as a ring element.
    pub fn to_element(&self) -> IwasawaElement {
        let ctx = self.profile().context();
        let prec = (self.part.precision() + self.mu).min(ctx.precision());
        let pm = ctx.pow(self.mu.min(ctx.precision()));
        let coeffs = self.part.coeffs().iter().map(|&x| ctx.mul(x, pm)).collect();
        IwasawaElement::from_raw(self.profile(), coeffs, prec)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.profile() != other.profile() {
            return Err(Error::ProfileMismatch);
        }
        let part = self.part.mul(&other.part);
        Ok(Self {
            mu: self.mu + other.mu,
            lambda: self.lambda + other.lambda,
            canonical_precision: self.canonical_precision.min(other.canonical_precision).min(part.precision()),
            part,
        })
    }

    pub fn product<'a>(profile: TruncationProfile, items: impl IntoIterator<Item = &'a CharElement>) -> Result<Self> {
        items.into_iter().try_fold(Self::one(profile), |acc, c| acc.mul(c))
    }

    /// Equality up to units. Profiles may differ in `(N, M)`; the comparison
    /// is made at the common canonical precision.
    pub fn associate(&self, other: &Self) -> Result<bool> {
        let (a, b) = (self.profile(), other.profile());
        if a.vars() != b.vars() || a.p() != b.p() {
            return Err(Error::ProfileMismatch);
        }
        if self.mu != other.mu {
            return Ok(false);
        }
        match a.vars() {
            0 => Ok(true),
            1 => {
                if self.lambda != other.lambda {
                    return Ok(false);
                }
                let prec = self.canonical_precision.min(other.canonical_precision);
                let m = a.context().pow(prec.min(a.precision()).min(b.precision()));
                Ok((0..self.lambda).all(|i| self.part.coefficient(&[i]) % m == other.part.coefficient(&[i]) % m))
            }
            _ => {
                if a != b {
                    let coarse = TruncationProfile::new(
                        a.context().with_precision(a.precision().min(b.precision()))?,
                        a.vars(),
                        a.trunc().min(b.trunc()),
                    )?;
                    let x = self.part.truncate_to(coarse)?;
                    let y = other.part.truncate_to(coarse)?;
                    return crate::ring::associate_test(&x, &y);
                }
                crate::ring::associate_test(&self.part, &other.part)
            }
        }
    }

    /// `pi^d_j` of the element, renormalized over `Lambda_j`.
    pub fn project(&self, j: usize) -> Result<Self> {
        Self::from_element(&self.to_element().with_precision(self.to_element().precision()).project(j)?)
    }

    /// `v_p` of the augmentation.
    pub fn augmentation_valuation(&self) -> Result<u32> {
        let e = self.part.project(0)?;
        match e.constant_term().valuation() {
            Valuation::Exact(v) => Ok(self.mu + v),
            Valuation::AtLeast(_) => Err(Error::PrecisionExhausted("augmentation vanishes at precision".into())),
        }
    }

    /// Greatest common divisor over `Lambda_1`: `p^min(mu) * gcd(P, Q)`.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        if self.profile() != other.profile() {
            return Err(Error::ProfileMismatch);
        }
        if self.profile().vars() == 0 {
            return Ok(Self::p_power(self.profile(), self.mu.min(other.mu)));
        }
        if self.profile().vars() != 1 {
            return Err(Error::NotComputable("gcd in more than one variable".into()));
        }
        let mu = self.mu.min(other.mu);
        let (poly, lambda, cp) = distinguished_gcd(
            (&self.part, self.lambda, self.canonical_precision),
            (&other.part, other.lambda, other.canonical_precision),
        )?;
        Ok(Self { mu, part: poly, lambda, canonical_precision: cp })
    }
}

/// Remainder of `a` modulo the monic polynomial `b` of degree `lb`.
fn poly_rem(a: &IwasawaElement, b: &IwasawaElement, lb: usize) -> IwasawaElement {
    let prof = a.profile();
    let ctx = prof.context();
    let m = prof.trunc();
    let mut r: Vec<u64> = a.coeffs().to_vec();
    let bc = b.coeffs();
    for top in (lb..m).rev() {
        let c = r[top];
        if c == 0 {
            continue;
        }
        for k in 0..=lb {
            let slot = top - lb + k;
            r[slot] = ctx.sub(r[slot], ctx.mul(c, bc[k]));
        }
    }
    let prec = a.precision().min(b.precision());
    IwasawaElement::from_raw(prof, r, prec)
}

/// Euclid on distinguished polynomials, removing `p`-powers and unit factors
/// (coprime to any distinguished polynomial) by Weierstrass preparation.
fn distinguished_gcd(
    a: (&IwasawaElement, usize, u32),
    b: (&IwasawaElement, usize, u32),
) -> Result<(IwasawaElement, usize, u32)> {
    let prof = a.0.profile();
    let (mut pa, mut la, mut ca) = (a.0.clone(), a.1, a.2);
    let (mut pb, mut lb, mut cb) = (b.0.clone(), b.1, b.2);
    if la < lb {
        std::mem::swap(&mut pa, &mut pb);
        std::mem::swap(&mut la, &mut lb);
        std::mem::swap(&mut ca, &mut cb);
    }
    loop {
        if lb == 0 {
            return Ok((IwasawaElement::one(prof), 0, ca.min(cb)));
        }
        let r = poly_rem(&pa, &pb, lb);
        let k = match r.content_valuation() {
            Valuation::AtLeast(_) => return Ok((pb, lb, ca.min(cb))),
            Valuation::Exact(k) => k,
        };
        let w = r.divide_by_p_power(k)?.weierstrass_prepare()?;
        let cr = w.canonical_precision.min(ca.min(cb).saturating_sub(k));
        if w.precision == 0 {
            return Err(Error::PrecisionExhausted("gcd remainder lost all digits".into()));
        }
        pa = pb;
        ca = cb;
        pb = w.poly;
        lb = w.lambda;
        cb = cr;
    }
}

fn minors(rows: &[Vec<IwasawaElement>], c: usize) -> Vec<IwasawaElement> {
    let r = rows.len();
    let mut out = Vec::new();
    if c > r || c == 0 {
        return out;
    }
    let mut pick: Vec<usize> = (0..c).collect();
    loop {
        let m: Vec<Vec<IwasawaElement>> = pick.iter().map(|&i| rows[i].clone()).collect();
        out.extend(determinant(&m));
        let Some(i) = (0..c).rev().find(|&i| pick[i] < r - c + i) else { return out };
        pick[i] += 1;
        for j in i + 1..c {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

/// Characteristic element of a torsion module.
///
/// Over `Lambda_0` and `Lambda_1` this is the gcd of the maximal minors; over
/// more variables only square blocks (a determinant) are supported.
pub fn char_element(m: &ModulePresentation) -> Result<CharElement> {
    let prof = m.profile();
    let mut acc = CharElement::one(prof);
    for (rows, cols) in m.blocks() {
        let block = m.sub_presentation(&rows, &cols);
        if block.nrows() < block.ncols() {
            return Err(Error::NotTorsion);
        }
        let ch = if prof.vars() <= 1 {
            let mut g: Option<CharElement> = None;
            for minor in minors(block.relations(), block.ncols()) {
                if minor.is_zero() {
                    continue;
                }
                let c = CharElement::from_element(&minor)?;
                g = Some(match g {
                    None => c,
                    Some(prev) => prev.gcd(&c)?,
                });
                if g.as_ref().is_some_and(|x| x.is_trivial()) {
                    break;
                }
            }
            g.ok_or(Error::NotTorsion)?
        } else if block.is_square() {
            let det = determinant(block.relations()).expect("nonempty block");
            if det.is_zero() {
                return Err(Error::NotTorsion);
            }
            CharElement::from_element(&det)?
        } else {
            return Err(Error::NotComputable(format!(
                "{}x{} block in {} variables",
                block.nrows(),
                block.ncols(),
                prof.vars()
            )));
        };
        acc = acc.mul(&ch)?;
    }
    Ok(acc)
}

/// How Koszul homology is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Route {
    /// Symbolic where the presentation allows it, finite otherwise.
    #[default]
    Auto,
    /// Always restrict scalars to `Z/p^N`.
    Finite,
}

fn subsets(k: usize, i: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == i {
            out.push(cur.clone());
            return;
        }
        for x in start..k {
            cur.push(x);
            rec(x + 1, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, i, &mut Vec::new(), &mut out);
    out
}

fn mat_apply(ctx: &PadicContext, x: &[u64], m: &[Row], ncols: usize) -> Row {
    let mut out = vec![0u64; ncols];
    let modulus = ctx.modulus() as u128;
    for (xi, r) in x.iter().zip(m) {
        if *xi == 0 {
            continue;
        }
        for (o, &v) in out.iter_mut().zip(r) {
            if v != 0 {
                *o = ((*o as u128 + *xi as u128 * v as u128) % modulus) as u64;
            }
        }
    }
    out
}

/// Homological Koszul differential `C_i -> C_{i-1}` on the operators `ops`
/// (row convention, each `n x n`); rows indexed by `(subset, basis)`.
fn koszul_differential(ctx: &PadicContext, ops: &[&Vec<Row>], n: usize, i: usize) -> Vec<Row> {
    let k = ops.len();
    let src = subsets(k, i);
    let dst = subsets(k, i - 1);
    let mut rows = Vec::with_capacity(src.len() * n);
    for set in &src {
        for b in 0..n {
            let mut row = vec![0u64; dst.len() * n];
            for (pos, &op) in set.iter().enumerate() {
                let face: Vec<usize> = set.iter().copied().filter(|&x| x != op).collect();
                let j = dst.iter().position(|s| *s == face).expect("face is a subset");
                for (c, &v) in ops[op][b].iter().enumerate() {
                    if v == 0 {
                        continue;
                    }
                    let slot = &mut row[j * n + c];
                    *slot = if pos % 2 == 0 { ctx.add(*slot, v) } else { ctx.sub(*slot, v) };
                }
            }
            rows.push(row);
        }
    }
    rows
}

fn block_copies(rows: &[Row], n: usize, copies: usize) -> Vec<Row> {
    let mut out = Vec::with_capacity(rows.len() * copies);
    for c in 0..copies {
        for r in rows {
            let mut v = vec![0u64; n * copies];
            v[c * n..(c + 1) * n].copy_from_slice(r);
            out.push(v);
        }
    }
    out
}

/// Cycles and boundaries of the Koszul complex of `ops` on `X = (Z/p^N)^n / U`,
/// where `ops` preserve `U`. Returns `(Z_i, B_i)` for `i = 0..=k`, both as spans
/// in `C_i`, each containing `U_i`.
fn koszul_spaces(ctx: PadicContext, n: usize, u: &[Row], ops: &[&Vec<Row>], need_z: bool, need_b: bool) -> Vec<(Option<Howell>, Option<Howell>)> {
    let k = ops.len();
    let binom = |i: usize| subsets(k, i).len();
    let diffs: Vec<Vec<Row>> = (0..=k).map(|i| if i == 0 { Vec::new() } else { koszul_differential(&ctx, ops, n, i) }).collect();
    (0..=k)
        .map(|i| {
            let dim = binom(i) * n;
            let ui = block_copies(u, n, binom(i));
            let z = need_z.then(|| {
                if i == 0 {
                    let id: Vec<Row> = (0..dim)
                        .map(|j| {
                            let mut v = vec![0u64; dim];
                            v[j] = 1;
                            v
                        })
                        .collect();
                    Howell::new(ctx, dim, id)
                } else {
                    let target = binom(i - 1) * n;
                    let mut stacked = diffs[i].clone();
                    stacked.extend(block_copies(u, n, binom(i - 1)));
                    let ker = left_kernel(ctx, &stacked, target);
                    let gens: Vec<Row> = ker.rows().iter().map(|r| r[..dim].to_vec()).collect();
                    Howell::new(ctx, dim, gens.into_iter().chain(ui.iter().cloned()).collect())
                }
            });
            let b = need_b.then(|| {
                let mut gens = ui.clone();
                if i < k {
                    gens.extend(diffs[i + 1].iter().cloned());
                }
                Howell::new(ctx, dim, gens)
            });
            (z, b)
        })
        .collect()
}

/// `X = F / U` restricted to `Z/p^N`, with unit pivots of `U` eliminated.
struct FiniteModel {
    prof: TruncationProfile,
    ngens: usize,
    /// Howell rows of `U` with unit pivots, with their pivot columns.
    unit_rows: Vec<(usize, Row)>,
    keep: Vec<usize>,
    /// Remaining relations in compressed coordinates.
    u: Vec<Row>,
    /// Action of `t_1 .. t_d` in compressed coordinates.
    actions: Vec<Vec<Row>>,
}

impl FiniteModel {
    fn build(m: &ModulePresentation) -> Self {
        let prof = m.profile();
        let ctx = prof.context();
        let size = prof.size();
        let full = m.ncols() * size;
        let mut gens = Vec::with_capacity(m.nrows() * size);
        for r in m.relations() {
            for mono in 0..size {
                let shift = prof.exponents(mono);
                let mut v = vec![0u64; full];
                for (g, e) in r.iter().enumerate() {
                    for (idx, &c) in e.coeffs().iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        let exps: Vec<usize> = prof.exponents(idx).iter().zip(&shift).map(|(a, b)| a + b).collect();
                        if exps.iter().all(|&x| x < prof.trunc()) {
                            let slot = g * size + prof.index(&exps);
                            v[slot] = ctx.add(v[slot], c);
                        }
                    }
                }
                gens.push(v);
            }
        }
        let h = Howell::new(ctx, full, gens);
        let mut unit_rows = Vec::new();
        let mut rest = Vec::new();
        for (r, &(col, v)) in h.rows().iter().zip(h.pivots()) {
            if v == 0 {
                unit_rows.push((col, r.clone()));
            } else {
                rest.push(r.clone());
            }
        }
        let unit_cols: Vec<usize> = unit_rows.iter().map(|(c, _)| *c).collect();
        let keep: Vec<usize> = (0..full).filter(|c| !unit_cols.contains(c)).collect();
        let mut model = Self { prof, ngens: m.ncols(), unit_rows, keep, u: Vec::new(), actions: Vec::new() };
        model.u = rest.iter().map(|r| model.restrict(r)).collect();
        model.actions = (0..prof.vars()).map(|j| model.action_matrix(j)).collect();
        model
    }

    fn dim(&self) -> usize {
        self.keep.len()
    }

    fn ctx(&self) -> PadicContext {
        self.prof.context()
    }

    fn restrict(&self, x: &[u64]) -> Row {
        self.keep.iter().map(|&c| x[c]).collect()
    }

    fn compress(&self, mut x: Row) -> Row {
        let ctx = self.ctx();
        let m = ctx.modulus() as u128;
        for (col, r) in &self.unit_rows {
            let f = x[*col];
            if f == 0 {
                continue;
            }
            let neg = ctx.neg(f) as u128;
            for (d, s) in x.iter_mut().zip(r) {
                if *s != 0 {
                    *d = ((*d as u128 + neg * *s as u128) % m) as u64;
                }
            }
        }
        self.restrict(&x)
    }

    fn action_matrix(&self, j: usize) -> Vec<Row> {
        let size = self.prof.size();
        (0..self.dim())
            .map(|k| {
                let col = self.keep[k];
                let (g, mono) = (col / size, col % size);
                let mut exps = self.prof.exponents(mono);
                exps[j] += 1;
                let mut v = vec![0u64; self.ngens * size];
                if exps[j] < self.prof.trunc() {
                    v[g * size + self.prof.index(&exps)] = 1;
                }
                self.compress(v)
            })
            .collect()
    }

    /// Reduction map from this (finer) model to a coarser one, compressed coordinates.
    fn projection_to(&self, coarse: &FiniteModel) -> Vec<Row> {
        let fs = self.prof.size();
        let cs = coarse.prof.size();
        let cm = coarse.ctx().modulus();
        (0..self.dim())
            .map(|k| {
                let col = self.keep[k];
                let (g, mono) = (col / fs, col % fs);
                let exps = self.prof.exponents(mono);
                let mut v = vec![0u64; coarse.ngens * cs];
                if exps.iter().all(|&x| x < coarse.prof.trunc()) {
                    v[g * cs + coarse.prof.index(&exps)] = 1 % cm;
                }
                coarse.compress(v)
            })
            .collect()
    }
}

/// Homology module `Z / B` inside `C_i` of a finite model, with the retained actions.
struct FiniteHomology {
    ctx: PadicContext,
    dim: usize,
    z: Howell,
    b: Howell,
    /// Actions of `t_1 .. t_s` on `C_i`.
    actions: Vec<Vec<Row>>,
}

impl FiniteHomology {
    fn log_size(&self) -> u64 {
        self.z.log_size() - self.b.log_size()
    }

    /// Span over `Lambda_s` (monomials in the retained actions) of `v`.
    fn orbit(&self, v: &Row, prof: TruncationProfile) -> Vec<Row> {
        let mut out = Vec::with_capacity(prof.size());
        for mono in 0..prof.size() {
            let exps = prof.exponents(mono);
            let mut w = v.clone();
            for (j, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    w = mat_apply(&self.ctx, &w, &self.actions[j], self.dim);
                }
            }
            out.push(w);
        }
        out
    }

    /// Presentation over `Lambda_s` (`prof` has `s` variables).
    fn present(&self, prof: TruncationProfile) -> Result<ModulePresentation> {
        let ctx = self.ctx;
        let mut span = self.b.clone();
        let mut gens: Vec<Row> = Vec::new();
        for z in self.z.rows() {
            if span.contains(z) {
                continue;
            }
            let orbit = self.orbit(z, prof);
            span = span.extend(orbit);
            gens.push(z.clone());
            if span.contains_span(&self.z) {
                break;
            }
        }
        let size = prof.size();
        let mut stacked: Vec<Row> = Vec::with_capacity(gens.len() * size + self.b.rows().len());
        for g in &gens {
            stacked.extend(self.orbit(g, prof));
        }
        let head = stacked.len();
        stacked.extend(self.b.rows().iter().cloned());
        let ker = left_kernel(ctx, &stacked, self.dim);
        let k = gens.len();
        let to_row = |v: &[u64]| -> Vec<IwasawaElement> {
            (0..k)
                .map(|g| IwasawaElement::from_raw(prof, v[g * size..(g + 1) * size].to_vec(), prof.precision()))
                .collect()
        };
        // keep a Lambda_s-generating subset of the relations
        let mut chosen: Vec<Vec<IwasawaElement>> = Vec::new();
        let mut rel_span = Howell::zero(ctx, head);
        for r in ker.rows() {
            let v = &r[..head];
            if v.iter().all(|&x| x == 0) || rel_span.contains(v) {
                continue;
            }
            let row = to_row(v);
            let mut multiples = Vec::with_capacity(size);
            for mono in 0..size {
                let m = IwasawaElement::monomial(prof, &prof.exponents(mono), 1);
                let shifted: Vec<u64> = row.iter().flat_map(|e| e.mul(&m).coeffs().to_vec()).collect();
                multiples.push(shifted);
            }
            rel_span = rel_span.extend(multiples);
            chosen.push(row);
        }
        ModulePresentation::new(prof, k, chosen)
    }
}

fn finite_homology_level(
    coarse: &FiniteModel,
    fine: &FiniteModel,
    fine_z: &[Option<Howell>],
    coarse_b: &[Option<Howell>],
    s: usize,
) -> Vec<FiniteHomology> {
    let ctx = coarse.ctx();
    let n = coarse.dim();
    let k = coarse.prof.vars() - s;
    let proj = fine.projection_to(coarse);
    (0..=k)
        .map(|i| {
            let copies = subsets(k, i).len();
            let dim = copies * n;
            let fz = fine_z[i].as_ref().expect("fine cycles");
            let b = coarse_b[i].clone().expect("coarse boundaries");
            let mut gens: Vec<Row> = Vec::with_capacity(fz.rows().len() + b.rows().len());
            for r in fz.rows() {
                let mut v = Vec::with_capacity(dim);
                for c in 0..copies {
                    v.extend(mat_apply(&ctx, &r[c * fine.dim()..(c + 1) * fine.dim()], &proj, n));
                }
                gens.push(v);
            }
            gens.extend(b.rows().iter().cloned());
            let z = Howell::new(ctx, dim, gens);
            let actions = (0..s)
                .map(|j| {
                    let t = &coarse.actions[j];
                    let mut m = Vec::with_capacity(dim);
                    for c in 0..copies {
                        for row in t {
                            let mut v = vec![0u64; dim];
                            v[c * n..(c + 1) * n].copy_from_slice(row);
                            m.push(v);
                        }
                    }
                    m
                })
                .collect();
            FiniteHomology { ctx, dim, z, b, actions }
        })
        .collect()
}

fn koszul_finite(m: &ModulePresentation, s: usize) -> Result<Vec<ModulePresentation>> {
    let d = m.profile().vars();
    let levels: Vec<ModulePresentation> = (0..3).map(|k| m.refine(k)).collect::<Result<_>>()?;
    let models: Vec<FiniteModel> = levels.iter().map(FiniteModel::build).collect();
    let spaces: Vec<Vec<(Option<Howell>, Option<Howell>)>> = models
        .iter()
        .enumerate()
        .map(|(lvl, fm)| {
            let ops: Vec<&Vec<Row>> = fm.actions[s..d].iter().collect();
            koszul_spaces(fm.ctx(), fm.dim(), &fm.u, &ops, lvl >= 1, lvl <= 1)
        })
        .collect();
    let split = |lvl: usize| -> (Vec<Option<Howell>>, Vec<Option<Howell>>) {
        spaces[lvl].iter().cloned().unzip()
    };
    let (_, b0) = split(0);
    let (z1, b1) = split(1);
    let (z2, _) = split(2);
    let h0 = finite_homology_level(&models[0], &models[1], &z1, &b0, s);
    let h1 = finite_homology_level(&models[1], &models[2], &z2, &b1, s);
    let prof0 = m.profile().with_vars(s)?;
    let prof1 = levels[1].profile().with_vars(s)?;
    let mut out = Vec::with_capacity(h0.len());
    for (i, (a, b)) in h0.iter().zip(&h1).enumerate() {
        let pa = a.present(prof0)?;
        match s {
            0 => {
                let (la, lb) = (a.log_size(), b.log_size());
                if la != lb {
                    return Err(if lb > la {
                        Error::InfiniteCohomology(format!("H_{i} grows with precision ({la} -> {lb})"))
                    } else {
                        Error::PrecisionExhausted(format!("H_{i} unstable under refinement"))
                    });
                }
            }
            1 => {
                let pb = b.present(prof1)?;
                let stable = match (char_element(&pa), char_element(&pb)) {
                    (Ok(x), Ok(y)) => x.associate(&y)?,
                    (Err(Error::NotTorsion), Err(Error::NotTorsion)) => true,
                    _ => false,
                };
                if !stable {
                    return Err(Error::PrecisionExhausted(format!("H_{i} unstable under refinement")));
                }
            }
            _ => {
                // images of cycles from two levels up must already be stable
                let proj20 = {
                    let p21 = models[2].projection_to(&models[1]);
                    let p10 = models[1].projection_to(&models[0]);
                    let n0 = models[0].dim();
                    p21.iter().map(|r| mat_apply(&models[0].ctx(), r, &p10, n0)).collect::<Vec<Row>>()
                };
                let k = d - s;
                let copies = subsets(k, i).len();
                let n0 = models[0].dim();
                let n2 = models[2].dim();
                let ctx0 = models[0].ctx();
                let mut gens: Vec<Row> = Vec::new();
                for r in z2[i].as_ref().expect("cycles").rows() {
                    let mut v = Vec::with_capacity(copies * n0);
                    for c in 0..copies {
                        v.extend(mat_apply(&ctx0, &r[c * n2..(c + 1) * n2], &proj20, n0));
                    }
                    gens.push(v);
                }
                gens.extend(a.b.rows().iter().cloned());
                let deeper = Howell::new(ctx0, copies * n0, gens);
                if deeper.log_size() != a.z.log_size() {
                    return Err(Error::PrecisionExhausted(format!("H_{i} unstable under refinement")));
                }
            }
        }
        out.push(pa);
    }
    Ok(out)
}

/// Symbolic homology of a block with a two-term free resolution, if available.
fn koszul_symbolic(m: &ModulePresentation, s: usize) -> Result<Option<Vec<ModulePresentation>>> {
    let d = m.profile().vars();
    let k = d - s;
    let target = m.profile().with_vars(s)?;
    let c = m.ncols();
    let zeros = |count: usize| (0..count).map(|_| ModulePresentation::zero(target));
    if m.nrows() == 0 {
        let mut out = vec![ModulePresentation::free(target, c)];
        out.extend(zeros(k));
        return Ok(Some(out));
    }
    if !m.is_square() {
        return Ok(None);
    }
    let det = determinant(m.relations()).expect("nonempty");
    if det.is_zero() {
        return Ok(None);
    }
    let rbar = m.specialize(s)?;
    if k == 0 {
        return Ok(Some(vec![rbar]));
    }
    let h1 = if s == 0 {
        let d0 = determinant(rbar.relations()).expect("nonempty");
        match d0.constant_term().valuation() {
            Valuation::Exact(v) if v < d0.precision() => ModulePresentation::zero(target),
            _ => return Ok(None),
        }
    } else {
        let dbar = determinant(rbar.relations()).expect("nonempty");
        if !dbar.is_zero() {
            ModulePresentation::zero(target)
        } else if rbar.relations().iter().flatten().all(|e| e.is_zero()) {
            ModulePresentation::free(target, c)
        } else {
            return Ok(None);
        }
    };
    let mut out = vec![rbar, h1];
    out.extend(zeros(k - 1));
    Ok(Some(out))
}

/// `H_0, ..., H_{d-s}` of the Koszul complex on `gamma_{s+1} - 1, ..., gamma_d - 1`,
/// as presentations over `Lambda_s`.
pub fn koszul_homology(m: &ModulePresentation, s: usize) -> Result<Vec<ModulePresentation>> {
    koszul_homology_with(m, s, Route::Auto)
}

pub fn koszul_homology_with(m: &ModulePresentation, s: usize, route: Route) -> Result<Vec<ModulePresentation>> {
    let d = m.profile().vars();
    if s > d {
        return Err(Error::InvalidArgument(format!("subgroup index {s} exceeds {d} variables")));
    }
    let target = m.profile().with_vars(s)?;
    let k = d - s;
    let mut acc: Vec<ModulePresentation> = (0..=k).map(|_| ModulePresentation::zero(target)).collect();
    for (rows, cols) in m.blocks() {
        let block = m.sub_presentation(&rows, &cols);
        let parts = match route {
            Route::Auto => match koszul_symbolic(&block, s)? {
                Some(p) => p,
                None => koszul_finite(&block, s)?,
            },
            Route::Finite => koszul_finite(&block, s)?,
        };
        for (a, p) in acc.iter_mut().zip(parts) {
            *a = a.direct_sum(&p)?;
        }
    }
    Ok(acc)
}

/// `(M^{gamma_s}, M / (gamma_s - 1))` for the last variable `s = d`, over `Lambda_{s-1}`.
pub fn invariants_coinvariants(m: &ModulePresentation, s: usize) -> Result<(ModulePresentation, ModulePresentation)> {
    let d = m.profile().vars();
    if s == 0 || s != d {
        return Err(Error::InvalidArgument(format!("invariants are taken under the last generator (s = {d})")));
    }
    let mut h = koszul_homology(m, s - 1)?;
    let inv = h.pop().expect("two homology groups");
    let coinv = h.pop().expect("two homology groups");
    Ok((inv, coinv))
}

/// `log_p |H_i(G, M)|` for the full group.
pub fn full_homology_log_sizes(m: &ModulePresentation) -> Result<Vec<u64>> {
    koszul_homology(m, 0)?.iter().map(|h| h.finite_log_size()).collect()
}

/// A finite `Z/p^N`-module with commuting unipotent actions of `gamma_1, ..., gamma_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGModule {
    ctx: PadicContext,
    ngens: usize,
    relations: Vec<Row>,
    /// `x -> x A_i` on row vectors.
    actions: Vec<Vec<Row>>,
}

impl FiniteGModule {
    pub fn new(ctx: PadicContext, ngens: usize, relations: Vec<Row>, actions: Vec<Vec<Row>>) -> Result<Self> {
        let m = ctx.modulus();
        let bad = |r: &Row| r.len() != ngens || r.iter().any(|&x| x >= m);
        if relations.iter().any(bad) {
            return Err(Error::InvalidArgument("relation rows must have one reduced entry per generator".into()));
        }
        for a in &actions {
            if a.len() != ngens || a.iter().any(bad) {
                return Err(Error::InvalidArgument("action matrices must be square over Z/p^N".into()));
            }
        }
        let out = Self { ctx, ngens, relations, actions };
        let u = out.relation_span();
        for a in &out.actions {
            if !u.rows().iter().all(|r| u.contains(&mat_apply(&ctx, r, a, ngens))) {
                return Err(Error::InvalidArgument("action does not preserve the relations".into()));
            }
            // A - I nilpotent on X: its length bounds the nilpotency index
            let len = ngens as u64 * ctx.precision() as u64 - u.log_size();
            for b in 0..ngens {
                let mut v = vec![0u64; ngens];
                v[b] = 1;
                for _ in 0..len {
                    let w = mat_apply(&ctx, &v, a, ngens);
                    v = w.iter().zip(&v).map(|(x, y)| ctx.sub(*x, *y)).collect();
                }
                if !u.contains(&v) {
                    return Err(Error::InvalidArgument("action is not unipotent on the module".into()));
                }
            }
        }
        Ok(out)
    }

    /// `(Z/p^N)^ngens / relations` with trivial action of `d` generators.
    pub fn trivial(ctx: PadicContext, ngens: usize, relations: Vec<Row>, d: usize) -> Result<Self> {
        let id: Vec<Row> = (0..ngens)
            .map(|i| {
                let mut v = vec![0u64; ngens];
                v[i] = 1;
                v
            })
            .collect();
        Self::new(ctx, ngens, relations, vec![id; d])
    }

    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn relations(&self) -> &[Row] {
        &self.relations
    }

    pub fn actions(&self) -> &[Vec<Row>] {
        &self.actions
    }

    pub fn vars(&self) -> usize {
        self.actions.len()
    }

    fn relation_span(&self) -> Howell {
        Howell::new(self.ctx, self.ngens, self.relations.clone())
    }

    pub fn log_size(&self) -> u64 {
        self.ngens as u64 * self.ctx.precision() as u64 - self.relation_span().log_size()
    }

    /// `log_p |H^i(G, M)|` for `i = 0..=d`, from the Koszul complex of `A_i - I`.
    pub fn cohomology_sizes(&self) -> Result<Vec<u64>> {
        let ctx = self.ctx;
        let n = self.ngens;
        let u = self.relation_span();
        for i in 0..self.actions.len() {
            for j in i + 1..self.actions.len() {
                for b in 0..n {
                    let mut v = vec![0u64; n];
                    v[b] = 1;
                    let ij = mat_apply(&ctx, &mat_apply(&ctx, &v, &self.actions[i], n), &self.actions[j], n);
                    let ji = mat_apply(&ctx, &mat_apply(&ctx, &v, &self.actions[j], n), &self.actions[i], n);
                    let diff: Row = ij.iter().zip(&ji).map(|(x, y)| ctx.sub(*x, *y)).collect();
                    if !u.contains(&diff) {
                        return Err(Error::NonCommutingAction);
                    }
                }
            }
        }
        let ops: Vec<Vec<Row>> = self
            .actions
            .iter()
            .map(|a| {
                a.iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let mut r = r.clone();
                        r[i] = ctx.sub(r[i], 1);
                        r
                    })
                    .collect()
            })
            .collect();
        let refs: Vec<&Vec<Row>> = ops.iter().collect();
        let spaces = koszul_spaces(ctx, n, u.rows(), &refs, true, true);
        // Koszul self-duality: H^i = H_{d-i}
        let mut sizes: Vec<u64> = spaces
            .iter()
            .map(|(z, b)| z.as_ref().expect("cycles").log_size() - b.as_ref().expect("boundaries").log_size())
            .collect();
        sizes.reverse();
        Ok(sizes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof(p: u64, n: u32, d: usize, m: usize) -> TruncationProfile {
        TruncationProfile::new(PadicContext::new(p, n).unwrap(), d, m).unwrap()
    }

    fn t(pr: TruncationProfile, i: usize) -> IwasawaElement {
        IwasawaElement::var(pr, i)
    }

    fn c(pr: TruncationProfile, v: i128) -> IwasawaElement {
        IwasawaElement::constant(pr, v)
    }

    #[test]
    fn restrict_scalars_examples() {
        let pr = prof(3, 4, 2, 2);
        let free = ModulePresentation::free(pr, 1).restrict_scalars(1).unwrap();
        assert_eq!((free.ncols(), free.nrows()), (2, 0));
        let zero = ModulePresentation::zero(pr).restrict_scalars(1).unwrap();
        assert_eq!(zero.ncols(), 0);
        let m = ModulePresentation::principal(&t(pr, 1)).restrict_scalars(1).unwrap();
        // basis {1, t_2}: t_2 * 1 = t_2 kills the second generator, t_2 * t_2 = 0
        assert_eq!(m.ncols(), 2);
        let p1 = pr.with_vars(1).unwrap();
        assert_eq!(m.relations(), &[vec![IwasawaElement::zero(p1), IwasawaElement::one(p1)]]);
    }

    #[test]
    fn invariants_coinvariants_examples() {
        let pr = prof(3, 4, 2, 4);
        let p1 = pr.with_vars(1).unwrap();
        let m = ModulePresentation::principal(&t(pr, 1));
        let (inv, coinv) = invariants_coinvariants(&m, 2).unwrap();
        assert_eq!(inv, ModulePresentation::free(p1, 1));
        assert_eq!(coinv.ncols(), 1);
        assert!(coinv.relations().iter().flatten().all(|e| e.is_zero()));

        let (inv, coinv) = invariants_coinvariants(&ModulePresentation::free(pr, 1), 2).unwrap();
        assert_eq!(inv.ncols(), 0);
        assert_eq!(coinv, ModulePresentation::free(p1, 1));

        let m = ModulePresentation::principal(&t(pr, 1).sub(&c(pr, 3)));
        let (inv, coinv) = invariants_coinvariants(&m, 2).unwrap();
        assert_eq!(inv.ncols(), 0);
        assert!(char_element(&coinv).unwrap().associate(&CharElement::p_power(p1, 1)).unwrap());
    }

    #[test]
    fn koszul_examples_both_routes() {
        let pr = prof(3, 4, 2, 4);
        let p1 = pr.with_vars(1).unwrap();
        let p_el = CharElement::p_power(p1, 1);
        for route in [Route::Auto, Route::Finite] {
            let h = koszul_homology_with(&ModulePresentation::free(pr, 1), 1, route).unwrap();
            assert_eq!(h.len(), 2);
            assert!(matches!(char_element(&h[0]), Err(Error::NotTorsion)));
            assert_eq!(h[1].ncols(), 0, "{route:?}");

            let m = ModulePresentation::principal(&t(pr, 1).sub(&c(pr, 3)));
            let h = koszul_homology_with(&m, 1, route).unwrap();
            assert!(char_element(&h[0]).unwrap().associate(&p_el).unwrap(), "{route:?}");
            assert_eq!(h[1].ncols(), 0, "{route:?}");
        }
        let m = ModulePresentation::cyclic(pr, &[c(pr, 3), t(pr, 1)]).unwrap();
        let h = koszul_homology(&m, 1).unwrap();
        assert!(char_element(&h[0]).unwrap().associate(&p_el).unwrap());
        assert!(char_element(&h[1]).unwrap().associate(&p_el).unwrap());
    }

    #[test]
    fn full_group_sizes() {
        let pr = prof(5, 4, 1, 6);
        let m = ModulePresentation::principal(&c(pr, 5).sub(&t(pr, 0)));
        assert_eq!(full_homology_log_sizes(&m).unwrap(), vec![1, 0]);
        let sizes = koszul_homology_with(&m, 0, Route::Finite).unwrap();
        assert_eq!(sizes.iter().map(|h| h.finite_log_size().unwrap()).collect::<Vec<_>>(), vec![1, 0]);
        let m = ModulePresentation::principal(&t(pr, 0));
        assert!(matches!(full_homology_log_sizes(&m), Err(Error::InfiniteCohomology(_))));
        let pr2 = prof(5, 4, 2, 4);
        let m = ModulePresentation::cyclic(pr2, &[t(pr2, 1).sub(&c(pr2, 5)), t(pr2, 0).sub(&c(pr2, 5))]).unwrap();
        assert_eq!(full_homology_log_sizes(&m).unwrap(), vec![1, 1, 0]);
    }

    #[test]
    fn cohomology_size_examples() {
        let ctx = PadicContext::new(3, 3).unwrap();
        let m = FiniteGModule::trivial(ctx, 1, vec![vec![3]], 2).unwrap();
        assert_eq!(m.cohomology_sizes().unwrap(), vec![1, 2, 1]);
        let ctx2 = PadicContext::new(3, 2).unwrap();
        let m = FiniteGModule::new(ctx2, 1, vec![], vec![vec![vec![4]]]).unwrap();
        assert_eq!(m.cohomology_sizes().unwrap(), vec![1, 1]);
        let m = FiniteGModule::trivial(ctx, 0, vec![], 3).unwrap();
        assert_eq!(m.cohomology_sizes().unwrap(), vec![0, 0, 0, 0]);
        let two = FiniteGModule::new(
            ctx,
            2,
            vec![vec![3, 0], vec![0, 3]],
            vec![vec![vec![1, 1], vec![0, 1]], vec![vec![1, 0], vec![1, 1]]],
        )
        .unwrap();
        assert_eq!(two.cohomology_sizes(), Err(Error::NonCommutingAction));
    }

    #[test]
    fn char_element_examples() {
        let pr = prof(5, 5, 1, 8);
        let f = IwasawaElement::from_coeffs(pr, &[5, 10, 1]);
        let ch = char_element(&ModulePresentation::principal(&f)).unwrap();
        let w = f.weierstrass_prepare().unwrap();
        assert_eq!((ch.mu(), ch.lambda()), (w.mu, w.lambda));
        assert_eq!(ch.part(), &w.poly);
        let g = IwasawaElement::from_coeffs(pr, &[25, 1]);
        let sum = ModulePresentation::principal(&f).direct_sum(&ModulePresentation::principal(&g)).unwrap();
        let expect = CharElement::from_element(&f.mul(&g)).unwrap();
        assert!(char_element(&sum).unwrap().associate(&expect).unwrap());
        assert!(matches!(char_element(&ModulePresentation::free(pr, 1)), Err(Error::NotTorsion)));
        let p = char_element(&ModulePresentation::principal(&c(pr, 5))).unwrap();
        assert_eq!((p.mu(), p.lambda()), (1, 0));
    }

    #[test]
    fn gcd_of_coprime_and_shared_factors() {
        let pr = prof(3, 6, 1, 10);
        let a = IwasawaElement::from_coeffs(pr, &[-3, 1]);
        let b = IwasawaElement::from_coeffs(pr, &[3, 1]);
        let q = IwasawaElement::from_coeffs(pr, &[6, 0, 1]);
        let ca = CharElement::from_element(&a.mul(&q)).unwrap();
        let cb = CharElement::from_element(&b.mul(&q)).unwrap();
        let g = ca.gcd(&cb).unwrap();
        assert!(g.associate(&CharElement::from_element(&q).unwrap()).unwrap());
        let coprime = CharElement::from_element(&a).unwrap().gcd(&CharElement::from_element(&b).unwrap()).unwrap();
        assert!(coprime.is_trivial());
    }

    #[test]
    fn two_by_two_minors() {
        let pr = prof(3, 5, 1, 8);
        let m = ModulePresentation::new(
            pr,
            2,
            vec![
                vec![IwasawaElement::from_coeffs(pr, &[3, 1]), IwasawaElement::from_coeffs(pr, &[1])],
                vec![IwasawaElement::from_coeffs(pr, &[0, 0, 1]), IwasawaElement::from_coeffs(pr, &[9, 1])],
            ],
        )
        .unwrap();
        let det = determinant(m.relations()).unwrap();
        let expect = CharElement::from_element(&det).unwrap();
        assert!(char_element(&m).unwrap().associate(&expect).unwrap());
    }
}
