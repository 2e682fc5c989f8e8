//! Exact linear algebra over `Z/p^N`.
//!
//! Spans are represented in Howell form: an echelon basis whose pivots are
//! powers of `p`, closed under the "annihilator shift" `p^(N-v) * row`, so that
//! membership is decided by straight reduction. All vectors are row vectors.

use crate::padic::PadicContext;

pub type Row = Vec<u64>;

/// A submodule of `(Z/p^N)^ncols` in Howell form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Howell {
    ctx: PadicContext,
    ncols: usize,
    rows: Vec<Row>,
    /// `(pivot column, valuation of pivot)` per row.
    pivots: Vec<(usize, u32)>,
}

#[inline]
fn axpy(ctx: &PadicContext, dst: &mut [u64], factor: u64, src: &[u64], from: usize) {
    if factor == 0 {
        return;
    }
    let m = ctx.modulus();
    let neg = ctx.neg(factor) as u128;
    for (d, s) in dst[from..].iter_mut().zip(&src[from..]) {
        if *s != 0 {
            *d = ((*d as u128 + neg * *s as u128) % m as u128) as u64;
        }
    }
}

impl Howell {
    pub fn new(ctx: PadicContext, ncols: usize, generators: Vec<Row>) -> Self {
        let n = ctx.precision();
        let mut pool: Vec<Row> = generators
            .into_iter()
            .filter(|r| r.iter().any(|&x| x != 0))
            .collect();
        let mut rows = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..ncols {
            if pool.is_empty() {
                break;
            }
            let mut best: Option<(usize, u32)> = None;
            for (i, r) in pool.iter().enumerate() {
                if r[col] != 0 {
                    let v = ctx.val(r[col]);
                    if best.map_or(true, |(_, bv)| v < bv) {
                        best = Some((i, v));
                        if v == 0 {
                            break;
                        }
                    }
                }
            }
            let Some((idx, v)) = best else { continue };
            let mut piv = pool.swap_remove(idx);
            let pv = ctx.pow(v);
            let unit = piv[col] / pv;
            let inv = ctx.inv(unit).expect("unit part");
            for x in piv[col..].iter_mut() {
                *x = ctx.mul(*x, inv);
            }
            debug_assert_eq!(piv[col], pv);
            for r in pool.iter_mut() {
                if r[col] != 0 {
                    let f = r[col] / pv;
                    axpy(&ctx, r, f, &piv, col);
                    debug_assert_eq!(r[col], 0);
                }
            }
            pool.retain(|r| r.iter().any(|&x| x != 0));
            if v > 0 {
                let shift = ctx.pow(n - v);
                let extra: Row = piv.iter().map(|&x| ctx.mul(x, shift)).collect();
                if extra.iter().any(|&x| x != 0) {
                    pool.push(extra);
                }
            }
            rows.push(piv);
            pivots.push((col, v));
        }
        debug_assert!(pool.is_empty());
        let mut h = Self { ctx, ncols, rows, pivots };
        h.back_reduce();
        h
    }

    fn back_reduce(&mut self) {
        for i in 0..self.rows.len() {
            let (col, v) = self.pivots[i];
            let pv = self.ctx.pow(v);
            let (head, tail) = self.rows.split_at_mut(i);
            let piv = &tail[0];
            for r in head.iter_mut() {
                let f = r[col] / pv;
                if f != 0 {
                    axpy(&self.ctx, r, f, piv, col);
                }
            }
        }
    }

    pub fn zero(ctx: PadicContext, ncols: usize) -> Self {
        Self { ctx, ncols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn pivots(&self) -> &[(usize, u32)] {
        &self.pivots
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// `log_p` of the number of elements of the span.
    pub fn log_size(&self) -> u64 {
        let n = self.ctx.precision();
        self.pivots.iter().map(|&(_, v)| (n - v) as u64).sum()
    }

    /// Reduces `v` in place against the basis; returns true if it reached zero.
    pub fn reduce(&self, v: &mut [u64]) -> bool {
        for (r, &(col, val)) in self.rows.iter().zip(&self.pivots) {
            if v[col] == 0 {
                continue;
            }
            let pv = self.ctx.pow(val);
            if v[col] % pv != 0 {
                return false;
            }
            let f = v[col] / pv;
            axpy(&self.ctx, v, f, r, col);
        }
        v.iter().all(|&x| x == 0)
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w)
    }

    pub fn contains_span(&self, other: &Howell) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    /// Span of `self` together with extra generators.
    pub fn extend(&self, extra: impl IntoIterator<Item = Row>) -> Howell {
        let mut gens = self.rows.clone();
        gens.extend(extra);
        Howell::new(self.ctx, self.ncols, gens)
    }
}

/// Basis of the left kernel `{x : x A = 0}` of the matrix whose rows are `a`.
pub fn left_kernel(ctx: PadicContext, a: &[Row], ncols: usize) -> Howell {
    let n = a.len();
    let aug: Vec<Row> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = Vec::with_capacity(ncols + n);
            v.extend_from_slice(r);
            v.resize(ncols + n, 0);
            v[ncols + i] = 1;
            v
        })
        .collect();
    let h = Howell::new(ctx, ncols + n, aug);
    let kernel_rows: Vec<Row> = h
        .rows
        .iter()
        .zip(&h.pivots)
        .filter(|(_, &(c, _))| c >= ncols)
        .map(|(r, _)| r[ncols..].to_vec())
        .collect();
    Howell::new(ctx, n, kernel_rows)
}

/// A solution `x` of `x A = b`, if one exists.
pub fn solve_left(ctx: PadicContext, a: &[Row], ncols: usize, b: &[u64]) -> Option<Row> {
    let n = a.len();
    let aug: Vec<Row> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = Vec::with_capacity(ncols + n);
            v.extend_from_slice(r);
            v.resize(ncols + n, 0);
            v[ncols + i] = 1;
            v
        })
        .collect();
    let h = Howell::new(ctx, ncols + n, aug);
    let mut v = b.to_vec();
    v.resize(ncols + n, 0);
    for (r, &(col, val)) in h.rows.iter().zip(&h.pivots) {
        if col >= ncols {
            break;
        }
        if v[col] == 0 {
            continue;
        }
        let pv = ctx.pow(val);
        if v[col] % pv != 0 {
            return None;
        }
        let f = v[col] / pv;
        axpy(&ctx, &mut v, f, r, col);
    }
    if v[..ncols].iter().any(|&x| x != 0) {
        return None;
    }
    Some(v[ncols..].iter().map(|&x| ctx.neg(x)).collect())
}

/// Row vector times matrix.
pub fn vec_mat(ctx: &PadicContext, x: &[u64], a: &[Row], ncols: usize) -> Row {
    let mut out = vec![0u64; ncols];
    for (xi, r) in x.iter().zip(a) {
        if *xi != 0 {
            axpy(ctx, &mut out, ctx.neg(*xi), r, 0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> PadicContext {
        PadicContext::new(3, 4).unwrap()
    }

    /// Brute-force span of a few generators in a tiny module.
    fn brute_span(ctx: PadicContext, gens: &[Row], ncols: usize) -> std::collections::BTreeSet<Row> {
        let mut set = std::collections::BTreeSet::new();
        set.insert(vec![0; ncols]);
        loop {
            let mut next = set.clone();
            for v in &set {
                for g in gens {
                    let w: Row = v.iter().zip(g).map(|(a, b)| ctx.add(*a, *b)).collect();
                    next.insert(w);
                }
            }
            if next.len() == set.len() {
                return set;
            }
            set = next;
        }
    }

    #[test]
    fn howell_size_matches_brute_force() {
        let c = PadicContext::new(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let gens: Vec<Row> = (0..2).map(|_| (0..2).map(|_| rng.gen_range(0..8)).collect()).collect();
            let h = Howell::new(c, 2, gens.clone());
            let brute = brute_span(c, &gens, 2);
            assert_eq!(1u64 << h.log_size(), brute.len() as u64);
            for v in &brute {
                assert!(h.contains(v));
            }
        }
    }

    #[test]
    fn membership_needs_shift_rows() {
        // span of (2, 1) over Z/8 contains (0, 4) = 4 * (2, 1).
        let c = PadicContext::new(2, 3).unwrap();
        let h = Howell::new(c, 2, vec![vec![2, 1]]);
        assert!(h.contains(&[0, 4]));
        assert!(!h.contains(&[0, 2]));
        assert_eq!(h.log_size(), 3);
    }

    #[test]
    fn kernel_of_multiplication_by_p() {
        let c = ctx();
        let k = left_kernel(c, &[vec![3]], 1);
        assert_eq!(k.log_size(), 1);
        assert!(k.contains(&[27]));
    }

    proptest! {
        #[test]
        fn solve_left_recovers_a_solution(seed in 0u64..500) {
            let c = ctx();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<Row> = (0..3).map(|_| (0..4).map(|_| rng.gen_range(0..81)).collect()).collect();
            let x: Row = (0..3).map(|_| rng.gen_range(0..81)).collect();
            let b = vec_mat(&c, &x, &a, 4);
            let y = solve_left(c, &a, 4, &b).expect("b is in the row span");
            prop_assert_eq!(vec_mat(&c, &y, &a, 4), b);
        }

        #[test]
        fn kernel_vectors_annihilate(seed in 0u64..500) {
            let c = ctx();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<Row> = (0..4).map(|_| (0..3).map(|_| 3 * rng.gen_range(0..27)).collect()).collect();
            let k = left_kernel(c, &a, 3);
            for r in k.rows() {
                prop_assert!(vec_mat(&c, r, &a, 3).iter().all(|&x| x == 0));
            }
            // |ker| * |im| = |domain|
            let im = Howell::new(c, 3, a.clone());
            prop_assert_eq!(k.log_size() + im.log_size(), 4 * 4);
        }
    }
}
