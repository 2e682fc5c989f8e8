//! Independent oracles for derived constants used elsewhere in the suite.

use iwasawa_core::lfun::{enumerate_places, FiniteField, Place, TwistMatrix};
use iwasawa_core::padic::PadicContext;

/// Affine points plus the point at infinity, by exhaustive search.
fn count_points(p: i64, a: i64, b: i64) -> i64 {
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            if (y * y - (x * x * x + a * x + b)).rem_euclid(p) == 0 {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn trace_minus_three_occurs_over_f5() {
    // a = q + 1 - #E(F_q); some smooth curve over F_5 has 9 points
    let found = (0..5i64).flat_map(|a| (0..5i64).map(move |b| (a, b))).any(|(a, b)| {
        let disc = (4 * a * a * a + 27 * b * b).rem_euclid(5);
        disc != 0 && count_points(5, a, b) == 9
    });
    assert!(found);
}

#[test]
fn unit_root_by_exhaustion() {
    // roots of x^2 + 3x + 5 modulo 25 that are units
    let roots: Vec<i64> = (0..25).filter(|x| (x * x + 3 * x + 5) % 25 == 0 && x % 5 != 0).collect();
    assert_eq!(roots, vec![7]);
    let twist = TwistMatrix::from_trace(PadicContext::new(5, 2).unwrap(), -3, 5).unwrap();
    assert_eq!(twist.entries()[0][0], roots[0] as u64);

    // to higher precision, the residue must be the unique unit root mod 5^4
    let ctx = PadicContext::new(5, 4).unwrap();
    let alpha = TwistMatrix::from_trace(ctx, -3, 5).unwrap().entries()[0][0] as i64;
    assert_eq!((alpha * alpha + 3 * alpha + 5).rem_euclid(625), 0);
    let count = (0..625).filter(|x: &i64| (x * x + 3 * x + 5) % 625 == 0 && x % 5 != 0).count();
    assert_eq!(count, 1);
}

#[test]
fn place_counts_match_moebius_formula() {
    fn mobius(n: u64) -> i64 {
        let mut n = n;
        let mut k = 0;
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                n /= d;
                if n % d == 0 {
                    return 0;
                }
                k += 1;
            }
            d += 1;
        }
        if n > 1 {
            k += 1;
        }
        if k % 2 == 0 {
            1
        } else {
            -1
        }
    }
    for (q, dmax) in [(2u64, 8u32), (3, 6), (4, 4), (5, 4), (9, 3)] {
        let t = enumerate_places(q, dmax).unwrap();
        for n in 1..=dmax as u64 {
            let expected: i64 =
                (1..=n).filter(|d| n % d == 0).map(|d| mobius(n / d) * (q as i64).pow(d as u32)).sum::<i64>() / n as i64;
            assert_eq!(t.counts()[n as usize - 1] as i64, expected, "q = {q}, n = {n}");
        }
    }
}

#[test]
fn enumerated_places_have_no_roots_or_factors() {
    let field = FiniteField::new(9).unwrap();
    let t = enumerate_places(9, 2).unwrap();
    for pl in &t.places {
        if let Place::Finite(c) = pl {
            if c.len() == 3 {
                // a monic quadratic is irreducible iff it has no root
                let has_root = (0..9u32).any(|x| {
                    let x2 = field.mul(x, x);
                    field.add(field.add(x2, field.mul(c[1], x)), c[0]) == 0
                });
                assert!(!has_root, "{pl}");
            }
        }
    }
}
