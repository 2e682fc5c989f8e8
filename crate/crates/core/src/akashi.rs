//! Akashi series, Euler characteristics and the two structural identities
//! relating them to characteristic elements.

use std::fmt;

use crate::error::{Error, Result};
use crate::module::{
    char_element, full_homology_log_sizes, invariants_coinvariants, koszul_homology_with, CharElement,
    FiniteGModule, ModulePresentation, Route,
};

/// `p^exponent` with a signed exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EulerCharacteristic {
    pub p: u64,
    pub exponent: i64,
}

impl EulerCharacteristic {
    pub fn new(p: u64, exponent: i64) -> Self {
        Self { p, exponent }
    }

    pub fn one(p: u64) -> Self {
        Self::new(p, 0)
    }

    /// The value as a reduced fraction `(numerator, denominator)`, if it fits.
    pub fn as_fraction(&self) -> Option<(u128, u128)> {
        let v = (self.p as u128).checked_pow(self.exponent.unsigned_abs() as u32)?;
        Some(if self.exponent >= 0 { (v, 1) } else { (1, v) })
    }
}

impl fmt::Display for EulerCharacteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.exponent)
    }
}

/// `prod_i ch(H_i(H, M))^{(-1)^i}` kept as a fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AkashiSeries {
    pub numerator: CharElement,
    pub denominator: CharElement,
    /// `ch(H_i)` for `i = 0, 1, ...`.
    pub factors: Vec<CharElement>,
}

impl AkashiSeries {
    /// `num / den ~ target`, tested as `num ~ target * den`.
    pub fn associate_to(&self, target: &CharElement) -> Result<bool> {
        self.numerator.associate(&target.mul(&self.denominator)?)
    }

    pub fn associate(&self, other: &AkashiSeries) -> Result<bool> {
        self.numerator.mul(&other.denominator)?.associate(&other.numerator.mul(&self.denominator)?)
    }

    pub fn mul(&self, other: &AkashiSeries) -> Result<AkashiSeries> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(AkashiSeries {
            numerator: self.numerator.mul(&other.numerator)?,
            denominator: self.denominator.mul(&other.denominator)?,
            factors,
        })
    }
}

impl fmt::Display for AkashiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / [{}]", self.numerator, self.denominator)
    }
}

/// Akashi series of `M` over `Lambda_d` for `H = <gamma_2, ..., gamma_d>`.
pub fn akashi_series(m: &ModulePresentation) -> Result<AkashiSeries> {
    akashi_series_with(m, Route::Auto)
}

pub fn akashi_series_with(m: &ModulePresentation, route: Route) -> Result<AkashiSeries> {
    let prof = m.profile();
    if prof.vars() == 0 {
        return Err(Error::InvalidArgument("Akashi series needs at least one variable".into()));
    }
    let homology = koszul_homology_with(m, 1, route)?;
    let p1 = prof.with_vars(1)?;
    let mut numerator = CharElement::one(p1);
    let mut denominator = CharElement::one(p1);
    let mut factors = Vec::with_capacity(homology.len());
    for (i, h) in homology.iter().enumerate() {
        let ch = match char_element(h) {
            Ok(c) => c,
            Err(Error::NotTorsion) => {
                return Err(Error::NotInMH(format!("H_{i} is not torsion over Lambda_1")));
            }
            Err(e) => return Err(e),
        };
        if i % 2 == 0 {
            numerator = numerator.mul(&ch)?;
        } else {
            denominator = denominator.mul(&ch)?;
        }
        factors.push(ch);
    }
    Ok(AkashiSeries { numerator, denominator, factors })
}

/// `prod_{i >= n} |H^i(G, M)|^{(-1)^i}`.
pub fn euler_characteristic(m: &FiniteGModule, n: usize) -> Result<EulerCharacteristic> {
    let sizes = m.cohomology_sizes()?;
    Ok(EulerCharacteristic::new(m.context().p(), alternating(&sizes, n)))
}

fn alternating(sizes: &[u64], from: usize) -> i64 {
    sizes
        .iter()
        .enumerate()
        .skip(from)
        .map(|(i, &s)| if i % 2 == 0 { s as i64 } else { -(s as i64) })
        .sum()
}

/// `prod_i |H_i(G, S)|^{(-1)^i}` from the full-group Koszul homology of `S`.
pub fn dual_selmer_euler_characteristic(s: &ModulePresentation) -> Result<EulerCharacteristic> {
    let sizes = full_homology_log_sizes(s)?;
    Ok(EulerCharacteristic::new(s.profile().p(), alternating(&sizes, 0)))
}

/// `|pi(f)|_p^{-1}` for a fraction `f = num / den` over `Lambda_1`.
pub fn euler_from_akashi(f: &AkashiSeries) -> Result<EulerCharacteristic> {
    let a = f.numerator.augmentation_valuation()? as i64;
    let b = f.denominator.augmentation_valuation()? as i64;
    Ok(EulerCharacteristic::new(f.numerator.profile().p(), a - b))
}

/// Both sides of `Ch(M^{gamma_s}) pi(Ch(M)) = Ch(M / (gamma_s - 1))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BblReport {
    pub lhs: CharElement,
    pub rhs: CharElement,
    pub holds: bool,
    pub precision: u32,
}

impl fmt::Display for BblReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lhs={} rhs={} {} prec={}",
            self.lhs,
            self.rhs,
            if self.holds { "pass" } else { "FAIL" },
            self.precision
        )
    }
}

/// Checks the invariants/coinvariants identity for `M` over `Lambda_s`, `s >= 2`.
///
/// `known_ch` is used when `Ch(M)` cannot be computed from the presentation.
pub fn verify_bbl(m: &ModulePresentation, s: usize, known_ch: Option<&CharElement>) -> Result<BblReport> {
    if s < 2 || m.profile().vars() != s {
        return Err(Error::InvalidArgument(format!("identity needs a module over Lambda_s with s >= 2 (got s = {s})")));
    }
    let ch = match (char_element(m), known_ch) {
        (Ok(c), _) => c,
        (Err(Error::NotComputable(_)), Some(k)) => k.clone(),
        (Err(Error::NotComputable(_)), None) => return Err(Error::MissingCh),
        (Err(e), _) => return Err(e),
    };
    let (inv, coinv) = invariants_coinvariants(m, s)?;
    let lhs = char_element(&inv)?.mul(&ch.project(s - 1)?)?;
    let rhs = char_element(&coinv)?;
    let holds = lhs.associate(&rhs)?;
    let precision = lhs.canonical_precision().min(rhs.canonical_precision());
    Ok(BblReport { lhs, rhs, holds, precision })
}

/// Akashi series against `pi^d_1(ch(M))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionReport {
    pub akashi: AkashiSeries,
    pub projected: CharElement,
    pub holds: bool,
    pub precision: u32,
}

impl fmt::Display for ProjectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "akashi={} projected={} {} prec={}",
            self.akashi,
            self.projected,
            if self.holds { "pass" } else { "FAIL" },
            self.precision
        )
    }
}

pub fn verify_akashi_projection(m: &ModulePresentation, known_ch: Option<&CharElement>) -> Result<ProjectionReport> {
    verify_akashi_projection_with(m, known_ch, Route::Auto)
}

pub fn verify_akashi_projection_with(
    m: &ModulePresentation,
    known_ch: Option<&CharElement>,
    route: Route,
) -> Result<ProjectionReport> {
    let ch = match (char_element(m), known_ch) {
        (Ok(c), _) => c,
        (Err(Error::NotComputable(_)), Some(k)) => k.clone(),
        (Err(Error::NotComputable(_)), None) => return Err(Error::MissingCh),
        (Err(e), _) => return Err(e),
    };
    let akashi = akashi_series_with(m, route)?;
    let projected = ch.project(1)?;
    let holds = akashi.associate_to(&projected)?;
    let precision = akashi
        .numerator
        .canonical_precision()
        .min(akashi.denominator.canonical_precision())
        .min(projected.canonical_precision());
    Ok(ProjectionReport { akashi, projected, holds, precision })
}
