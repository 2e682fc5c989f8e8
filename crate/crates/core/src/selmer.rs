//! Evaluation of the Selmer Euler characteristic formula from supplied global
//! and local invariants. Every order is a power of `p` and is stored as its
//! exponent.

use std::fmt;

use crate::akashi::{dual_selmer_euler_characteristic, EulerCharacteristic};
use crate::error::{Error, Result};
use crate::lfun::euler_char_prediction;
use crate::module::ModulePresentation;
use crate::ring::IwasawaElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalClass {
    Ramified,
    InertBad,
    SplitOrGood,
}

impl LocalClass {
    pub fn name(&self) -> &'static str {
        match self {
            LocalClass::Ramified => "ramified",
            LocalClass::InertBad => "inert-bad",
            LocalClass::SplitOrGood => "split-or-good",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ramified" => Ok(LocalClass::Ramified),
            "inert-bad" => Ok(LocalClass::InertBad),
            "split-or-good" => Ok(LocalClass::SplitOrGood),
            other => Err(Error::MalformedLocal(format!("unknown class '{other}'"))),
        }
    }
}

/// Local invariants at one place of `S`, as `p`-exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalDatum {
    pub place: String,
    pub class: LocalClass,
    /// `|H^1(G_v, A(K_w))[p^inf]|`
    pub h1: Option<i64>,
    /// `|H^0-hat(G_v, A^t(K_w))[p^inf]|`
    pub hat0_dual: Option<i64>,
    /// `|H^2(G_v, A(K_w))[p^inf]|`
    pub h2: Option<i64>,
    /// `p`-part of the component group of the Neron model.
    pub nu: Option<i64>,
}

impl LocalDatum {
    pub fn split_or_good(place: &str) -> Self {
        Self { place: place.into(), class: LocalClass::SplitOrGood, h1: None, hat0_dual: None, h2: None, nu: None }
    }

    pub fn inert_bad(place: &str, nu: i64) -> Self {
        Self { nu: Some(nu), class: LocalClass::InertBad, ..Self::split_or_good(place) }
    }

    pub fn ramified(place: &str, h1: Option<i64>, hat0_dual: Option<i64>, h2: Option<i64>) -> Self {
        Self { h1, hat0_dual, h2, class: LocalClass::Ramified, ..Self::split_or_good(place) }
    }

    /// Fields must match the class; orders are `p`-powers, so exponents are `>= 0`.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::MalformedLocal(format!("place {}: {what}", self.place)));
        let present = [("h1", self.h1), ("hat0_dual", self.hat0_dual), ("h2", self.h2), ("nu", self.nu)];
        if let Some((name, _)) = present.iter().find(|(_, v)| v.is_some_and(|e| e < 0)) {
            return bad(&format!("{name} must be the order of a group"));
        }
        match self.class {
            LocalClass::Ramified => {
                if self.nu.is_some() {
                    return bad("nu is only meaningful at inert bad places");
                }
                if self.h1.is_none() && self.hat0_dual.is_none() {
                    return bad("a ramified place needs h1 or hat0_dual");
                }
            }
            LocalClass::InertBad => {
                if self.nu.is_none() {
                    return bad("an inert bad place needs nu");
                }
                if self.h1.is_some() || self.hat0_dual.is_some() || self.h2.is_some() {
                    return bad("an inert bad place takes only nu");
                }
            }
            LocalClass::SplitOrGood => {
                if present.iter().any(|(_, v)| v.is_some()) {
                    return bad("a split or good place takes no local orders");
                }
            }
        }
        Ok(())
    }
}

/// `|H^1(G_v, A(K_w))| = |H^0-hat(G_v, A^t(K_w))|` at ramified places: fills `h1`
/// from `hat0_dual`.
pub fn normalize_local_datum(l: &LocalDatum) -> Result<LocalDatum> {
    l.validate()?;
    let mut out = l.clone();
    if l.class == LocalClass::Ramified {
        match (l.h1, l.hat0_dual) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::MalformedLocal(format!(
                    "place {}: h1 = p^{a} and hat0_dual = p^{b} must agree",
                    l.place
                )))
            }
            (_, Some(b)) => out.h1 = Some(b),
            _ => {}
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtensionFlags {
    pub d: usize,
    pub is_zp: bool,
    pub is_arithmetic: bool,
    pub is_elliptic: bool,
}

/// Hypotheses of the formula, asserted by whoever supplies the datum.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Hypotheses {
    /// `Sel(F)` finite.
    pub selmer_finite: bool,
    /// `Sel_{A^t}(F)_p` finite.
    pub dual_selmer_finite: bool,
    /// `chi(G, A(K)[p^inf])` well defined.
    pub chi_defined: bool,
    /// Local cohomology at ramified places finite.
    pub local_finite: bool,
    /// The localization map is surjective, so `NS = 1`.
    pub psi_surjective: bool,
    /// `A(K)[p^inf]` finite.
    pub torsion_finite: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithmeticDatum {
    pub p: u64,
    pub sha: i64,
    pub ns: Option<i64>,
    pub tors_a: i64,
    pub tors_at: i64,
    pub chi_tors: Option<i64>,
    pub chi3_tors: Option<i64>,
    pub locals: Vec<LocalDatum>,
    pub extension: ExtensionFlags,
    pub hypotheses: Hypotheses,
}

impl ArithmeticDatum {
    /// Trivial datum: every order 1, every hypothesis asserted.
    pub fn trivial(p: u64, d: usize) -> Self {
        Self {
            p,
            sha: 0,
            ns: Some(0),
            tors_a: 0,
            tors_at: 0,
            chi_tors: Some(0),
            chi3_tors: Some(0),
            locals: Vec::new(),
            extension: ExtensionFlags { d, is_zp: d == 1, is_arithmetic: false, is_elliptic: false },
            hypotheses: Hypotheses {
                selmer_finite: true,
                dual_selmer_finite: true,
                chi_defined: true,
                local_finite: true,
                psi_surjective: false,
                torsion_finite: false,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let globals = [("sha", Some(self.sha)), ("ns", self.ns), ("tors_A", Some(self.tors_a)), ("tors_At", Some(self.tors_at))];
        if let Some((name, _)) = globals.iter().find(|(_, v)| v.is_some_and(|e| e < 0)) {
            return Err(Error::InvalidArgument(format!("{name} must be the order of a group")));
        }
        if self.extension.is_zp != (self.extension.d == 1) {
            return Err(Error::InvalidArgument("is_Zp must agree with d = 1".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &self.locals {
            l.validate()?;
            if !seen.insert(l.place.as_str()) {
                return Err(Error::MalformedLocal(format!("place {} listed twice", l.place)));
            }
        }
        Ok(())
    }
}

/// One factor of the evaluated product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub term: String,
    /// Signed exponent this factor contributes.
    pub exponent: i64,
    pub source: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: EulerCharacteristic,
    pub trace: Vec<TraceLine>,
    /// `true` for the ratio `chi / chi^(2)`, `false` for the full `chi`.
    pub truncated: bool,
}

impl Evaluation {
    /// Product of the trace factors.
    pub fn remultiply(&self) -> EulerCharacteristic {
        EulerCharacteristic::new(self.value.p, self.trace.iter().map(|t| t.exponent).sum())
    }

    pub fn lines(&self) -> Vec<String> {
        let p = self.value.p;
        let mut out: Vec<String> =
            self.trace.iter().map(|t| format!("{} = {}^{} ({})", t.term, p, t.exponent, t.source)).collect();
        let what = if self.truncated { "chi/chi2" } else { "chi" };
        out.push(format!("{what} = {}", self.value));
        out
    }
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

struct Trace {
    p: u64,
    lines: Vec<TraceLine>,
}

impl Trace {
    fn push(&mut self, term: impl Into<String>, exponent: i64, source: &'static str) {
        self.lines.push(TraceLine { term: term.into(), exponent, source });
    }

    fn finish(self, truncated: bool) -> Evaluation {
        let value = EulerCharacteristic::new(self.p, self.lines.iter().map(|t| t.exponent).sum());
        Evaluation { value, trace: self.lines, truncated }
    }
}

fn require(flag: bool, what: &str) -> Result<()> {
    if flag {
        Ok(())
    } else {
        Err(Error::HypothesisViolated(what.into()))
    }
}

fn ns_exponent(datum: &ArithmeticDatum) -> Result<(i64, &'static str)> {
    match (datum.ns, datum.hypotheses.psi_surjective) {
        (Some(e), true) if e != 0 => {
            Err(Error::HypothesisViolated("NS(psi_K) must be 1 when psi_K is asserted surjective".into()))
        }
        (Some(e), _) => Ok((e, "global: localization cokernel")),
        (None, true) => Ok((0, "global: psi_K surjective")),
        (None, false) => Err(Error::HypothesisViolated("NS(psi_K) is required unless psi_K is surjective".into())),
    }
}

fn global_terms(datum: &ArithmeticDatum, t: &mut Trace) -> Result<()> {
    let (ns, ns_src) = ns_exponent(datum)?;
    t.push("|Sha(A/F)[p^inf]|", datum.sha, "global: Sha");
    t.push("|NS(psi_K)|", ns, ns_src);
    t.push("|A^t(F)[p^inf]|^-1", -datum.tors_at, "global: dual torsion");
    t.push("|A(F)[p^inf]|^-1", -datum.tors_a, "global: torsion");
    Ok(())
}

fn inert_terms(locals: &[LocalDatum], t: &mut Trace) {
    for l in locals.iter().filter(|l| l.class == LocalClass::InertBad) {
        t.push(format!("p^nu_{}", l.place), l.nu.unwrap_or(0), "local: Neron components");
    }
}

/// The ratio `chi(G, Sel(K)) / chi^(2)(G, Sel(K))` for a `Z_p^d`-extension.
pub fn evaluate_theorem(datum: &ArithmeticDatum) -> Result<Evaluation> {
    datum.validate()?;
    let h = &datum.hypotheses;
    require(h.selmer_finite && h.dual_selmer_finite, "Sel(F) and Sel_At(F) must be finite")?;
    require(h.chi_defined, "chi(G, A(K)[p^inf]) must be well defined")?;
    require(h.local_finite, "local cohomology at ramified places must be finite")?;
    let chi = datum.chi_tors.ok_or_else(|| Error::HypothesisViolated("chi(G, A(K)[p^inf]) missing".into()))?;
    let chi3 = datum.chi3_tors.ok_or_else(|| Error::HypothesisViolated("chi3(G, A(K)[p^inf]) missing".into()))?;
    let mut t = Trace { p: datum.p, lines: Vec::new() };
    t.push("chi(G, A(K)[p^inf])", chi, "global: torsion Euler characteristic");
    t.push("chi3(G, A(K)[p^inf])^-1", -chi3, "global: torsion Euler characteristic from degree 3");
    global_terms(datum, &mut t)?;
    inert_terms(&datum.locals, &mut t);
    for l in datum.locals.iter().filter(|l| l.class == LocalClass::Ramified) {
        let n = normalize_local_datum(l)?;
        let h2 = n.h2.ok_or_else(|| Error::MalformedLocal(format!("place {}: h2 is required", l.place)))?;
        let src = if l.h1.is_some() { "local: H^1" } else { "local: H^1 via Tate duality" };
        t.push(format!("|H^1(G_{0}, A(K_w))|", l.place), n.h1.unwrap_or(0), src);
        t.push(format!("|H^2(G_{0}, A(K_w))|^-1", l.place), -h2, "local: H^2");
    }
    Ok(t.finish(true))
}

/// Full `chi(G, Sel(K))` for a `Z_p`-extension.
pub fn evaluate_zp_corollary(datum: &ArithmeticDatum) -> Result<Evaluation> {
    datum.validate()?;
    let h = &datum.hypotheses;
    require(datum.extension.is_zp, "the Z_p formula needs d = 1")?;
    require(h.selmer_finite && h.dual_selmer_finite, "Sel(F) and Sel_At(F) must be finite")?;
    let mut t = Trace { p: datum.p, lines: Vec::new() };
    if h.torsion_finite {
        if datum.chi_tors.is_some_and(|c| c != 0) {
            return Err(Error::HypothesisViolated("chi(G, A(K)[p^inf]) is 1 when A(K)[p^inf] is finite".into()));
        }
        t.push("chi(G, A(K)[p^inf])", 0, "global: finite torsion over K");
    } else {
        let chi = datum.chi_tors.ok_or_else(|| Error::HypothesisViolated("chi(G, A(K)[p^inf]) missing".into()))?;
        t.push("chi(G, A(K)[p^inf])", chi, "global: torsion Euler characteristic");
    }
    global_terms(datum, &mut t)?;
    for l in datum.locals.iter().filter(|l| l.class == LocalClass::Ramified) {
        let n = normalize_local_datum(l)?;
        if n.h2.is_some_and(|e| e != 0) {
            return Err(Error::HypothesisViolated(format!(
                "place {}: H^2 vanishes at ramified places of a Z_p-extension",
                l.place
            )));
        }
        t.push(format!("|H^0-hat(G_{0}, A^t(K_w))|", l.place), n.h1.unwrap_or(0), "local: Tate cohomology of A^t");
    }
    inert_terms(&datum.locals, &mut t);
    Ok(t.finish(false))
}

/// Full `chi` for an elliptic curve over the arithmetic `Z_p`-extension.
pub fn evaluate_elliptic_arithmetic(datum: &ArithmeticDatum) -> Result<Evaluation> {
    datum.validate()?;
    require(datum.extension.is_elliptic && datum.extension.is_arithmetic, "needs an elliptic curve over F^ar")?;
    require(datum.extension.is_zp, "the arithmetic extension is a Z_p-extension")?;
    require(datum.hypotheses.selmer_finite, "Sel_E(F) must be finite")?;
    require(datum.tors_a == datum.tors_at, "E is self-dual, so both torsion orders agree")?;
    if let Some(l) = datum.locals.iter().find(|l| l.class == LocalClass::Ramified) {
        return Err(Error::HypothesisViolated(format!("place {} ramifies, but F^ar/F is unramified", l.place)));
    }
    let (ns, ns_src) = ns_exponent(datum)?;
    let mut t = Trace { p: datum.p, lines: Vec::new() };
    t.push("|Sha(E/F)[p^inf]|", datum.sha, "global: Sha");
    t.push("|NS(psi)|", ns, ns_src);
    t.push("|E(F)[p^inf]|^-2", -2 * datum.tors_a, "global: torsion, self-dual");
    inert_terms(&datum.locals, &mut t);
    Ok(t.finish(false))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corollary {
    General,
    Zp,
    EllipticArithmetic,
}

pub fn evaluate(datum: &ArithmeticDatum, mode: Corollary) -> Result<Evaluation> {
    match mode {
        Corollary::General => evaluate_theorem(datum),
        Corollary::Zp => evaluate_zp_corollary(datum),
        Corollary::EllipticArithmetic => evaluate_elliptic_arithmetic(datum),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    pub formula: EulerCharacteristic,
    pub from_l: EulerCharacteristic,
    pub agree: bool,
}

impl fmt::Display for CrossCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "formula = {} L-value = {} agree = {}", self.formula, self.from_l, self.agree)
    }
}

/// Formula value against `|pi_0(L)|_p^{-1}`. Only the full-`chi` modes compare
/// like with like: `Z_p`-extensions, or a surjective localization map.
pub fn cross_check_with_l(datum: &ArithmeticDatum, l: &IwasawaElement) -> Result<CrossCheck> {
    if datum.extension.d != l.profile().vars() {
        return Err(Error::IncompatibleConfiguration(format!(
            "datum has d = {}, L lives over d = {}",
            datum.extension.d,
            l.profile().vars()
        )));
    }
    if datum.p != l.profile().p() {
        return Err(Error::IncompatibleConfiguration("datum and L use different primes".into()));
    }
    let eval = if datum.extension.is_elliptic && datum.extension.is_arithmetic {
        evaluate_elliptic_arithmetic(datum)?
    } else if datum.extension.is_zp {
        evaluate_zp_corollary(datum)?
    } else if datum.hypotheses.psi_surjective {
        evaluate_theorem(datum)?
    } else {
        return Err(Error::IncompatibleConfiguration(
            "for d > 1 the comparison needs a surjective localization map".into(),
        ));
    };
    let from_l = euler_char_prediction(l)?;
    Ok(CrossCheck { agree: eval.value == from_l, formula: eval.value, from_l })
}

/// `chi(G, Lambda_d / (L))` through the homology pipeline, next to `|pi_0(L)|_p^{-1}`.
pub fn principal_module_check(l: &IwasawaElement) -> Result<CrossCheck> {
    let s = ModulePresentation::principal(l);
    let formula = dual_selmer_euler_characteristic(&s)?;
    let from_l = euler_char_prediction(l)?;
    Ok(CrossCheck { agree: formula == from_l, formula, from_l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicContext;
    use crate::ring::TruncationProfile;

    #[test]
    fn theorem_examples() {
        let mut d = ArithmeticDatum::trivial(5, 2);
        assert_eq!(evaluate_theorem(&d).unwrap().value.exponent, 0);
        d.sha = 2;
        d.tors_a = 1;
        d.tors_at = 1;
        d.locals.push(LocalDatum::inert_bad("v1", 1));
        let e = evaluate_theorem(&d).unwrap();
        assert_eq!(e.value.exponent, 1);
        assert_eq!(e.remultiply(), e.value);
        let mut d = ArithmeticDatum::trivial(5, 2);
        d.locals.push(LocalDatum::ramified("w", Some(2), None, Some(1)));
        assert_eq!(evaluate_theorem(&d).unwrap().value.exponent, 1);
        d.hypotheses.local_finite = false;
        assert!(matches!(evaluate_theorem(&d), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn normalization() {
        let l = LocalDatum::ramified("w", None, Some(3), Some(0));
        assert_eq!(normalize_local_datum(&l).unwrap().h1, Some(3));
        let l = LocalDatum::ramified("w", Some(1), None, Some(0));
        assert_eq!(normalize_local_datum(&l).unwrap(), l);
        let l = LocalDatum::ramified("w", Some(1), Some(2), Some(0));
        assert!(matches!(normalize_local_datum(&l), Err(Error::MalformedLocal(_))));
        let mut bad = LocalDatum::inert_bad("v", 1);
        bad.h2 = Some(1);
        assert!(matches!(bad.validate(), Err(Error::MalformedLocal(_))));
    }

    #[test]
    fn corollary_examples() {
        let mut d = ArithmeticDatum::trivial(3, 1);
        assert_eq!(evaluate_zp_corollary(&d).unwrap().value.exponent, 0);
        d.hypotheses.torsion_finite = true;
        d.chi_tors = None;
        d.sha = 1;
        d.tors_a = 1;
        d.locals.push(LocalDatum::ramified("w", None, Some(1), None));
        assert_eq!(evaluate_zp_corollary(&d).unwrap().value.exponent, 1);
        d.locals[0].h2 = Some(1);
        assert!(matches!(evaluate_zp_corollary(&d), Err(Error::HypothesisViolated(_))));

        let mut e = ArithmeticDatum::trivial(3, 1);
        e.extension.is_elliptic = true;
        e.extension.is_arithmetic = true;
        e.sha = 2;
        e.tors_a = 1;
        e.tors_at = 1;
        assert_eq!(evaluate_elliptic_arithmetic(&e).unwrap().value.exponent, 0);
        let mut e2 = ArithmeticDatum::trivial(3, 1);
        e2.extension = e.extension.clone();
        e2.locals.push(LocalDatum::inert_bad("v", 2));
        assert_eq!(evaluate_elliptic_arithmetic(&e2).unwrap().value.exponent, 2);
        e2.locals.push(LocalDatum::ramified("w", Some(0), None, Some(0)));
        assert!(matches!(evaluate_elliptic_arithmetic(&e2), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn ns_requires_surjectivity_or_value() {
        let mut d = ArithmeticDatum::trivial(5, 1);
        d.ns = None;
        assert!(matches!(evaluate_theorem(&d), Err(Error::HypothesisViolated(_))));
        d.hypotheses.psi_surjective = true;
        assert_eq!(evaluate_theorem(&d).unwrap().value.exponent, 0);
    }

    #[test]
    fn cross_check_examples() {
        let pr = TruncationProfile::new(PadicContext::new(5, 4).unwrap(), 1, 6).unwrap();
        let mut d = ArithmeticDatum::trivial(5, 1);
        d.sha = 2;
        let c = cross_check_with_l(&d, &IwasawaElement::constant(pr, 25)).unwrap();
        assert!(c.agree);
        d.sha = 1;
        let c = cross_check_with_l(&d, &IwasawaElement::one(pr)).unwrap();
        assert!(!c.agree);
        let d2 = ArithmeticDatum::trivial(5, 2);
        assert!(matches!(cross_check_with_l(&d2, &IwasawaElement::one(pr)), Err(Error::IncompatibleConfiguration(_))));
        let l = IwasawaElement::constant(pr, 25).add(&IwasawaElement::var(pr, 0));
        let c = principal_module_check(&l).unwrap();
        assert!(c.agree, "{c}");
    }
}
