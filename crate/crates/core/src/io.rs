//! JSON documents for the domain types. Residues and exponent vectors travel as
//! decimal strings so that nothing depends on float parsing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lfun::{FrobeniusAssignment, FrobeniusRule, Place, PlaceTable};
use crate::module::{FiniteGModule, ModulePresentation};
use crate::padic::PadicContext;
use crate::ring::{GroupExponent, IwasawaElement, TruncationProfile};
use crate::selmer::{ArithmeticDatum, ExtensionFlags, Hypotheses, LocalClass, LocalDatum};

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

fn to_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("documents always serialize")
}

fn residue(ctx: &PadicContext, s: &str, bound: u64, entry: &str) -> Result<u64> {
    let v: u64 = s.trim().parse().map_err(|_| Error::SchemaMismatch(format!("{entry}: '{s}' is not a decimal residue")))?;
    if v >= bound {
        return Err(Error::SchemaMismatch(format!("{entry}: coefficient {v} is not below p^N = {}", ctx.modulus())));
    }
    Ok(v)
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ProfileHeader {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
}

impl ProfileHeader {
    pub fn of(profile: &TruncationProfile) -> Self {
        Self { p: profile.p(), n: profile.precision(), d: profile.vars(), m: profile.trunc() }
    }

    pub fn profile(&self) -> Result<TruncationProfile> {
        let ctx = PadicContext::new(self.p, self.n).map_err(|e| Error::SchemaMismatch(format!("profile: {e}")))?;
        TruncationProfile::new(ctx, self.d, self.m).map_err(|e| Error::SchemaMismatch(format!("profile: {e}")))
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
struct ElementBody {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    profile: Option<ProfileHeader>,
    /// Effective precision; defaults to `N`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    precision: Option<u32>,
    terms: Vec<(Vec<usize>, String)>,
}

fn element_body(e: &IwasawaElement, with_profile: bool) -> ElementBody {
    let prof = e.profile();
    let terms = e
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, c)| (prof.exponents(i), c.to_string()))
        .collect();
    let precision = (e.precision() < prof.precision()).then_some(e.precision());
    ElementBody { profile: with_profile.then(|| ProfileHeader::of(&prof)), precision, terms }
}

fn element_from_body(body: &ElementBody, profile: Option<TruncationProfile>, entry: &str) -> Result<IwasawaElement> {
    let prof = match (body.profile, profile) {
        (Some(h), Some(p)) if h != ProfileHeader::of(&p) => {
            return Err(Error::SchemaMismatch(format!("{entry}: profile differs from the enclosing document")))
        }
        (Some(h), _) => h.profile()?,
        (None, Some(p)) => p,
        (None, None) => return Err(Error::SchemaMismatch(format!("{entry}: missing profile header"))),
    };
    let ctx = prof.context();
    let prec = body.precision.unwrap_or(prof.precision());
    if prec > prof.precision() {
        return Err(Error::SchemaMismatch(format!("{entry}: precision {prec} exceeds N = {}", prof.precision())));
    }
    let mut coeffs = vec![0u64; prof.size()];
    for (k, (exps, c)) in body.terms.iter().enumerate() {
        let at = format!("{entry} term {k}");
        if exps.len() != prof.vars() || exps.iter().any(|&x| x >= prof.trunc()) {
            return Err(Error::SchemaMismatch(format!("{at}: exponent {exps:?} outside the truncation")));
        }
        let v = residue(&ctx, c, ctx.modulus(), &at)?;
        let i = prof.index(exps);
        coeffs[i] = ctx.add(coeffs[i], v);
    }
    Ok(IwasawaElement::from_raw(prof, coeffs, prec))
}

pub fn element_to_json(e: &IwasawaElement) -> String {
    to_string(&element_body(e, true))
}

pub fn element_from_json(s: &str) -> Result<IwasawaElement> {
    let body: ElementBody = serde_json::from_str(s).map_err(parse_err)?;
    element_from_body(&body, None, "element")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresentationDoc {
    profile: ProfileHeader,
    ncols: usize,
    rows: Vec<Vec<ElementBody>>,
}

pub fn presentation_to_json(m: &ModulePresentation) -> String {
    let doc = PresentationDoc {
        profile: ProfileHeader::of(&m.profile()),
        ncols: m.ncols(),
        rows: m.relations().iter().map(|r| r.iter().map(|e| element_body(e, false)).collect()).collect(),
    };
    to_string(&doc)
}

pub fn presentation_from_json(s: &str) -> Result<ModulePresentation> {
    let doc: PresentationDoc = serde_json::from_str(s).map_err(parse_err)?;
    let prof = doc.profile.profile()?;
    let rows = doc
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if r.len() != doc.ncols {
                return Err(Error::SchemaMismatch(format!("row {i} has {} entries, expected {}", r.len(), doc.ncols)));
            }
            r.iter().enumerate().map(|(j, b)| element_from_body(b, Some(prof), &format!("entry ({i}, {j})"))).collect()
        })
        .collect::<Result<Vec<_>>>()?;
    ModulePresentation::new(prof, doc.ncols, rows)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FiniteModuleDoc {
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    ngens: usize,
    relations: Vec<Vec<String>>,
    actions: Vec<Vec<Vec<String>>>,
}

pub fn finite_module_to_json(m: &FiniteGModule) -> String {
    let strs = |r: &[u64]| r.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let doc = FiniteModuleDoc {
        p: m.context().p(),
        n: m.context().precision(),
        ngens: m.ngens(),
        relations: m.relations().iter().map(|r| strs(r)).collect(),
        actions: m.actions().iter().map(|a| a.iter().map(|r| strs(r)).collect()).collect(),
    };
    to_string(&doc)
}

pub fn finite_module_from_json(s: &str) -> Result<FiniteGModule> {
    let doc: FiniteModuleDoc = serde_json::from_str(s).map_err(parse_err)?;
    let ctx = PadicContext::new(doc.p, doc.n).map_err(|e| Error::SchemaMismatch(e.to_string()))?;
    let row = |r: &[String], what: String| -> Result<Vec<u64>> {
        if r.len() != doc.ngens {
            return Err(Error::SchemaMismatch(format!("{what}: expected {} entries", doc.ngens)));
        }
        r.iter().enumerate().map(|(j, x)| residue(&ctx, x, ctx.modulus(), &format!("{what} entry {j}"))).collect()
    };
    let relations =
        doc.relations.iter().enumerate().map(|(i, r)| row(r, format!("relation {i}"))).collect::<Result<Vec<_>>>()?;
    let actions = doc
        .actions
        .iter()
        .enumerate()
        .map(|(k, a)| a.iter().enumerate().map(|(i, r)| row(r, format!("action {k} row {i}"))).collect())
        .collect::<Result<Vec<_>>>()?;
    FiniteGModule::new(ctx, doc.ngens, relations, actions)
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(untagged)]
enum PlaceDoc {
    Infinite(String),
    Finite(Vec<u32>),
}

fn place_doc(p: &Place) -> PlaceDoc {
    match p {
        Place::Infinite => PlaceDoc::Infinite("inf".into()),
        Place::Finite(c) => PlaceDoc::Finite(c.clone()),
    }
}

fn place_from_doc(d: &PlaceDoc) -> Result<Place> {
    match d {
        PlaceDoc::Infinite(s) if s == "inf" => Ok(Place::Infinite),
        PlaceDoc::Infinite(s) => Err(Error::SchemaMismatch(format!("place '{s}' is neither 'inf' nor a coefficient list"))),
        PlaceDoc::Finite(c) => {
            if c.len() < 2 || c.last() != Some(&1) {
                return Err(Error::SchemaMismatch(format!("place {c:?} is not monic of positive degree")));
            }
            Ok(Place::Finite(c.clone()))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaceTableDoc {
    q: u64,
    max_degree: u32,
    places: Vec<PlaceDoc>,
}

pub fn place_table_to_json(t: &PlaceTable) -> String {
    to_string(&PlaceTableDoc { q: t.q, max_degree: t.max_degree, places: t.places.iter().map(place_doc).collect() })
}

pub fn place_table_from_json(s: &str) -> Result<PlaceTable> {
    let doc: PlaceTableDoc = serde_json::from_str(s).map_err(parse_err)?;
    let places = doc.places.iter().map(place_from_doc).collect::<Result<Vec<_>>>()?;
    PlaceTable::new(doc.q, doc.max_degree, places).map_err(|e| Error::SchemaMismatch(e.to_string()))
}

fn exponent_doc(e: &GroupExponent) -> Vec<String> {
    e.0.iter().map(|x| x.to_string()).collect()
}

fn exponent_from_doc(v: &[String], what: &str) -> Result<GroupExponent> {
    v.iter()
        .map(|x| x.trim().parse::<i64>().map_err(|_| Error::SchemaMismatch(format!("{what}: '{x}' is not a decimal integer"))))
        .collect::<Result<Vec<_>>>()
        .map(GroupExponent)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrobeniusEntry {
    place: PlaceDoc,
    exponent: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrobeniusDoc {
    vars: usize,
    rule: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    table: Vec<FrobeniusEntry>,
    #[serde(default)]
    constant_frobenius: Option<Vec<String>>,
}

pub fn frobenius_to_json(f: &FrobeniusAssignment) -> String {
    let (rule, table) = match &f.rule {
        FrobeniusRule::Arithmetic => ("arithmetic", Vec::new()),
        FrobeniusRule::Table(t) => (
            "table",
            t.iter().map(|(p, e)| FrobeniusEntry { place: place_doc(p), exponent: exponent_doc(e) }).collect(),
        ),
    };
    to_string(&FrobeniusDoc {
        vars: f.vars,
        rule: rule.into(),
        table,
        constant_frobenius: f.constant_frobenius.as_ref().map(exponent_doc),
    })
}

pub fn frobenius_from_json(s: &str) -> Result<FrobeniusAssignment> {
    let doc: FrobeniusDoc = serde_json::from_str(s).map_err(parse_err)?;
    let constant = doc.constant_frobenius.as_deref().map(|v| exponent_from_doc(v, "constant_frobenius")).transpose()?;
    let out = match doc.rule.as_str() {
        "arithmetic" => {
            if !doc.table.is_empty() {
                return Err(Error::SchemaMismatch("the arithmetic rule takes no table".into()));
            }
            let mut f = FrobeniusAssignment::arithmetic(doc.vars).map_err(|e| Error::SchemaMismatch(e.to_string()))?;
            if constant.is_some() {
                f.constant_frobenius = constant;
            }
            f
        }
        "table" => {
            let mut entries = BTreeMap::new();
            for (i, e) in doc.table.iter().enumerate() {
                let place = place_from_doc(&e.place)?;
                let exp = exponent_from_doc(&e.exponent, &format!("table entry {i}"))?;
                if entries.insert(place, exp).is_some() {
                    return Err(Error::SchemaMismatch(format!("table entry {i} repeats a place")));
                }
            }
            FrobeniusAssignment::table(doc.vars, entries, constant).map_err(|e| Error::SchemaMismatch(e.to_string()))?
        }
        other => return Err(Error::SchemaMismatch(format!("unknown rule '{other}'"))),
    };
    if out.constant_frobenius.as_ref().is_some_and(|c| c.len() != doc.vars) {
        return Err(Error::SchemaMismatch(format!("constant_frobenius must have length {}", doc.vars)));
    }
    Ok(out)
}

/// `p^k` as a decimal integer or fraction when it fits, otherwise `p^k`.
pub fn format_order(p: u64, k: i64) -> String {
    match (p as u128).checked_pow(k.unsigned_abs() as u32) {
        Some(v) if k >= 0 => v.to_string(),
        Some(v) => format!("1/{v}"),
        None => format!("{p}^{k}"),
    }
}

/// Inverse of [`format_order`]; also accepts any `a/b` with `a`, `b` powers of `p`.
pub fn parse_order(p: u64, s: &str, what: &str) -> Result<i64> {
    let bad = || Error::SchemaMismatch(format!("{what}: '{s}' is not a power of {p}"));
    let log = |t: &str| -> Result<i64> {
        let mut v: u128 = t.trim().parse().map_err(|_| bad())?;
        if v == 0 {
            return Err(bad());
        }
        let mut k = 0;
        while v % p as u128 == 0 {
            v /= p as u128;
            k += 1;
        }
        if v == 1 {
            Ok(k)
        } else {
            Err(bad())
        }
    };
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        if base.trim().parse::<u64>().ok() != Some(p) {
            return Err(bad());
        }
        return exp.trim().parse::<i64>().map_err(|_| bad());
    }
    match s.split_once('/') {
        Some((a, b)) => Ok(log(a)? - log(b)?),
        None => log(s),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalDoc {
    place: String,
    class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hat0_dual: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nu: Option<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtensionDoc {
    d: usize,
    #[serde(rename = "is_Zp")]
    is_zp: bool,
    is_arithmetic: bool,
    is_elliptic: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypothesesDoc {
    selmer_finite: bool,
    dual_selmer_finite: bool,
    chi_defined: bool,
    local_finite: bool,
    psi_surjective: bool,
    torsion_finite: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatumDoc {
    p: u64,
    sha: String,
    ns: Option<String>,
    #[serde(rename = "tors_A")]
    tors_a: String,
    #[serde(rename = "tors_At")]
    tors_at: String,
    chi_tors: Option<String>,
    chi3_tors: Option<String>,
    locals: Vec<LocalDoc>,
    extension: ExtensionDoc,
    hypotheses: HypothesesDoc,
}

pub fn datum_to_json(d: &ArithmeticDatum) -> String {
    let o = |k: i64| format_order(d.p, k);
    let doc = DatumDoc {
        p: d.p,
        sha: o(d.sha),
        ns: d.ns.map(o),
        tors_a: o(d.tors_a),
        tors_at: o(d.tors_at),
        chi_tors: d.chi_tors.map(o),
        chi3_tors: d.chi3_tors.map(o),
        locals: d
            .locals
            .iter()
            .map(|l| LocalDoc {
                place: l.place.clone(),
                class: l.class.name().into(),
                h1: l.h1.map(o),
                hat0_dual: l.hat0_dual.map(o),
                h2: l.h2.map(o),
                nu: l.nu,
            })
            .collect(),
        extension: ExtensionDoc {
            d: d.extension.d,
            is_zp: d.extension.is_zp,
            is_arithmetic: d.extension.is_arithmetic,
            is_elliptic: d.extension.is_elliptic,
        },
        hypotheses: HypothesesDoc {
            selmer_finite: d.hypotheses.selmer_finite,
            dual_selmer_finite: d.hypotheses.dual_selmer_finite,
            chi_defined: d.hypotheses.chi_defined,
            local_finite: d.hypotheses.local_finite,
            psi_surjective: d.hypotheses.psi_surjective,
            torsion_finite: d.hypotheses.torsion_finite,
        },
    };
    to_string(&doc)
}

pub fn datum_from_json(s: &str) -> Result<ArithmeticDatum> {
    let doc: DatumDoc = serde_json::from_str(s).map_err(parse_err)?;
    if !crate::padic::is_prime(doc.p) {
        return Err(Error::SchemaMismatch(format!("p = {} is not prime", doc.p)));
    }
    let p = doc.p;
    let o = |v: &str, what: &str| parse_order(p, v, what);
    let oo = |v: &Option<String>, what: &str| v.as_deref().map(|x| o(x, what)).transpose();
    let locals = doc
        .locals
        .iter()
        .map(|l| {
            let at = |f: &str| format!("locals[{}].{f}", l.place);
            Ok(LocalDatum {
                place: l.place.clone(),
                class: LocalClass::parse(&l.class)?,
                h1: oo(&l.h1, &at("h1"))?,
                hat0_dual: oo(&l.hat0_dual, &at("hat0_dual"))?,
                h2: oo(&l.h2, &at("h2"))?,
                nu: l.nu,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let d = ArithmeticDatum {
        p,
        sha: o(&doc.sha, "sha")?,
        ns: oo(&doc.ns, "ns")?,
        tors_a: o(&doc.tors_a, "tors_A")?,
        tors_at: o(&doc.tors_at, "tors_At")?,
        chi_tors: oo(&doc.chi_tors, "chi_tors")?,
        chi3_tors: oo(&doc.chi3_tors, "chi3_tors")?,
        locals,
        extension: ExtensionFlags {
            d: doc.extension.d,
            is_zp: doc.extension.is_zp,
            is_arithmetic: doc.extension.is_arithmetic,
            is_elliptic: doc.extension.is_elliptic,
        },
        hypotheses: Hypotheses {
            selmer_finite: doc.hypotheses.selmer_finite,
            dual_selmer_finite: doc.hypotheses.dual_selmer_finite,
            chi_defined: doc.hypotheses.chi_defined,
            local_finite: doc.hypotheses.local_finite,
            psi_surjective: doc.hypotheses.psi_surjective,
            torsion_finite: doc.hypotheses.torsion_finite,
        },
    };
    d.validate()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfun::enumerate_places;

    fn prof() -> TruncationProfile {
        TruncationProfile::new(PadicContext::new(5, 3).unwrap(), 2, 3).unwrap()
    }

    #[test]
    fn element_roundtrip() {
        let e = IwasawaElement::from_terms(prof(), &[(vec![0, 0], 7), (vec![2, 1], -1)]).with_precision(2);
        let s = element_to_json(&e);
        let back = element_from_json(&s).unwrap();
        assert_eq!(back, e);
        assert_eq!(element_to_json(&back), s);
    }

    #[test]
    fn oversized_coefficient_is_rejected() {
        let s = r#"{"profile":{"p":5,"N":2,"d":1,"M":4},"terms":[[[1],"25"]]}"#;
        match element_from_json(s) {
            Err(Error::SchemaMismatch(m)) => assert!(m.contains("term 0"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(element_from_json("{\"terms\": ["), Err(Error::Parse(_))));
    }

    #[test]
    fn presentation_and_tables_roundtrip() {
        let pr = prof();
        let m = ModulePresentation::cyclic(pr, &[IwasawaElement::var(pr, 0), IwasawaElement::constant(pr, 5)]).unwrap();
        assert_eq!(presentation_from_json(&presentation_to_json(&m)).unwrap(), m);
        let t = enumerate_places(3, 2).unwrap();
        assert_eq!(place_table_from_json(&place_table_to_json(&t)).unwrap(), t);
        let mut entries = BTreeMap::new();
        entries.insert(Place::Infinite, GroupExponent(vec![1, -2]));
        entries.insert(Place::Finite(vec![0, 1]), GroupExponent(vec![0, 3]));
        let f = FrobeniusAssignment::table(2, entries, Some(GroupExponent(vec![1, 0]))).unwrap();
        assert_eq!(frobenius_from_json(&frobenius_to_json(&f)).unwrap(), f);
        let a = FrobeniusAssignment::arithmetic(1).unwrap();
        assert_eq!(frobenius_from_json(&frobenius_to_json(&a)).unwrap(), a);
    }

    #[test]
    fn finite_module_roundtrip() {
        let ctx = PadicContext::new(3, 2).unwrap();
        let m = FiniteGModule::new(ctx, 2, vec![vec![3, 0], vec![0, 3]], vec![vec![vec![1, 1], vec![0, 1]]]).unwrap();
        assert_eq!(finite_module_from_json(&finite_module_to_json(&m)).unwrap(), m);
    }

    #[test]
    fn datum_roundtrip_and_orders() {
        assert_eq!(parse_order(5, "25", "x").unwrap(), 2);
        assert_eq!(parse_order(5, "1/5", "x").unwrap(), -1);
        assert_eq!(parse_order(5, "5^-3", "x").unwrap(), -3);
        assert!(parse_order(5, "10", "x").is_err());
        let mut d = ArithmeticDatum::trivial(5, 1);
        d.sha = 2;
        d.chi_tors = Some(-1);
        d.locals.push(LocalDatum::ramified("w", None, Some(1), None));
        d.locals.push(LocalDatum::inert_bad("v", 2));
        let s = datum_to_json(&d);
        assert_eq!(datum_from_json(&s).unwrap(), d);
    }
}
