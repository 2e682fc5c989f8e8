//! Browser bindings. Every export takes and returns JSON text; failures come
//! back as `{"error": "..."}` so the page never has to catch exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use iwasawa_core::io;
use iwasawa_core::lfun::{
    enumerate_places, euler_char_prediction, p_adic_l, stickelberger_element, FiniteField, FrobeniusAssignment, Place,
    TwistMatrix,
};
use iwasawa_core::padic::PadicContext;
use iwasawa_core::ring::TruncationProfile;
use iwasawa_core::selmer::{evaluate, Corollary};
use iwasawa_core::Result;

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Weierstrass preparation of an element document.
#[wasm_bindgen]
pub fn weierstrass(element: &str) -> String {
    respond((|| {
        let f = io::element_from_json(element)?;
        let w = f.weierstrass_prepare()?;
        Ok(json!({
            "mu": w.mu,
            "lambda": w.lambda,
            "poly": w.poly.to_string(),
            "unit": w.unit.to_string(),
            "precision": w.precision,
        }))
    })())
}

/// `theta^+`, the L-element and its predicted Euler characteristic for a
/// constant curve with Frobenius trace `trace` over `F_q(t)`. `exclude` is a
/// `;`-separated list of places.
#[wasm_bindgen]
pub fn stickelberger(q: u32, max_degree: u32, exclude: &str, trace: i32, precision: u32, trunc: u32) -> String {
    respond((|| {
        let q = u64::from(q);
        let p = FiniteField::new(q)?.p();
        let profile = TruncationProfile::new(PadicContext::new(p, precision)?, 1, trunc as usize)?;
        let table = enumerate_places(q, max_degree)?;
        let s = exclude
            .split(';')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(Place::parse)
            .collect::<Result<Vec<_>>>()?;
        let twist = TwistMatrix::from_trace(profile.context(), i64::from(trace), q)?;
        let th = stickelberger_element(&table, &s, &FrobeniusAssignment::arithmetic(1)?, &twist, max_degree, profile)?;
        let l = p_adic_l(&th.element);
        Ok(json!({
            "theta_plus": th.element.to_string(),
            "L": l.to_string(),
            "prediction": euler_char_prediction(&l)?.to_string(),
        }))
    })())
}

/// Evaluate the Selmer Euler characteristic formula on a datum document.
/// `corollary` is `""`, `"zp"` or `"elliptic-arith"`.
#[wasm_bindgen]
pub fn euler_formula(datum: &str, corollary: &str) -> String {
    respond((|| {
        let d = io::datum_from_json(datum)?;
        let mode = match corollary {
            "zp" => Corollary::Zp,
            "elliptic-arith" => Corollary::EllipticArithmetic,
            _ => Corollary::General,
        };
        let e = evaluate(&d, mode)?;
        Ok(json!({ "value": io::format_order(e.value.p, e.value.exponent), "trace": e.lines() }))
    })())
}
