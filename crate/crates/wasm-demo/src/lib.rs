//! Browser bindings for three small computations.  Every export returns a
//! JSON string; failures come back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use weiltriple::arith::{p_pow, parse_rational, rat, rational_to_string, valuation};
use weiltriple::local_integral::{
    basic_cutoff, battery, common_value, i_closed, i_oracle, standard_triples, CellFunction, ORD_PATTERNS,
};
use weiltriple::orbit_ff::{orbit_decompose, xpoints_decompose};
use weiltriple::schwartz::{indicator_lattice, LatticeWindow, WeilRep};
use weiltriple::{PAdicContext, QuadraticSpace, Result, Sl2};

fn wrap(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Closed form against the oracle on a few battery points of one standard triple.
#[wasm_bindgen]
pub fn local_integral_table(p: u32, triple: &str, per_pattern: u32) -> String {
    wrap(local_integral_rows(p as u64, triple, per_pattern.clamp(1, 3) as usize))
}

fn local_integral_rows(p: u64, triple: &str, per_pattern: usize) -> Result<Value> {
    let (_, t) = standard_triples()
        .into_iter()
        .find(|(n, _)| *n == triple)
        .ok_or_else(|| weiltriple::Error::InvalidInput(format!("unknown triple {triple:?}")))?;
    let ctx = PAdicContext::new(p, 1)?;
    let mut rows = Vec::new();
    for v in battery(&t, p, &ORD_PATTERNS, 12, per_pattern) {
        let closed = i_closed(&v, &t, &ctx)?;
        let oracle = i_oracle(&v, &t, &CellFunction::basic(p, basic_cutoff(&v, p)), &ctx)?;
        let oracle = oracle.to_rational();
        let ords: Vec<Option<i64>> = v.ords(p).iter().map(|o| o.finite()).collect();
        rows.push(json!({
            "point": v,
            "ords": ords,
            "val_q": valuation(&common_value(&v, &t), p).finite(),
            "closed": rational_to_string(&closed),
            "oracle": oracle.as_ref().map(rational_to_string),
            "equal": oracle.as_ref() == Some(&closed),
        }));
    }
    Ok(json!({ "p": p, "triple": triple, "rows": rows }))
}

/// Orbit sizes and stabilisers over F_q, with the X(F_q) comparison for q ≤ 3.
#[wasm_bindgen]
pub fn orbit_report(q: u8) -> String {
    wrap((|| {
        let r = orbit_decompose(q)?;
        let x = if q <= 3 { Some(xpoints_decompose(q)?) } else { None };
        Ok(json!({ "lagrangians": r, "x_points": x, "consistent": r.consistent() }))
    })())
}

/// ρ(g)𝟙 for g = w, n(t) or m(a) on a plane, sampled on the grid p⁻¹ℤ² mod p.
#[wasm_bindgen]
pub fn weil_heatmap(p: u32, form: &str, op: &str, param: &str) -> String {
    wrap(heatmap(p as u64, form, op, param))
}

fn plane(form: &str) -> Result<QuadraticSpace> {
    match form {
        "hyperbolic" => Ok(QuadraticSpace::hyperbolic()),
        "diag(1,1)" => QuadraticSpace::diagonal(&[1, 1]),
        "diag(1,2)" => QuadraticSpace::diagonal(&[1, 2]),
        other => Err(weiltriple::Error::InvalidInput(format!("unknown form {other:?}"))),
    }
}

fn heatmap(p: u64, form: &str, op: &str, param: &str) -> Result<Value> {
    let space = plane(form)?;
    let ctx = PAdicContext::new(p, 2)?;
    let r = WeilRep::new(&ctx, &space)?;
    let one = indicator_lattice(&ctx, LatticeWindow::new(2, 0, 0)?)?;
    let x = parse_rational(param)?;
    let g = match op {
        "w" => Sl2::w(),
        "n" => Sl2::n(x.clone()),
        "m" => Sl2::m(x.clone())?,
        other => return Err(weiltriple::Error::InvalidInput(format!("unknown operation {other:?}"))),
    };
    let f = r.apply(&g, &one)?;
    let side = (p * p) as i64;
    let step = p_pow(p, -1);
    let mut cells = Vec::new();
    for j in 0..side {
        for i in 0..side {
            let pt = [rat(i) * &step, rat(j) * &step];
            let v = f.eval(&pt)?;
            let (re, im) = v.to_complex();
            cells.push(json!({ "i": i, "j": j, "exact": v, "display": [re, im] }));
        }
    }
    Ok(json!({ "p": p, "form": form, "op": op, "param": rational_to_string(&x), "side": side, "cells": cells }))
}
