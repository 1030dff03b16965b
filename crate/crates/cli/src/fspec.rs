//! Mini-grammar for observables on the command line:
//! `phi:K` (the K-th eigenfunction), `poly:c0,c1,...` (coefficients in the
//! coding variable), `block:c0,..;d0,..` (golden-mean block parts). Scalars
//! use the exact string forms, e.g. `1/2` or `3/2-1/2√5`.

use pfspectra_core::poly::Poly;
use pfspectra_core::scalar::Scalar;
use pfspectra_core::spectral::EigenSystem;
use pfspectra_core::{BlockObservable, Observable};

fn parse_coeffs(body: &str) -> Result<Vec<Scalar>, String> {
    if body.trim().is_empty() {
        return Ok(vec![]);
    }
    body.split(',')
        .map(|c| {
            c.trim()
                .parse::<Scalar>()
                .map_err(|_| format!("bad scalar {c:?} in observable spec"))
        })
        .collect()
}

pub fn parse(es: &EigenSystem, spec: &str) -> Result<Observable, String> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| format!("observable spec {spec:?} needs a kind prefix"))?;
    match kind {
        "phi" => {
            let k: usize = body
                .trim()
                .parse()
                .map_err(|_| format!("bad eigenfunction index {body:?}"))?;
            if k >= es.size() {
                return Err(format!(
                    "eigenfunction index {k} out of range for size {}",
                    es.size()
                ));
            }
            Ok(es.eigenfunction(k))
        }
        "poly" => Ok(Observable::poly(Poly::from_coeffs(parse_coeffs(body)?))),
        "block" => {
            let (q0, q1) = body
                .split_once(';')
                .ok_or_else(|| "block spec needs two parts separated by ';'".to_string())?;
            Ok(Observable::Block(BlockObservable::new(
                Poly::from_coeffs(parse_coeffs(q0)?),
                Poly::from_coeffs(parse_coeffs(q1)?),
            )))
        }
        other => Err(format!("unknown observable kind {other:?} (phi, poly, block)")),
    }
}
