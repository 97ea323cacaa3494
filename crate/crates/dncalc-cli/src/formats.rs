//! JSON representations. Rationals travel as strings ("p/q" or "p") so
//! nothing is ever rounded; matrices store only the six independent
//! entries and are completed by symmetry on load.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use dncalc_core::numth::{rat_from_str, rat_to_string};
use dncalc_core::series::FracSeries;
use dncalc_core::weyl::{DNMatrix, DPoly, WeylOp};
use dncalc_core::RatSeries;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesJson {
    /// Exponent of the leading fractional power, "p/q".
    pub offset: String,
    pub prec: usize,
    pub coeffs: Vec<String>,
}

impl SeriesJson {
    pub fn from_series(s: &RatSeries) -> Self {
        SeriesJson {
            offset: "0".into(),
            prec: s.prec(),
            coeffs: s.coeffs().iter().map(rat_to_string).collect(),
        }
    }

    pub fn from_frac(s: &FracSeries) -> Self {
        SeriesJson {
            offset: rat_to_string(s.offset()),
            prec: s.body().prec(),
            coeffs: s.body().coeffs().iter().map(rat_to_string).collect(),
        }
    }

    pub fn truncated(mut self, terms: usize) -> Self {
        self.coeffs.truncate(terms);
        self.prec = self.prec.min(terms);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorTermJson {
    pub tdeg: i64,
    /// Coefficients of the D-polynomial, constant term first.
    pub dpoly: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub terms: Vec<OperatorTermJson>,
}

impl OperatorJson {
    pub fn from_op(op: &WeylOp) -> Self {
        OperatorJson {
            terms: op
                .terms()
                .map(|(k, p)| OperatorTermJson {
                    tdeg: k,
                    dpoly: p.coeffs().iter().map(rat_to_string).collect(),
                })
                .collect(),
        }
    }

    pub fn to_op(&self) -> Result<WeylOp, String> {
        let mut terms = Vec::new();
        for t in &self.terms {
            let coeffs = t
                .dpoly
                .iter()
                .map(|s| rat_from_str(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("{e}"))?;
            terms.push((t.tdeg, DPoly::new(coeffs)));
        }
        Ok(WeylOp::from_terms(terms))
    }

    /// Human-oriented rendering, e.g. `D^3 - t*(24 + 176*D + ...)`.
    pub fn display(&self) -> String {
        let mut parts = Vec::new();
        for t in &self.terms {
            let poly = render_poly(&t.dpoly);
            let part = match t.tdeg {
                0 => poly,
                1 => format!("t*({poly})"),
                k => format!("t^{k}*({poly})"),
            };
            parts.push(part);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

fn render_poly(coeffs: &[String]) -> String {
    let mut monos = Vec::new();
    for (i, c) in coeffs.iter().enumerate() {
        if c == "0" {
            continue;
        }
        let m = match (i, c.as_str()) {
            (0, _) => c.clone(),
            (1, "1") => "D".into(),
            (1, _) => format!("{c}*D"),
            (_, "1") => format!("D^{i}"),
            _ => format!("{c}*D^{i}"),
        };
        monos.push(m);
    }
    if monos.is_empty() {
        "0".into()
    } else {
        monos.join(" + ")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(rename = "N")]
    pub n: usize,
    /// Keys "kl" (e.g. "00", "01"); only entries with k <= l, missing
    /// entries are zero or implied by the anti-transpose symmetry.
    pub a: BTreeMap<String, String>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DNMatrix) -> Self {
        let mut a = BTreeMap::new();
        // emit only the canonical half: (k,l) with (k,l) <= mirror
        for ((k, l), v) in m.entries() {
            let mirror = (m.n() - l, m.n() - k);
            if (k, l) <= mirror {
                a.insert(format!("{k}{l}"), rat_to_string(v));
            }
        }
        MatrixJson { n: m.n(), a }
    }

    pub fn to_matrix(&self) -> Result<DNMatrix, String> {
        let mut entries = Vec::new();
        for (key, val) in &self.a {
            if key.len() != 2 {
                return Err(format!("bad matrix key {key:?}"));
            }
            let k = key[..1].parse::<usize>().map_err(|e| e.to_string())?;
            let l = key[1..].parse::<usize>().map_err(|e| e.to_string())?;
            let v = rat_from_str(val).map_err(|e| format!("{e}"))?;
            entries.push(((k, l), v));
        }
        Ok(DNMatrix::new(self.n, entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dncalc_core::numth::rat;
    use dncalc_core::weyl::dn_build;

    #[test]
    fn matrix_round_trip() {
        let m = DNMatrix::d3(rat(24), rat(104), rat(3888), rat(13600), rat(504576), rat(18323712));
        let j = MatrixJson::from_matrix(&m);
        assert_eq!(j.a.len(), 6);
        assert_eq!(j.to_matrix().unwrap(), m);
    }

    #[test]
    fn operator_round_trip_and_display() {
        let m = DNMatrix::new(3, []);
        let l = dn_build(&m).unwrap();
        let j = OperatorJson::from_op(&l);
        assert_eq!(j.display(), "D^3");
        assert_eq!(j.to_op().unwrap(), l);
    }
}
