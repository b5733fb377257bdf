//! JSON verdict documents. Rationals are written as `"p/q"` strings (or plain
//! integers as strings) so nothing is lost on the way through JSON.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{Analysis, Checks};
use crate::engine::{Mlrf, Outcome};
use crate::linalg::{fmt_rational, parse_rational, Rational, Vector};
use crate::loops::TransitionPoly;
use crate::polyhedron::{AffineFunc, Polyhedron, Row};

pub const SCHEMA: &str = "mlrf-verdict/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: "mlrf".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDoc {
    pub coeffs: Vec<String>,
    pub constant: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub coeffs: Vec<String>,
    pub rel: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrentDoc {
    /// Rows over `(x, x')`.
    pub transitions: Vec<ConstraintDoc>,
    /// Rows over `x`.
    pub states: Vec<ConstraintDoc>,
    pub text: String,
    pub stabilized_at: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasonDoc {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationDoc {
    pub index: usize,
    pub generators: usize,
    pub new_generators: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChecksDoc {
    pub mlrf: Option<bool>,
    pub recurrent: Option<bool>,
    pub monotonic: Option<bool>,
    pub witness: Option<bool>,
}

impl From<Checks> for ChecksDoc {
    fn from(c: Checks) -> Self {
        Self {
            mlrf: c.mlrf,
            recurrent: c.recurrent,
            monotonic: c.monotonic,
            witness: c.witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDocument {
    pub schema: String,
    pub tool: ToolInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub vars: Vec<String>,
    pub mode: String,
    pub engine: String,
    pub route: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mlrf: Option<Vec<FunctionDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recurrent_set: Option<RecurrentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<ReasonDoc>,
    pub iterations: usize,
    pub diagnostics: Vec<IterationDoc>,
    pub checks: ChecksDoc,
    pub engines_agree: Option<bool>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema `{0}`")]
    Schema(String),
    #[error("malformed rational `{0}`")]
    Rational(String),
    #[error("malformed document: {0}")]
    Shape(String),
}

fn strs(v: &[Rational]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

fn rationals(v: &[String]) -> Result<Vector, ReportError> {
    v.iter()
        .map(|s| parse_rational(s).ok_or_else(|| ReportError::Rational(s.clone())))
        .collect()
}

fn rows_doc(p: &Polyhedron) -> Vec<ConstraintDoc> {
    let doc = |r: &Row, rel: &str| ConstraintDoc {
        coeffs: strs(&r.coeffs),
        rel: rel.into(),
        rhs: fmt_rational(&r.rhs),
    };
    p.eqs()
        .iter()
        .map(|r| doc(r, "="))
        .chain(p.ineqs().iter().map(|r| doc(r, "<=")))
        .collect()
}

/// Rebuilds a polyhedron of dimension `dim` from serialized rows.
pub fn rows_from_doc(dim: usize, rows: &[ConstraintDoc]) -> Result<Polyhedron, ReportError> {
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    for r in rows {
        let coeffs = rationals(&r.coeffs)?;
        if coeffs.len() != dim {
            return Err(ReportError::Shape(format!(
                "row has {} coefficients, expected {dim}",
                coeffs.len()
            )));
        }
        let rhs = parse_rational(&r.rhs).ok_or_else(|| ReportError::Rational(r.rhs.clone()))?;
        match r.rel.as_str() {
            "<=" => ineqs.push(Row::new(coeffs, rhs)),
            "=" => eqs.push(Row::new(coeffs, rhs)),
            other => return Err(ReportError::Shape(format!("unknown relation `{other}`"))),
        }
    }
    Ok(Polyhedron::new(dim, ineqs, eqs))
}

impl VerdictDocument {
    pub fn from_analysis(q: &TransitionPoly, a: &Analysis, opts: &crate::analysis::Options, file: Option<String>) -> Self {
        let names = q.names().to_vec();
        let v = &a.verdict;
        let mut doc = VerdictDocument {
            schema: SCHEMA.into(),
            tool: ToolInfo::default(),
            file,
            vars: names.clone(),
            mode: opts.mode.as_str().into(),
            engine: opts.engine.as_str().into(),
            route: a.route.into(),
            kind: v.kind().into(),
            depth: None,
            mlrf: None,
            recurrent_set: None,
            reason: None,
            iterations: v.iterations,
            diagnostics: v
                .trace
                .iter()
                .map(|t| IterationDoc {
                    index: t.index,
                    generators: t.generators,
                    new_generators: t.new_generators,
                    rows: t.rows,
                })
                .collect(),
            checks: a.checks.into(),
            engines_agree: a.engines_agree,
        };
        match &v.outcome {
            Outcome::Mlrf(m) => {
                doc.depth = Some(m.depth());
                doc.mlrf = Some(
                    m.components
                        .iter()
                        .map(|f| FunctionDoc {
                            coeffs: strs(&f.coeffs),
                            constant: fmt_rational(&f.constant),
                            text: f.display_with(&names).to_string(),
                        })
                        .collect(),
                );
            }
            Outcome::Nonterminating {
                set,
                stabilized_at,
                witness,
            } => {
                doc.recurrent_set = Some(RecurrentDoc {
                    transitions: rows_doc(set.transitions.poly()),
                    states: rows_doc(&set.states),
                    text: set.states.display_with(&names).to_string(),
                    stabilized_at: *stabilized_at,
                    witness: witness.as_ref().map(|w| strs(w)),
                });
            }
            Outcome::Unknown(r) => {
                doc.reason = Some(ReasonDoc {
                    code: r.code().into(),
                    message: r.to_string(),
                });
            }
        }
        doc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let doc: VerdictDocument = serde_json::from_str(text)?;
        if doc.schema != SCHEMA {
            return Err(ReportError::Schema(doc.schema));
        }
        Ok(doc)
    }

    pub fn mlrf_witness(&self) -> Result<Option<Mlrf>, ReportError> {
        let Some(fs) = &self.mlrf else { return Ok(None) };
        let comps = fs
            .iter()
            .map(|f| {
                let constant =
                    parse_rational(&f.constant).ok_or_else(|| ReportError::Rational(f.constant.clone()))?;
                Ok(AffineFunc::new(rationals(&f.coeffs)?, constant))
            })
            .collect::<Result<Vec<_>, ReportError>>()?;
        Ok(Some(Mlrf::new(comps)))
    }

    /// The recurrent transitions, over `(x, x')`.
    pub fn recurrent_witness(&self) -> Result<Option<Polyhedron>, ReportError> {
        match &self.recurrent_set {
            None => Ok(None),
            Some(r) => rows_from_doc(2 * self.vars.len(), &r.transitions).map(Some),
        }
    }

    pub fn integer_witness(&self) -> Result<Option<Vector>, ReportError> {
        match self.recurrent_set.as_ref().and_then(|r| r.witness.as_ref()) {
            None => Ok(None),
            Some(w) => rationals(w).map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze, Options};
    use crate::parse::parse_loop;

    fn roundtrip(src: &str) -> VerdictDocument {
        let file = parse_loop(src).unwrap();
        let q = file.slc.transition();
        let opts = Options::default();
        let a = analyze(&q, &opts).unwrap();
        let doc = VerdictDocument::from_analysis(&q, &a, &opts, None);
        let back = VerdictDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(doc, back);
        back
    }

    #[test]
    fn mlrf_document_round_trips() {
        let doc = roundtrip("vars: x\nguard: x >= 0\nupdate: x' = x - 1/2\n");
        assert_eq!(doc.kind, "MLRF");
        let m = doc.mlrf_witness().unwrap().unwrap();
        assert_eq!(m.depth(), 1);
    }

    #[test]
    fn recurrent_document_round_trips() {
        let doc = roundtrip("vars: x\nguard: x >= 0\nupdate: x' = x + 1\n");
        assert_eq!(doc.kind, "NONTERMINATING");
        let s = doc.recurrent_witness().unwrap().unwrap();
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn rejects_foreign_schema() {
        assert!(matches!(
            VerdictDocument::from_json(r#"{"schema": "other"}"#),
            Err(ReportError::Json(_)) | Err(ReportError::Schema(_))
        ));
    }
}
