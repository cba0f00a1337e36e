//! Newline-delimited case and prediction files.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entail::Verdict;
use crate::logic::{parse, Formula};

/// A three-way entailment label as written in data files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entailment,
    Contradiction,
    Neutral,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Contradiction, Label::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Contradiction => "contradiction",
            Label::Neutral => "neutral",
        }
    }

    pub fn verdict(self) -> Verdict {
        match self {
            Label::Entailment => Verdict::Entailment,
            Label::Contradiction => Verdict::Contradiction,
            Label::Neutral => Verdict::Neutral,
        }
    }

    /// `None` for `PremiseInconsistent`, which has no label counterpart.
    pub fn from_verdict(v: Verdict) -> Option<Label> {
        match v {
            Verdict::Entailment => Some(Label::Entailment),
            Verdict::Contradiction => Some(Label::Contradiction),
            Verdict::Neutral => Some(Label::Neutral),
            Verdict::PremiseInconsistent => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "entailment" => Ok(Label::Entailment),
            "contradiction" => Ok(Label::Contradiction),
            "neutral" => Ok(Label::Neutral),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// Where a candidate axiom comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomSource {
    BackgroundLaw,
    Context,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axiom {
    pub id: String,
    #[serde(rename = "form", with = "crate::logic::as_text")]
    pub formula: Formula,
    pub gloss: String,
    pub source: AxiomSource,
}

/// One entailment instance with its legal-interpretation label and the
/// candidate axioms available for abduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub id: String,
    pub premise_text: String,
    pub premise_forms: Vec<Formula>,
    pub hypothesis_text: String,
    pub hypothesis_form: Formula,
    pub gold_legal: Label,
    pub axiom_pool: Vec<Axiom>,
}

impl Case {
    pub fn axiom(&self, id: &str) -> Option<&Axiom> {
        self.axiom_pool.iter().find(|a| a.id == id)
    }

    /// One JSON line in the dataset schema.
    pub fn to_line(&self) -> String {
        let record = CaseRecord {
            id: self.id.clone(),
            premise_text: self.premise_text.clone(),
            premise_forms: self.premise_forms.iter().map(ToString::to_string).collect(),
            hypothesis_text: self.hypothesis_text.clone(),
            hypothesis_form: self.hypothesis_form.to_string(),
            gold_legal: self.gold_legal,
            axiom_pool: self.axiom_pool.iter().map(AxiomRecord::from).collect(),
        };
        serde_json::to_string(&record).expect("case record serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseRecord {
    id: String,
    premise_text: String,
    premise_forms: Vec<String>,
    hypothesis_text: String,
    hypothesis_form: String,
    gold_legal: Label,
    axiom_pool: Vec<AxiomRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxiomRecord {
    id: String,
    form: String,
    gloss: String,
    source: AxiomSource,
}

impl From<&Axiom> for AxiomRecord {
    fn from(a: &Axiom) -> Self {
        AxiomRecord {
            id: a.id.clone(),
            form: a.formula.to_string(),
            gloss: a.gloss.clone(),
            source: a.source,
        }
    }
}

/// An external system's answer for one case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub id: String,
    pub predicted: Label,
    pub claims_formal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Non-blank lines with 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<Case>, DatasetError> {
    parse_dataset(&read(path.as_ref())?)
}

/// All-or-nothing: the first bad line aborts the load.
pub fn parse_dataset(text: &str) -> Result<Vec<Case>, DatasetError> {
    let mut seen = HashSet::new();
    let mut cases = Vec::new();
    for (line, raw) in records(text) {
        let err = |reason: String| DatasetError::Parse { line, reason };
        let record: CaseRecord = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
        if record.id.is_empty() {
            return Err(err("field `id`: empty".into()));
        }
        let form = |field: String, text: &str| parse(text).map_err(|e| err(format!("field `{field}`: {e}")));
        let premise_forms = record
            .premise_forms
            .iter()
            .enumerate()
            .map(|(i, t)| form(format!("premise_forms[{i}]"), t))
            .collect::<Result<Vec<_>, _>>()?;
        let hypothesis_form = form("hypothesis_form".into(), &record.hypothesis_form)?;
        let mut pool_ids = HashSet::new();
        let mut axiom_pool = Vec::with_capacity(record.axiom_pool.len());
        for (i, a) in record.axiom_pool.into_iter().enumerate() {
            if !pool_ids.insert(a.id.clone()) {
                return Err(err(format!("field `axiom_pool[{i}]`: duplicate axiom id `{}`", a.id)));
            }
            axiom_pool.push(Axiom {
                formula: form(format!("axiom_pool[{i}].form"), &a.form)?,
                id: a.id,
                gloss: a.gloss,
                source: a.source,
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(DatasetError::DuplicateId { line, id: record.id });
        }
        cases.push(Case {
            id: record.id,
            premise_text: record.premise_text,
            premise_forms,
            hypothesis_text: record.hypothesis_text,
            hypothesis_form,
            gold_legal: record.gold_legal,
            axiom_pool,
        });
    }
    Ok(cases)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>, DatasetError> {
    parse_predictions(&read(path.as_ref())?)
}

pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, DatasetError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, raw) in records(text) {
        let p: Prediction = serde_json::from_str(raw).map_err(|e| DatasetError::Parse {
            line,
            reason: e.to_string(),
        })?;
        if !seen.insert(p.id.clone()) {
            return Err(DatasetError::DuplicateId { line, id: p.id });
        }
        out.push(p);
    }
    Ok(out)
}

/// Newline-delimited rendering of predictions, one JSON object per line.
pub fn predictions_to_lines(preds: &[Prediction]) -> String {
    preds
        .iter()
        .map(|p| serde_json::to_string(p).expect("prediction serializes") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"id":"c1","premise_text":"Recipient shall return documents.","premise_forms":["ob_return(docs)"],"hypothesis_text":"Recipient shall destroy documents.","hypothesis_form":"ob_destroy(docs)","gold_legal":"entailment","axiom_pool":[{"id":"a1","form":"ob_return(docs) -> ob_destroy(docs)","gloss":"Return includes destruction.","source":"background-law"}]}"#;

    #[test]
    fn one_line_one_case() {
        let cases = parse_dataset(LINE).unwrap();
        assert_eq!(cases.len(), 1);
        let c = &cases[0];
        assert_eq!(c.id, "c1");
        assert_eq!(c.gold_legal, Label::Entailment);
        assert_eq!(c.axiom_pool[0].source, AxiomSource::BackgroundLaw);
        assert_eq!(
            c.axiom("a1").unwrap().formula.to_string(),
            "ob_return(docs) -> ob_destroy(docs)"
        );
        assert_eq!(parse_dataset(&c.to_line()).unwrap(), cases);
    }

    #[test]
    fn bad_hypothesis_names_field() {
        let bad = LINE.replace(
            r#""hypothesis_form":"ob_destroy(docs)""#,
            r#""hypothesis_form":"ob_destroy(docs""#,
        );
        match parse_dataset(&bad) {
            Err(DatasetError::Parse { line, reason }) => {
                assert_eq!(line, 1);
                assert!(reason.contains("hypothesis_form"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_case_ids() {
        let text = format!("{LINE}\n\n{LINE}\n");
        match parse_dataset(&text) {
            Err(DatasetError::DuplicateId { line, id }) => {
                assert_eq!(line, 3);
                assert_eq!(id, "c1");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_axiom_ids_and_unknown_fields() {
        let dup = LINE.replace("]}", r#",{"id":"a1","form":"c","gloss":"g","source":"custom"}]}"#);
        assert!(matches!(parse_dataset(&dup), Err(DatasetError::Parse { .. })));
        let extra = LINE.replacen("{", r#"{"extra":1,"#, 1);
        assert!(matches!(parse_dataset(&extra), Err(DatasetError::Parse { .. })));
        let bad_source = LINE.replace("background-law", "statute");
        assert!(matches!(parse_dataset(&bad_source), Err(DatasetError::Parse { .. })));
    }

    #[test]
    fn empty_input_is_empty_dataset() {
        assert!(parse_dataset("").unwrap().is_empty());
    }

    #[test]
    fn predictions() {
        let text = "{\"id\":\"c1\",\"predicted\":\"neutral\",\"claims_formal\":true}\n{\"id\":\"c2\",\"predicted\":\"entailment\",\"claims_formal\":false,\"rationale\":\"r\"}\n";
        let preds = parse_predictions(text).unwrap();
        assert_eq!(preds.len(), 2);
        assert_eq!(preds[1].rationale.as_deref(), Some("r"));
        assert_eq!(predictions_to_lines(&preds), text);
        let dup = "{\"id\":\"c1\",\"predicted\":\"neutral\",\"claims_formal\":true}\n".repeat(2);
        assert!(matches!(
            parse_predictions(&dup),
            Err(DatasetError::DuplicateId { line: 2, .. })
        ));
    }
}
