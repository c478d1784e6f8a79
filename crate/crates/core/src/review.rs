//! The review document: studies, references, comparisons/outcomes, bias
//! domains, flow counts, and its on-disk JSON format.
//!
//! The project file is a single JSON document:
//!
//! ```json
//! { "schema_version": 1, "review": { ... } }
//! ```
//!
//! Loading tolerates unknown fields (they are reported as warnings, never
//! errors) so newer files still open. A different `schema_version` is an
//! explicit error.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::effects::{self, TwoByTwoTable};
use crate::error::{Error, Result};
use crate::pooling::{
    self, AnalysisSettings, Method, Model, PooledResult, QSource, StudyEstimate, StudyTable,
};
use crate::prisma::FlowDiagram;
use crate::rob::{BiasDomain, Judgment};

/// Current on-disk schema version.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Published,
    Unpublished,
    Both,
}

/// Free-text characteristics table for one study.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Characteristics {
    #[serde(default)]
    pub methods: String,
    #[serde(default)]
    pub participants: String,
    #[serde(default)]
    pub interventions: String,
    #[serde(default)]
    pub outcomes: String,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Study {
    /// Unique within a review; conventionally "FirstAuthor Year".
    pub id: String,
    pub data_source: DataSource,
    pub year: i32,
    #[serde(default)]
    pub characteristics: Characteristics,
    /// Domain id -> judgment.
    #[serde(default)]
    pub rob_judgments: BTreeMap<String, Judgment>,
}

/// A bibliographic record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    #[serde(default)]
    pub authors: Vec<String>,
    pub title: String,
    #[serde(default)]
    pub journal: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub volume: Option<String>,
    #[serde(default)]
    pub pages: Option<String>,
    /// Identifier type (PMID, DOI, ...) -> value.
    #[serde(default)]
    pub identifiers: BTreeMap<String, String>,
}

/// One study's data row in an outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyData {
    pub study_id: String,
    pub table: TwoByTwoTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataType {
    #[default]
    Dichotomous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub name: String,
    #[serde(default)]
    pub data_type: DataType,
    /// (group 1, group 2) column headings, e.g. ("Maxilla", "Mandible").
    pub group_labels: (String, String),
    /// (left, right) axis end labels of the forest plot.
    pub graph_labels: (String, String),
    #[serde(default)]
    pub settings: AnalysisSettings,
    #[serde(default)]
    pub rows: Vec<StudyData>,
}

impl Outcome {
    pub fn new(name: &str, group1: &str, group2: &str) -> Self {
        Self {
            name: name.to_string(),
            data_type: DataType::Dichotomous,
            group_labels: (group1.to_string(), group2.to_string()),
            graph_labels: (String::new(), String::new()),
            settings: AnalysisSettings::default(),
            rows: Vec::new(),
        }
    }

    pub fn row_for(&self, study_id: &str) -> Option<&StudyData> {
        self.rows.iter().find(|r| r.study_id == study_id)
    }

    /// Run the configured analysis over this outcome's rows.
    pub fn analyze(&self) -> Result<PooledResult> {
        self.settings.validate()?;
        if self.rows.is_empty() {
            return Err(Error::NoData(format!(
                "outcome `{}` has no study data",
                self.name
            )));
        }
        let tables: Vec<StudyTable> = self
            .rows
            .iter()
            .map(|r| StudyTable {
                id: r.study_id.clone(),
                table: r.table,
            })
            .collect();
        let s = &self.settings;
        let estimates = || -> Vec<StudyEstimate> {
            tables
                .iter()
                .map(|t| StudyEstimate {
                    id: t.id.clone(),
                    estimate: effects::estimate(s.measure, &t.table, s.ci_level),
                })
                .collect()
        };
        let mut result = match (s.method, s.model) {
            (Method::Peto, _) => pooling::pool_peto_fixed(&tables, s.ci_level),
            (Method::MantelHaenszel, Model::Fixed) => {
                pooling::pool_mh_fixed(&tables, s.measure, s.ci_level)
            }
            (Method::InverseVariance, Model::Fixed) => {
                pooling::pool_iv_fixed(&estimates(), s.ci_level)
            }
            (Method::InverseVariance, Model::Random) => {
                pooling::pool_random_dl(&estimates(), QSource::InverseVariance, s.ci_level)
            }
            (Method::MantelHaenszel, Model::Random) => {
                let fixed = pooling::pool_mh_fixed(&tables, s.measure, s.ci_level);
                let q_source = if fixed.pooled.estimable {
                    QSource::FixedPoint(fixed.pooled.analysis_value)
                } else {
                    QSource::InverseVariance
                };
                pooling::pool_random_dl(&estimates(), q_source, s.ci_level)
            }
        };
        result.settings = *s;
        Ok(result)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    #[serde(default)]
    pub outcomes: Vec<Outcome>,
}

/// Root document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub title: String,
    #[serde(default)]
    pub studies: Vec<Study>,
    #[serde(default)]
    pub included_refs: Vec<Reference>,
    #[serde(default)]
    pub pending_refs: Vec<Reference>,
    #[serde(default)]
    pub comparisons: Vec<Comparison>,
    #[serde(default)]
    pub rob_domains: Vec<BiasDomain>,
    #[serde(default)]
    pub flow: Option<FlowDiagram>,
    pub created: DateTime<Utc>,
    pub modified: DateTime<Utc>,
}

impl Review {
    /// A new empty review. The title must be non-empty.
    pub fn new(title: &str) -> Result<Self> {
        if title.trim().is_empty() {
            return Err(Error::Validation("review title must not be empty".into()));
        }
        let now = Utc::now();
        Ok(Self {
            title: title.to_string(),
            studies: Vec::new(),
            included_refs: Vec::new(),
            pending_refs: Vec::new(),
            comparisons: Vec::new(),
            rob_domains: Vec::new(),
            flow: None,
            created: now,
            modified: now,
        })
    }

    pub fn touch(&mut self) {
        self.modified = Utc::now();
    }

    /// Filesystem-safe slug of the title, used in figure file names.
    pub fn slug(&self) -> String {
        let mut slug = String::new();
        let mut pending_dash = false;
        for ch in self.title.chars() {
            if ch.is_ascii_alphanumeric() {
                if pending_dash && !slug.is_empty() {
                    slug.push('-');
                }
                pending_dash = false;
                slug.push(ch.to_ascii_lowercase());
            } else {
                pending_dash = true;
            }
        }
        if slug.is_empty() {
            slug.push_str("review");
        }
        slug
    }

    pub fn add_study(&mut self, id: &str, source: DataSource, year: i32) -> Result<()> {
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::Validation("study id must not be empty".into()));
        }
        if !(1800..=2100).contains(&year) {
            return Err(Error::Validation(format!(
                "study year {year} outside the plausible range [1800, 2100]"
            )));
        }
        if self.studies.iter().any(|s| s.id == id) {
            return Err(Error::Conflict(format!("study `{id}` already exists")));
        }
        self.studies.push(Study {
            id: id.to_string(),
            data_source: source,
            year,
            characteristics: Characteristics::default(),
            rob_judgments: BTreeMap::new(),
        });
        Ok(())
    }

    pub fn study(&self, id: &str) -> Option<&Study> {
        self.studies.iter().find(|s| s.id == id)
    }

    /// Find or create a comparison by name.
    pub fn ensure_comparison(&mut self, name: &str) -> &mut Comparison {
        if let Some(pos) = self.comparisons.iter().position(|c| c.name == name) {
            return &mut self.comparisons[pos];
        }
        self.comparisons.push(Comparison {
            name: name.to_string(),
            outcomes: Vec::new(),
        });
        self.comparisons.last_mut().unwrap()
    }

    /// Resolve an outcome by optional comparison/outcome names; defaults to
    /// the first outcome of the first comparison.
    pub fn find_outcome(
        &self,
        comparison: Option<&str>,
        outcome: Option<&str>,
    ) -> Result<&Outcome> {
        let comp = match comparison {
            Some(name) => self
                .comparisons
                .iter()
                .find(|c| c.name == name)
                .ok_or_else(|| Error::NotFound(format!("no comparison `{name}`")))?,
            None => self
                .comparisons
                .first()
                .ok_or_else(|| Error::NotFound("the review has no comparisons".into()))?,
        };
        match outcome {
            Some(name) => comp
                .outcomes
                .iter()
                .find(|o| o.name == name)
                .ok_or_else(|| Error::NotFound(format!("no outcome `{name}`"))),
            None => comp.outcomes.first().ok_or_else(|| {
                Error::NotFound(format!("comparison `{}` has no outcomes", comp.name))
            }),
        }
    }

    pub fn find_outcome_mut(
        &mut self,
        comparison: Option<&str>,
        outcome: Option<&str>,
    ) -> Result<&mut Outcome> {
        let comp = match comparison {
            Some(name) => self
                .comparisons
                .iter_mut()
                .find(|c| c.name == name)
                .ok_or_else(|| Error::NotFound(format!("no comparison `{name}`")))?,
            None => self
                .comparisons
                .first_mut()
                .ok_or_else(|| Error::NotFound("the review has no comparisons".into()))?,
        };
        match outcome {
            Some(name) => comp
                .outcomes
                .iter_mut()
                .find(|o| o.name == name)
                .ok_or_else(|| Error::NotFound(format!("no outcome `{name}`"))),
            None => comp
                .outcomes
                .first_mut()
                .ok_or_else(|| Error::NotFound("the comparison has no outcomes".into())),
        }
    }

    /// Store a study's 2x2 counts in an outcome, replacing any existing row
    /// for that study (at most one row per study per outcome).
    pub fn set_data(
        &mut self,
        comparison: Option<&str>,
        outcome: Option<&str>,
        study_id: &str,
        table: TwoByTwoTable,
    ) -> Result<()> {
        if self.study(study_id).is_none() {
            return Err(Error::NotFound(format!("no study `{study_id}`")));
        }
        let target = self.find_outcome_mut(comparison, outcome)?;
        match target.rows.iter_mut().find(|r| r.study_id == study_id) {
            Some(row) => row.table = table,
            None => target.rows.push(StudyData {
                study_id: study_id.to_string(),
                table,
            }),
        }
        Ok(())
    }

    /// Structural invariants: unique study ids, rows referencing known
    /// studies, one row per study per outcome, valid settings and domains.
    pub fn validate(&self) -> Result<()> {
        if self.title.trim().is_empty() {
            return Err(Error::Validation("review title must not be empty".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for study in &self.studies {
            if study.id.trim().is_empty() {
                return Err(Error::Validation("study id must not be empty".into()));
            }
            if !(1800..=2100).contains(&study.year) {
                return Err(Error::Validation(format!(
                    "study `{}` year {} outside [1800, 2100]",
                    study.id, study.year
                )));
            }
            if !seen.insert(&study.id) {
                return Err(Error::Validation(format!(
                    "duplicate study id `{}`",
                    study.id
                )));
            }
        }
        for comparison in &self.comparisons {
            for outcome in &comparison.outcomes {
                outcome.settings.validate()?;
                let mut row_ids = std::collections::BTreeSet::new();
                for row in &outcome.rows {
                    if !seen.contains(&row.study_id) {
                        return Err(Error::Validation(format!(
                            "outcome `{}` references unknown study `{}`",
                            outcome.name, row.study_id
                        )));
                    }
                    if !row_ids.insert(&row.study_id) {
                        return Err(Error::Validation(format!(
                            "outcome `{}` has more than one row for study `{}`",
                            outcome.name, row.study_id
                        )));
                    }
                }
            }
        }
        for reference in self.included_refs.iter().chain(&self.pending_refs) {
            if reference.title.is_empty() {
                return Err(Error::Validation("reference title must not be empty".into()));
            }
        }
        let mut orders = std::collections::BTreeSet::new();
        for domain in &self.rob_domains {
            if domain.active && !orders.insert(domain.order) {
                return Err(Error::Validation(format!(
                    "active risk-of-bias domains share order {}",
                    domain.order
                )));
            }
        }
        if let Some(flow) = &self.flow {
            flow.validate()?;
        }
        Ok(())
    }

    // ---- persistence ----

    pub fn to_json(&self) -> String {
        let file = ProjectFile {
            schema_version: SCHEMA_VERSION,
            review: self.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("review serializes");
        text.push('\n');
        text
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Parse a project document from JSON text.
    pub fn from_json(text: &str) -> Result<Loaded> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            message: e.to_string(),
            line: Some(e.line()),
            field: None,
        })?;
        let version = value
            .get("schema_version")
            .ok_or_else(|| Error::Parse {
                message: "missing `schema_version`".into(),
                line: None,
                field: Some("schema_version".into()),
            })?
            .as_u64()
            .ok_or_else(|| Error::Parse {
                message: "`schema_version` must be an integer".into(),
                line: None,
                field: Some("schema_version".into()),
            })?;
        if version != SCHEMA_VERSION {
            return Err(Error::Version {
                found: version,
                expected: SCHEMA_VERSION,
            });
        }

        let mut warnings = Vec::new();
        schema::collect_unknown_fields(&value, &mut warnings);

        let file: ProjectFile = serde_json::from_value(value).map_err(|e| Error::Parse {
            message: e.to_string(),
            line: None,
            field: None,
        })?;
        file.review.validate()?;
        Ok(Loaded {
            review: file.review,
            warnings,
        })
    }

    pub fn load(path: &Path) -> Result<Loaded> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// A loaded review with any forward-compatibility warnings.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub review: Review,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ProjectFile {
    schema_version: u64,
    review: Review,
}

/// Known-field tables for the forward-compatibility walker. Unknown keys
/// load fine but are reported so typos and newer-schema fields are visible.
mod schema {
    use serde_json::Value;

    #[derive(Clone, Copy)]
    enum Field {
        Leaf,
        Obj(Kind),
        List(Kind),
        /// Map of string -> object of `Kind`.
        MapObj(Kind),
        /// Map of string -> scalar.
        MapLeaf,
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Root,
        Review,
        Study,
        Characteristics,
        Reference,
        Comparison,
        Outcome,
        Settings,
        StudyData,
        Table,
        BiasDomain,
        Judgment,
        Flow,
        Reason,
    }

    fn fields(kind: Kind) -> &'static [(&'static str, Field)] {
        match kind {
            Kind::Root => &[
                ("schema_version", Field::Leaf),
                ("review", Field::Obj(Kind::Review)),
            ],
            Kind::Review => &[
                ("title", Field::Leaf),
                ("studies", Field::List(Kind::Study)),
                ("included_refs", Field::List(Kind::Reference)),
                ("pending_refs", Field::List(Kind::Reference)),
                ("comparisons", Field::List(Kind::Comparison)),
                ("rob_domains", Field::List(Kind::BiasDomain)),
                ("flow", Field::Obj(Kind::Flow)),
                ("created", Field::Leaf),
                ("modified", Field::Leaf),
            ],
            Kind::Study => &[
                ("id", Field::Leaf),
                ("data_source", Field::Leaf),
                ("year", Field::Leaf),
                ("characteristics", Field::Obj(Kind::Characteristics)),
                ("rob_judgments", Field::MapObj(Kind::Judgment)),
            ],
            Kind::Characteristics => &[
                ("methods", Field::Leaf),
                ("participants", Field::Leaf),
                ("interventions", Field::Leaf),
                ("outcomes", Field::Leaf),
                ("notes", Field::Leaf),
            ],
            Kind::Reference => &[
                ("authors", Field::Leaf),
                ("title", Field::Leaf),
                ("journal", Field::Leaf),
                ("year", Field::Leaf),
                ("volume", Field::Leaf),
                ("pages", Field::Leaf),
                ("identifiers", Field::MapLeaf),
            ],
            Kind::Comparison => &[
                ("name", Field::Leaf),
                ("outcomes", Field::List(Kind::Outcome)),
            ],
            Kind::Outcome => &[
                ("name", Field::Leaf),
                ("data_type", Field::Leaf),
                ("group_labels", Field::Leaf),
                ("graph_labels", Field::Leaf),
                ("settings", Field::Obj(Kind::Settings)),
                ("rows", Field::List(Kind::StudyData)),
            ],
            Kind::Settings => &[
                ("method", Field::Leaf),
                ("model", Field::Leaf),
                ("measure", Field::Leaf),
                ("ci_level", Field::Leaf),
                ("totals", Field::Leaf),
            ],
            Kind::StudyData => &[
                ("study_id", Field::Leaf),
                ("table", Field::Obj(Kind::Table)),
            ],
            Kind::Table => &[
                ("events1", Field::Leaf),
                ("total1", Field::Leaf),
                ("events2", Field::Leaf),
                ("total2", Field::Leaf),
            ],
            Kind::BiasDomain => &[
                ("id", Field::Leaf),
                ("question", Field::Leaf),
                ("active", Field::Leaf),
                ("order", Field::Leaf),
            ],
            Kind::Judgment => &[("level", Field::Leaf), ("support", Field::Leaf)],
            Kind::Flow => &[
                ("identified_db", Field::Leaf),
                ("identified_other", Field::Leaf),
                ("after_dedup", Field::Leaf),
                ("screened", Field::Leaf),
                ("excluded_screening", Field::Leaf),
                ("fulltext_assessed", Field::Leaf),
                ("fulltext_excluded", Field::List(Kind::Reason)),
                ("qualitative_included", Field::Leaf),
                ("quantitative_included", Field::Leaf),
            ],
            Kind::Reason => &[("reason", Field::Leaf), ("n", Field::Leaf)],
        }
    }

    pub fn collect_unknown_fields(value: &Value, warnings: &mut Vec<String>) {
        walk(value, Kind::Root, "", warnings);
    }

    fn walk(value: &Value, kind: Kind, path: &str, warnings: &mut Vec<String>) {
        let Value::Object(map) = value else { return };
        for (key, child) in map {
            let child_path = if path.is_empty() {
                key.clone()
            } else {
                format!("{path}.{key}")
            };
            match fields(kind).iter().find(|(name, _)| name == key) {
                None => warnings.push(format!("unknown field `{child_path}` ignored")),
                Some((_, Field::Leaf)) | Some((_, Field::MapLeaf)) => {}
                Some((_, Field::Obj(inner))) => walk(child, *inner, &child_path, warnings),
                Some((_, Field::List(inner))) => {
                    if let Value::Array(items) = child {
                        for (i, item) in items.iter().enumerate() {
                            walk(item, *inner, &format!("{child_path}[{i}]"), warnings);
                        }
                    }
                }
                Some((_, Field::MapObj(inner))) => {
                    if let Value::Object(entries) = child {
                        for (name, item) in entries {
                            walk(item, *inner, &format!("{child_path}.{name}"), warnings);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_review_validates_title() {
        let review = Review::new("Maxilla vs. Mandible for Miniscrew Stability").unwrap();
        assert_eq!(review.title, "Maxilla vs. Mandible for Miniscrew Stability");
        assert!(review.studies.is_empty());
        assert!(Review::new("").is_err());
        assert!(Review::new("   ").is_err());
    }

    #[test]
    fn slug_is_filesystem_friendly() {
        let review = Review::new("Maxilla vs. Mandible for Miniscrew Stability").unwrap();
        assert_eq!(review.slug(), "maxilla-vs-mandible-for-miniscrew-stability");
        let odd = Review::new("***").unwrap();
        assert_eq!(odd.slug(), "review");
    }

    #[test]
    fn add_study_and_duplicates() {
        let mut review = Review::new("T").unwrap();
        review
            .add_study("Antoszewska 2009", DataSource::Published, 2009)
            .unwrap();
        assert_eq!(review.studies.len(), 1);
        let err = review.add_study("Antoszewska 2009", DataSource::Published, 2009);
        assert!(matches!(err, Err(Error::Conflict(_))));
        assert!(review.add_study("", DataSource::Published, 2009).is_err());
        assert!(review
            .add_study("X 1776", DataSource::Published, 1776)
            .is_err());
    }

    #[test]
    fn seventeen_distinct_adds() {
        let mut review = Review::new("T").unwrap();
        for i in 0..17 {
            review
                .add_study(&format!("Study {i}"), DataSource::Both, 2000 + i)
                .unwrap();
        }
        assert_eq!(review.studies.len(), 17);
    }

    fn worked_review() -> Review {
        let mut review = Review::new("Maxilla vs. Mandible for Miniscrew Stability").unwrap();
        review
            .add_study("Wu 2009", DataSource::Published, 2009)
            .unwrap();
        review
            .add_study("Miyawaki 2003", DataSource::Published, 2003)
            .unwrap();
        let comparison = review.ensure_comparison("Miniscrew Stability");
        let mut outcome = Outcome::new("Miniscrew Stability", "Maxilla", "Mandible");
        outcome.graph_labels = (
            "Higher Success (Mandible)".into(),
            "Higher Success (Maxilla)".into(),
        );
        comparison.outcomes.push(outcome);
        review
            .set_data(
                None,
                None,
                "Wu 2009",
                TwoByTwoTable::new(243, 268, 118, 135).unwrap(),
            )
            .unwrap();
        review
            .set_data(
                None,
                None,
                "Miyawaki 2003",
                TwoByTwoTable::new(53, 63, 51, 61).unwrap(),
            )
            .unwrap();
        review
    }

    #[test]
    fn set_data_replaces_existing_row() {
        let mut review = worked_review();
        review
            .set_data(
                None,
                None,
                "Wu 2009",
                TwoByTwoTable::new(1, 2, 1, 2).unwrap(),
            )
            .unwrap();
        let outcome = review.find_outcome(None, None).unwrap();
        assert_eq!(outcome.rows.len(), 2);
        assert_eq!(outcome.row_for("Wu 2009").unwrap().table.events1(), 1);
    }

    #[test]
    fn set_data_unknown_study_fails() {
        let mut review = worked_review();
        let err = review.set_data(None, None, "Ghost", TwoByTwoTable::new(1, 2, 1, 2).unwrap());
        assert!(matches!(err, Err(Error::NotFound(_))));
    }

    #[test]
    fn analyze_dispatches_on_settings() {
        let review = worked_review();
        let outcome = review.find_outcome(None, None).unwrap();
        let result = outcome.analyze().unwrap();
        assert_eq!(result.settings.method, Method::MantelHaenszel);
        assert!((result.pooled.point - 1.270429).abs() < 1e-3);

        let mut iv = outcome.clone();
        iv.settings.method = Method::InverseVariance;
        let result = iv.analyze().unwrap();
        assert!((result.pooled.point - 1.273469).abs() < 1e-3);

        let mut random = outcome.clone();
        random.settings.method = Method::InverseVariance;
        random.settings.model = Model::Random;
        let result = random.analyze().unwrap();
        // tau^2 = 0 here, so random matches fixed.
        assert!((result.pooled.point - 1.273469).abs() < 1e-3);

        let mut peto = outcome.clone();
        peto.settings.method = Method::Peto;
        let result = peto.analyze().unwrap();
        assert!((result.pooled.point - 1.277398).abs() < 1e-3);

        let mut mh_random = outcome.clone();
        mh_random.settings.model = Model::Random;
        let result = mh_random.analyze().unwrap();
        assert!((result.heterogeneity.q - 0.254304).abs() < 1e-4);
    }

    #[test]
    fn analyze_without_rows_is_no_data() {
        let outcome = Outcome::new("Empty", "A", "B");
        assert!(matches!(outcome.analyze(), Err(Error::NoData(_))));
    }

    #[test]
    fn round_trip_identity() {
        let review = worked_review();
        let loaded = Review::from_json(&review.to_json()).unwrap();
        assert_eq!(loaded.review, review);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn save_load_round_trip_on_disk() {
        let review = worked_review();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("review.json");
        review.save(&path).unwrap();
        let loaded = Review::load(&path).unwrap();
        assert_eq!(loaded.review, review);
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let review = worked_review();
        let text = review.to_json();
        let truncated = &text[..text.len() / 2];
        match Review::from_json(truncated) {
            Err(Error::Parse { line, .. }) => assert!(line.is_some()),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let review = worked_review();
        let text = review
            .to_json()
            .replace("\"schema_version\": 1", "\"schema_version\": 99");
        match Review::from_json(&text) {
            Err(Error::Version {
                found: 99,
                expected: 1,
            }) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn missing_version_is_parse_error() {
        assert!(matches!(
            Review::from_json("{\"review\": {}}"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn unknown_fields_warn_but_load() {
        let review = worked_review();
        let mut value: serde_json::Value = serde_json::from_str(&review.to_json()).unwrap();
        value["review"]["future_feature"] = serde_json::json!({"x": 1});
        value["review"]["studies"][0]["novel"] = serde_json::json!(true);
        let loaded = Review::from_json(&value.to_string()).unwrap();
        assert_eq!(loaded.review, review);
        assert_eq!(loaded.warnings.len(), 2);
        assert!(loaded
            .warnings
            .iter()
            .any(|w| w.contains("review.future_feature")));
        assert!(loaded
            .warnings
            .iter()
            .any(|w| w.contains("review.studies[0].novel")));
    }

    #[test]
    fn semantic_violations_rejected_on_load() {
        let review = worked_review();
        let mut value: serde_json::Value = serde_json::from_str(&review.to_json()).unwrap();
        // Point a data row at a study that does not exist.
        value["review"]["comparisons"][0]["outcomes"][0]["rows"][0]["study_id"] =
            serde_json::json!("Ghost");
        assert!(matches!(
            Review::from_json(&value.to_string()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn invalid_table_rejected_on_load() {
        let review = worked_review();
        let text = review
            .to_json()
            .replace("\"events1\": 243", "\"events1\": 400");
        assert!(matches!(Review::from_json(&text), Err(Error::Parse { .. })));
    }
}
