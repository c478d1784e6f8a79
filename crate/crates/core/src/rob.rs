//! Risk-of-bias domains, per-study judgments, and the summary matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::review::Review;

/// A quality-assessment item. Deactivated domains keep their stored
/// judgments but are hidden from the summary matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasDomain {
    pub id: String,
    pub question: String,
    pub active: bool,
    pub order: u32,
}

/// Author's judgment for one study on one domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgmentLevel {
    Low,
    Unclear,
    High,
}

impl JudgmentLevel {
    pub fn glyph(self) -> &'static str {
        match self {
            JudgmentLevel::Low => "+",
            JudgmentLevel::Unclear => "?",
            JudgmentLevel::High => "\u{2212}",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub level: JudgmentLevel,
    #[serde(default)]
    pub support: String,
}

/// Built-in domain schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobScheme {
    /// The seven standard randomized-trial criteria.
    Cochrane7,
    /// Six Newcastle-Ottawa-derived questions for non-randomized studies.
    Nos6,
}

impl std::str::FromStr for RobScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cochrane7" => Ok(RobScheme::Cochrane7),
            "nos6" => Ok(RobScheme::Nos6),
            other => Err(Error::Validation(format!(
                "unknown risk-of-bias scheme `{other}` (expected cochrane7 or nos6)"
            ))),
        }
    }
}

const COCHRANE7: [(&str, &str); 7] = [
    ("sequence-generation", "Random sequence generation"),
    ("allocation-concealment", "Allocation concealment"),
    (
        "blinding-participants",
        "Blinding of participants and personnel",
    ),
    ("blinding-assessors", "Blinding of assessors"),
    ("incomplete-outcome-data", "Incomplete outcome data"),
    ("selective-reporting", "Selective reporting"),
    ("other-bias", "Other threats to validity"),
];

const NOS6: [(&str, &str); 6] = [
    ("case-definition", "Is the case definition adequate?"),
    ("representativeness", "Are the cases representative?"),
    (
        "control-definition",
        "Is the definition of controls adequate?",
    ),
    ("exposure-confirmation", "Is the exposure confirmed?"),
    (
        "same-confirmation",
        "Is the same confirmation method used for cases and controls?",
    ),
    ("non-response", "Is the non-response rate acceptable?"),
];

/// The domain list for a scheme, active, in canonical order.
pub fn default_domains(scheme: RobScheme) -> Vec<BiasDomain> {
    let items: &[(&str, &str)] = match scheme {
        RobScheme::Cochrane7 => &COCHRANE7,
        RobScheme::Nos6 => &NOS6,
    };
    items
        .iter()
        .enumerate()
        .map(|(i, (id, question))| BiasDomain {
            id: (*id).to_string(),
            question: (*question).to_string(),
            active: true,
            order: i as u32,
        })
        .collect()
}

/// Store (or overwrite) a judgment for a study on a domain.
pub fn set_judgment(
    review: &mut Review,
    study_id: &str,
    domain_id: &str,
    level: JudgmentLevel,
    support: &str,
) -> Result<()> {
    if !review.rob_domains.iter().any(|d| d.id == domain_id) {
        return Err(Error::NotFound(format!(
            "no risk-of-bias domain `{domain_id}`"
        )));
    }
    let study = review
        .studies
        .iter_mut()
        .find(|s| s.id == study_id)
        .ok_or_else(|| Error::NotFound(format!("no study `{study_id}`")))?;
    study.rob_judgments.insert(
        domain_id.to_string(),
        Judgment {
            level,
            support: support.to_string(),
        },
    );
    Ok(())
}

pub fn deactivate_domain(review: &mut Review, domain_id: &str) -> Result<()> {
    set_domain_active(review, domain_id, false)
}

pub fn activate_domain(review: &mut Review, domain_id: &str) -> Result<()> {
    set_domain_active(review, domain_id, true)
}

fn set_domain_active(review: &mut Review, domain_id: &str, active: bool) -> Result<()> {
    let domain = review
        .rob_domains
        .iter_mut()
        .find(|d| d.id == domain_id)
        .ok_or_else(|| Error::NotFound(format!("no risk-of-bias domain `{domain_id}`")))?;
    domain.active = active;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveDirection {
    Up,
    Down,
}

/// Swap a domain's position with its neighbour in the order sequence.
/// Moving the first domain up (or the last down) is a no-op.
pub fn reorder_domain(
    review: &mut Review,
    domain_id: &str,
    direction: MoveDirection,
) -> Result<()> {
    let mut order: Vec<usize> = (0..review.rob_domains.len()).collect();
    order.sort_by_key(|&i| review.rob_domains[i].order);
    let pos = order
        .iter()
        .position(|&i| review.rob_domains[i].id == domain_id)
        .ok_or_else(|| Error::NotFound(format!("no risk-of-bias domain `{domain_id}`")))?;
    let neighbour = match direction {
        MoveDirection::Up if pos > 0 => pos - 1,
        MoveDirection::Down if pos + 1 < order.len() => pos + 1,
        _ => return Ok(()),
    };
    let (i, j) = (order[pos], order[neighbour]);
    let tmp = review.rob_domains[i].order;
    review.rob_domains[i].order = review.rob_domains[j].order;
    review.rob_domains[j].order = tmp;
    Ok(())
}

/// The study x active-domain grid for the summary figure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobMatrix {
    /// Active domains in display order.
    pub domains: Vec<BiasDomain>,
    /// Study identifiers, sorted.
    pub studies: Vec<String>,
    /// `cells[study][domain]`, None where no judgment is stored.
    pub cells: Vec<Vec<Option<JudgmentLevel>>>,
}

/// Build the matrix: rows ordered by study id, columns by domain order.
pub fn summary_matrix(review: &Review) -> RobMatrix {
    let mut domains: Vec<BiasDomain> = review
        .rob_domains
        .iter()
        .filter(|d| d.active)
        .cloned()
        .collect();
    domains.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| a.id.cmp(&b.id)));

    let mut studies: Vec<&crate::review::Study> = review.studies.iter().collect();
    studies.sort_by(|a, b| a.id.cmp(&b.id));

    let cells = studies
        .iter()
        .map(|s| {
            domains
                .iter()
                .map(|d| s.rob_judgments.get(&d.id).map(|j| j.level))
                .collect()
        })
        .collect();

    RobMatrix {
        domains,
        studies: studies.iter().map(|s| s.id.clone()).collect(),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::review::DataSource;

    fn review_with_studies(n: usize) -> Review {
        let mut review = Review::new("RoB test").unwrap();
        for i in 0..n {
            review
                .add_study(&format!("Study {i:02}"), DataSource::Published, 2009)
                .unwrap();
        }
        review.rob_domains = default_domains(RobScheme::Nos6);
        review
    }

    #[test]
    fn cochrane7_has_the_seven_criteria_in_order() {
        let domains = default_domains(RobScheme::Cochrane7);
        assert_eq!(domains.len(), 7);
        assert_eq!(domains[0].question, "Random sequence generation");
        assert_eq!(domains[1].question, "Allocation concealment");
        assert_eq!(domains[6].question, "Other threats to validity");
        assert!(domains.iter().all(|d| d.active));
    }

    #[test]
    fn nos6_first_question_is_case_definition() {
        let domains = default_domains(RobScheme::Nos6);
        assert_eq!(domains.len(), 6);
        assert_eq!(domains[0].question, "Is the case definition adequate?");
    }

    #[test]
    fn unknown_scheme_errors() {
        assert!("xyz".parse::<RobScheme>().is_err());
        assert!("cochrane7".parse::<RobScheme>().is_ok());
    }

    #[test]
    fn set_and_overwrite_judgment() {
        let mut review = review_with_studies(1);
        set_judgment(
            &mut review,
            "Study 00",
            "non-response",
            JudgmentLevel::Low,
            "",
        )
        .unwrap();
        set_judgment(
            &mut review,
            "Study 00",
            "non-response",
            JudgmentLevel::High,
            "updated",
        )
        .unwrap();
        let j = &review.studies[0].rob_judgments["non-response"];
        assert_eq!(j.level, JudgmentLevel::High);
        assert_eq!(j.support, "updated");
    }

    #[test]
    fn unknown_study_or_domain_not_found() {
        let mut review = review_with_studies(1);
        assert!(matches!(
            set_judgment(
                &mut review,
                "Nobody",
                "non-response",
                JudgmentLevel::Low,
                ""
            ),
            Err(Error::NotFound(_))
        ));
        assert!(matches!(
            set_judgment(&mut review, "Study 00", "bogus", JudgmentLevel::Low, ""),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn matrix_dimensions_and_order() {
        let mut review = review_with_studies(12);
        set_judgment(
            &mut review,
            "Study 03",
            "case-definition",
            JudgmentLevel::Low,
            "",
        )
        .unwrap();
        let matrix = summary_matrix(&review);
        assert_eq!(matrix.studies.len(), 12);
        assert_eq!(matrix.domains.len(), 6);
        assert_eq!(matrix.cells.len(), 12);
        assert!(matrix.cells.iter().all(|row| row.len() == 6));
        assert_eq!(matrix.cells[3][0], Some(JudgmentLevel::Low));
        assert_eq!(matrix.cells[0][0], None);
    }

    #[test]
    fn empty_judgments_give_blank_grid() {
        let review = review_with_studies(3);
        let matrix = summary_matrix(&review);
        assert!(matrix.cells.iter().flatten().all(Option::is_none));
    }

    #[test]
    fn deactivated_domain_hidden_but_judgment_kept() {
        let mut review = review_with_studies(2);
        set_judgment(
            &mut review,
            "Study 00",
            "non-response",
            JudgmentLevel::Unclear,
            "Not reported",
        )
        .unwrap();
        deactivate_domain(&mut review, "non-response").unwrap();
        let matrix = summary_matrix(&review);
        assert_eq!(matrix.domains.len(), 5);
        assert!(matrix.domains.iter().all(|d| d.id != "non-response"));
        // Judgment survives and reappears on reactivation.
        activate_domain(&mut review, "non-response").unwrap();
        let matrix = summary_matrix(&review);
        assert_eq!(matrix.domains.len(), 6);
        let col = matrix
            .domains
            .iter()
            .position(|d| d.id == "non-response")
            .unwrap();
        assert_eq!(matrix.cells[0][col], Some(JudgmentLevel::Unclear));
    }

    #[test]
    fn judgment_can_target_deactivated_domain() {
        let mut review = review_with_studies(1);
        deactivate_domain(&mut review, "non-response").unwrap();
        set_judgment(
            &mut review,
            "Study 00",
            "non-response",
            JudgmentLevel::High,
            "",
        )
        .unwrap();
        let matrix = summary_matrix(&review);
        assert!(matrix.domains.iter().all(|d| d.id != "non-response"));
        assert!(review.studies[0].rob_judgments.contains_key("non-response"));
    }

    #[test]
    fn reorder_swaps_columns_without_changing_cells() {
        let mut review = review_with_studies(2);
        set_judgment(
            &mut review,
            "Study 00",
            "case-definition",
            JudgmentLevel::Low,
            "",
        )
        .unwrap();
        set_judgment(
            &mut review,
            "Study 00",
            "representativeness",
            JudgmentLevel::High,
            "",
        )
        .unwrap();
        let before = summary_matrix(&review);
        reorder_domain(&mut review, "representativeness", MoveDirection::Up).unwrap();
        let after = summary_matrix(&review);
        assert_eq!(after.domains[0].id, "representativeness");
        assert_eq!(after.domains[1].id, "case-definition");
        assert_eq!(after.cells[0][0], Some(JudgmentLevel::High));
        assert_eq!(after.cells[0][1], Some(JudgmentLevel::Low));
        assert_eq!(before.cells[0][0], Some(JudgmentLevel::Low));
        // Moving the first item up is a no-op.
        reorder_domain(&mut review, "representativeness", MoveDirection::Up).unwrap();
        assert_eq!(summary_matrix(&review).domains[0].id, "representativeness");
    }

    /// The described judgment pattern: three domains low everywhere;
    /// non-response high everywhere except one study judged unclear.
    #[test]
    fn described_pattern_matrix() {
        let mut review = Review::new("Pattern").unwrap();
        let mut ids: Vec<String> = (0..11).map(|i| format!("Study {i:02}")).collect();
        ids.push("Antoszewska 2009".to_string());
        for id in &ids {
            review.add_study(id, DataSource::Published, 2009).unwrap();
        }
        review.rob_domains = default_domains(RobScheme::Nos6);
        for id in &ids {
            for domain in [
                "case-definition",
                "exposure-confirmation",
                "same-confirmation",
            ] {
                set_judgment(&mut review, id, domain, JudgmentLevel::Low, "").unwrap();
            }
            if id == "Antoszewska 2009" {
                set_judgment(
                    &mut review,
                    id,
                    "non-response",
                    JudgmentLevel::Unclear,
                    "Not reported",
                )
                .unwrap();
            } else {
                set_judgment(&mut review, id, "non-response", JudgmentLevel::High, "").unwrap();
            }
        }
        let matrix = summary_matrix(&review);
        assert_eq!(matrix.cells.len() * matrix.domains.len(), 72);
        let nr = matrix
            .domains
            .iter()
            .position(|d| d.id == "non-response")
            .unwrap();
        // "Antoszewska 2009" sorts first.
        assert_eq!(matrix.studies[0], "Antoszewska 2009");
        assert_eq!(matrix.cells[0][nr], Some(JudgmentLevel::Unclear));
        for row in 1..matrix.studies.len() {
            assert_eq!(matrix.cells[row][nr], Some(JudgmentLevel::High));
        }
        let cd = matrix
            .domains
            .iter()
            .position(|d| d.id == "case-definition")
            .unwrap();
        assert!(matrix
            .cells
            .iter()
            .all(|row| row[cd] == Some(JudgmentLevel::Low)));
    }
}
