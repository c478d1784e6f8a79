//! Study-flow counts for the four-phase PRISMA diagram.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A full-text exclusion reason with its count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionReason {
    pub reason: String,
    pub n: u32,
}

/// Counts for the identification/screening/eligibility/inclusion phases.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FlowDiagram {
    pub identified_db: u32,
    pub identified_other: u32,
    pub after_dedup: u32,
    pub screened: u32,
    pub excluded_screening: u32,
    pub fulltext_assessed: u32,
    #[serde(default)]
    pub fulltext_excluded: Vec<ExclusionReason>,
    pub qualitative_included: u32,
    pub quantitative_included: u32,
}

impl FlowDiagram {
    pub fn fulltext_excluded_total(&self) -> u32 {
        self.fulltext_excluded.iter().map(|r| r.n).sum()
    }

    /// Check the four count equations plus the identification total bound.
    /// The error names the failing equation.
    pub fn validate(&self) -> Result<()> {
        if self.after_dedup > self.identified_db + self.identified_other {
            return Err(Error::Consistency(format!(
                "after_dedup ({}) > identified_db ({}) + identified_other ({})",
                self.after_dedup, self.identified_db, self.identified_other
            )));
        }
        if self.screened != self.after_dedup {
            return Err(Error::Consistency(format!(
                "screened ({}) != after_dedup ({})",
                self.screened, self.after_dedup
            )));
        }
        if self.excluded_screening > self.screened
            || self.fulltext_assessed != self.screened - self.excluded_screening
        {
            return Err(Error::Consistency(format!(
                "fulltext_assessed ({}) != screened ({}) - excluded_screening ({})",
                self.fulltext_assessed, self.screened, self.excluded_screening
            )));
        }
        let excluded = self.fulltext_excluded_total();
        if excluded > self.fulltext_assessed
            || self.qualitative_included != self.fulltext_assessed - excluded
        {
            return Err(Error::Consistency(format!(
                "qualitative_included ({}) != fulltext_assessed ({}) - fulltext_excluded total ({})",
                self.qualitative_included, self.fulltext_assessed, excluded
            )));
        }
        if self.quantitative_included > self.qualitative_included {
            return Err(Error::Consistency(format!(
                "quantitative_included ({}) > qualitative_included ({})",
                self.quantitative_included, self.qualitative_included
            )));
        }
        Ok(())
    }
}

/// Validate raw counts and return the populated diagram.
pub fn build_flow(flow: FlowDiagram) -> Result<FlowDiagram> {
    flow.validate()?;
    Ok(flow)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The worked fixture: 120 identified, 100 after dedup, 80 excluded at
    /// screening, 20 assessed, 3 excluded with reasons, 17 qualitative,
    /// 11 quantitative.
    pub(crate) fn worked_fixture() -> FlowDiagram {
        FlowDiagram {
            identified_db: 120,
            identified_other: 0,
            after_dedup: 100,
            screened: 100,
            excluded_screening: 80,
            fulltext_assessed: 20,
            fulltext_excluded: vec![
                ExclusionReason {
                    reason: "No success-rate data".into(),
                    n: 1,
                },
                ExclusionReason {
                    reason: "Review article".into(),
                    n: 1,
                },
                ExclusionReason {
                    reason: "Case report".into(),
                    n: 1,
                },
            ],
            qualitative_included: 17,
            quantitative_included: 11,
        }
    }

    #[test]
    fn worked_fixture_is_consistent() {
        let flow = build_flow(worked_fixture()).unwrap();
        assert_eq!(flow.qualitative_included, 17);
        assert_eq!(flow.quantitative_included, 11);
    }

    #[test]
    fn all_zeros_is_valid() {
        assert!(build_flow(FlowDiagram::default()).is_ok());
    }

    #[test]
    fn each_equation_violation_is_rejected_and_named() {
        let mut flow = worked_fixture();
        flow.screened = 99;
        let err = build_flow(flow).unwrap_err().to_string();
        assert!(err.contains("screened"), "{err}");

        let mut flow = worked_fixture();
        flow.fulltext_assessed = 21;
        let err = build_flow(flow).unwrap_err().to_string();
        assert!(err.contains("fulltext_assessed"), "{err}");

        let mut flow = worked_fixture();
        flow.qualitative_included = 16;
        let err = build_flow(flow).unwrap_err().to_string();
        assert!(err.contains("qualitative_included"), "{err}");

        let mut flow = worked_fixture();
        flow.quantitative_included = 18;
        let err = build_flow(flow).unwrap_err().to_string();
        assert!(err.contains("quantitative_included"), "{err}");

        let mut flow = worked_fixture();
        flow.after_dedup = 121;
        flow.screened = 121;
        let err = build_flow(flow).unwrap_err().to_string();
        assert!(err.contains("identified_db"), "{err}");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        // Accepts exactly the inputs satisfying the count equations.
        proptest! {
            #[test]
            fn acceptance_matches_equations(
                identified_db in 0u32..300,
                identified_other in 0u32..50,
                after_dedup in 0u32..300,
                screened in 0u32..300,
                excluded_screening in 0u32..300,
                fulltext_assessed in 0u32..300,
                reasons in proptest::collection::vec((0u32..10,), 0..4),
                qualitative in 0u32..300,
                quantitative in 0u32..300,
            ) {
                let flow = FlowDiagram {
                    identified_db,
                    identified_other,
                    after_dedup,
                    screened,
                    excluded_screening,
                    fulltext_assessed,
                    fulltext_excluded: reasons
                        .iter()
                        .enumerate()
                        .map(|(i, (n,))| ExclusionReason { reason: format!("r{i}"), n: *n })
                        .collect(),
                    qualitative_included: qualitative,
                    quantitative_included: quantitative,
                };
                let excl: u32 = flow.fulltext_excluded_total();
                let consistent = after_dedup <= identified_db + identified_other
                    && screened == after_dedup
                    && excluded_screening <= screened
                    && fulltext_assessed == screened - excluded_screening
                    && excl <= fulltext_assessed
                    && qualitative == fulltext_assessed - excl
                    && quantitative <= qualitative;
                prop_assert_eq!(flow.validate().is_ok(), consistent);
            }
        }
    }
}
