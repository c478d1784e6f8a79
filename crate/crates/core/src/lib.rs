//! Meta-analysis of dichotomous outcomes, end to end: per-study effect
//! sizes from 2x2 tables, fixed and random-effects pooling with
//! heterogeneity statistics, publication-bias diagnostics, MEDLINE
//! reference import, PRISMA flow counts, risk-of-bias judgments, and
//! deterministic SVG figures for all of it.
//!
//! The [`Review`] document is the root: studies, references,
//! comparisons/outcomes with their analysis settings, bias domains and flow
//! counts, persisted as a versioned JSON file. Analysis entry points are
//! [`Outcome::analyze`] and the `pool_*` functions in [`pooling`].

pub mod bias;
pub mod effects;
pub mod error;
pub mod format;
pub mod medline;
pub mod pooling;
pub mod prisma;
pub mod render;
pub mod review;
pub mod rob;
pub mod stats;

pub use bias::{
    funnel_data, trim_and_fill, trim_and_fill_with, FunnelData, FunnelPoint, TrimFillOptions,
    TrimFillResult, TrimSide,
};
pub use effects::{
    continuity_correct, estimate, odds_ratio, peto_components, peto_odds_ratio, risk_difference,
    risk_ratio, Cells, EffectEstimate, Measure, PetoComponents, TwoByTwoTable,
};
pub use error::{Error, Result};
pub use medline::{
    import_pending, parse_medline, parse_medline_bytes, references_from_records, to_reference,
    ImportOutcome, MedlineRecord, ParseOutcome, ParseWarning,
};
pub use pooling::{
    heterogeneity, heterogeneity_peto, overall_effect_test, pool_iv_fixed, pool_mh_fixed,
    pool_peto_fixed, pool_random_dl, AnalysisSettings, Heterogeneity, Method, Model, OverallEffect,
    PooledResult, PooledStudy, QSource, StudyEstimate, StudyTable, Totals,
};
pub use prisma::{build_flow, ExclusionReason, FlowDiagram};
pub use render::{
    figure_filename, render_forest, render_funnel, render_prisma, render_rob, AxisScale, FigureSpec,
};
pub use review::{
    Characteristics, Comparison, DataSource, DataType, Loaded, Outcome, Reference, Review, Study,
    StudyData, SCHEMA_VERSION,
};
pub use rob::{
    activate_domain, deactivate_domain, default_domains, reorder_domain, set_judgment,
    summary_matrix, BiasDomain, Judgment, JudgmentLevel, MoveDirection, RobMatrix, RobScheme,
};
