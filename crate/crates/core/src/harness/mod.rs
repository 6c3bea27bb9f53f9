//! Set families, the survey loop over them, and its CSV/JSON output.

mod family;
mod survey;

pub use family::{
    default_families, default_survey_families, gen_family, FamilyError, FamilySpec, DEFAULT_SEED, DEFAULT_SIZES,
};
pub use survey::{
    conjecture_probe, is_conjecture_candidate, run_survey, survey_rows, to_csv, write_outputs, SurveyConfig,
    SurveyError, SurveyRow, CONJECTURE_FLAG, CSV_HEADER, MEM_BUDGET_ENV,
};
