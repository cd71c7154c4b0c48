//! The bundled seven-project case study.

use crate::document::parse_instance;
use crate::model::Instance;

/// Raw JSON of the bundled case study.
pub const CASE_STUDY_JSON: &str = include_str!("../fixtures/case_study.json");

/// Optimal period assignment of the case study.
pub const CASE_STUDY_OPTIMUM: [usize; 7] = [1, 2, 1, 2, 2, 3, 3];

/// Optimal portfolio value of the case study under this crate's valuation.
pub const CASE_STUDY_OPTIMAL_VALUE: f64 = 203.0;

/// The optimal assignment as bit rows (project x period).
pub const CASE_STUDY_CHROMOSOME: &str = "100\n010\n100\n010\n010\n001\n001\n";

pub fn case_study() -> Instance {
    parse_instance(CASE_STUDY_JSON).expect("bundled fixture is valid")
}
