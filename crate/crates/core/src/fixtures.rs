//! Tables shipped with the crate for examples, demos and tests.

use crate::table::Table;

pub const OPEC_2012_JSON: &str = include_str!("../fixtures/opec_2012.json");

/// Seven OPEC member countries with region, accession year, population and
/// area.
pub fn opec_2012() -> Table {
    Table::from_json(OPEC_2012_JSON).expect("bundled fixture is valid")
}
