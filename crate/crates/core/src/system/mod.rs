//! System files, the analysis pipeline and the bundled example systems.

mod format;
mod report;

pub use format::{ChartDecl, Located, MapDecl, ParamDecl, SpecError, SpecFile, System, SystemDecl, SystemSpec};
pub use report::{analyze, equiv_check, AnalysisReport, AnalyzeError, ConfigEcho, EquivCheckReport, InvariantSummary, SystemSummary, SCHEMA};

/// Example systems shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("boat", include_str!("../../systems/boat.paf")),
    ("nmr", include_str!("../../systems/nmr.paf")),
    ("flat2d", include_str!("../../systems/flat2d.paf")),
    ("quadratic2d", include_str!("../../systems/quadratic2d.paf")),
    ("flat_equiv", include_str!("../../systems/flat_equiv.paf")),
    ("case_mismatch", include_str!("../../systems/case_mismatch.paf")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".paf").unwrap_or(name);
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Reads and validates a system file.
pub fn load_system(path: &std::path::Path) -> Result<SystemSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|e| SpecError::Invalid(format!("{}: {e}", path.display())))?;
    SystemSpec::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_systems_parse_and_round_trip() {
        for (name, text) in BUNDLED {
            let spec = SystemSpec::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(SpecFile::parse(&spec.file.print()).unwrap(), spec.file, "{name}");
        }
        assert!(bundled("boat.paf").is_some());
        assert!(bundled("missing").is_none());
    }
}
