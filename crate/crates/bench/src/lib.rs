//! Shared inputs for the criterion benchmarks.

use std::path::PathBuf;

use typeprompt_core::config::RunConfig;
use typeprompt_core::frontend::{parse_file, SourceModule, TargetVariable};
use typeprompt_core::hints::TypeDatabase;
use typeprompt_core::pipeline::locate_target;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// The settings module and its `DATABASES` target.
pub fn settings() -> (SourceModule, TargetVariable) {
    let m = parse_file(fixtures().join("django/settings.py")).expect("fixture parses");
    let t = locate_target(&m, 71, "DATABASES", None).expect("fixture target");
    (m, t)
}

pub fn typedb() -> TypeDatabase {
    TypeDatabase::load(&fixtures().join("corpus/typedb.json")).expect("fixture typedb")
}

pub fn config() -> RunConfig {
    RunConfig::default()
}
