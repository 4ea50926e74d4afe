mod support;

use std::path::{Path, PathBuf};

use pytrim_core::model::{PackageName, Provenance};
use pytrim_core::resolver_dynamic::resolve_dependencies;
use pytrim_core::resolver_static::{static_dependency_set, Origin, Project};
use support::*;

#[test]
fn corpus_edits_are_complete_valid_and_idempotent() {
    let report = check_corpus();
    assert!(report.edits >= 25, "only {} edits", report.edits);
    assert!(report.validity.is_empty(), "{:#?}", report.validity);
    assert!(report.completeness.is_empty(), "{:#?}", report.completeness);
    assert!(report.idempotence.is_empty(), "{:#?}", report.idempotence);
}

#[test]
fn softlayer_discovery() {
    let root = cases_dir().join("softlayer-full/pre");
    let statics = static_dependency_set(&Project::new(&root).unwrap()).unwrap();
    let configs: Vec<&Path> = statics.discovery.config_files.iter().map(|c| c.path.as_path()).collect();
    assert_eq!(
        configs,
        [
            "setup.py",
            "tools/debug-requirements.txt",
            "tools/requirements.txt",
            "tools/test-requirements.txt"
        ]
        .map(Path::new)
    );
    assert_eq!(statics.discovery.unmodifiable, [PathBuf::from("README.rst")]);
    let locations = statics.locations(&PackageName::new("prettytable").unwrap());
    assert_eq!(locations.len(), 4);
    assert_eq!(statics.project_name.as_deref(), Some("SoftLayer"));
}

#[test]
fn computed_setup_py_is_not_a_static_source() {
    let root = cases_dir().join("dynamic-setup-py-reqs/pre");
    let statics = static_dependency_set(&Project::new(&root).unwrap()).unwrap();
    assert!(statics.dependencies.is_empty(), "{:?}", statics.dependencies.keys());
    let core = statics.config_file(Path::new("reqs/core.txt")).unwrap();
    assert_eq!(core.origin, Origin::SetupPyReference);
    assert!(!statics.setup_py_dynamic_lines.is_empty());
    let resolved = resolve_dependencies(&statics, None);
    assert!(!resolved.values().any(|p| *p == Provenance::Dynamic));
}

#[test]
fn every_case_declares_what_it_removes() {
    for case in corpus() {
        let statics = static_dependency_set(&Project::new(&case.pre).unwrap()).unwrap();
        for name in &case.removed {
            let pkg = PackageName::new(name).unwrap();
            assert!(!statics.locations(&pkg).is_empty(), "{}: {name} not found", case.id);
        }
    }
}
