mod support;

use proptest::prelude::*;
use support::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 256,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

macro_rules! format_props {
    ($name:ident, $strategy:expr) => {
        proptest! {
            #![proptest_config(config())]
            #[test]
            fn $name(g in $strategy) {
                if let Err(e) = check_generated(&g) {
                    prop_assert!(false, "{}\n--- input\n{}", e, g.content);
                }
            }
        }
    };
}

format_props!(requirements_files, requirements_input());
format_props!(pyproject_files, toml_input());
format_props!(setup_cfg_files, setup_cfg_input());
format_props!(setup_py_files, setup_py_input());
format_props!(environment_files, environment_input());
format_props!(python_sources, python_input());

#[test]
fn oracles_catch_bad_edits() {
    let names = ["six".to_string()];
    assert!(check_non_interference("a\nsix\nb\n", "a\nb\n", &names).is_ok());
    assert!(check_non_interference("a\nsix\nb\n", "a\n", &names).is_err());
    assert!(check_non_interference("import os, six\n", "import os\n", &names).is_ok());
    assert!(check_non_interference("import os, six\n", "import os, sys\n", &names).is_err());
    assert!(check_valid(std::path::Path::new("pyproject.toml"), "[project\n").is_err());
    assert_eq!(
        imported_modules("from a.b import c\nimport d.e as f, g\ntry:\n    import h\nexcept ImportError:\n    pass\n"),
        ["a", "d", "g", "h"].iter().map(|s| s.to_string()).collect()
    );
}
