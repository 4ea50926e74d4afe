//! Deciding which declared dependencies are unused.
//!
//! The built-in detector is import-presence based: a dependency is unused
//! when none of its import names appears as the top-level module of any
//! import site. Findings from other tools enter through
//! [`load_external_findings`].

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::Result;
use crate::formats::python_source;
use crate::model::{
    BloatFinding, DistributionRecord, FileKind, ImportBinding, PackageName, Provenance, SourceLocation,
};
use crate::resolver_static::StaticResolution;
use crate::text::decode;

pub const BUILTIN_DETECTOR: &str = "builtin-imports";
pub const EXTERNAL_DETECTOR: &str = "external";

#[derive(Debug, Clone, Default)]
pub struct DetectorInput {
    pub dependencies: BTreeMap<PackageName, Vec<SourceLocation>>,
    pub provenance: BTreeMap<PackageName, Provenance>,
    pub dist_records: Option<Vec<DistributionRecord>>,
    /// Relative to the project root.
    pub source_files: Vec<PathBuf>,
}

/// Import sites of every readable, parseable file. Others are skipped with
/// a warning.
pub fn scan_imports(root: &Path, source_files: &[PathBuf]) -> Vec<ImportBinding> {
    let mut out = Vec::new();
    for rel in source_files {
        let bytes = match std::fs::read(root.join(rel)) {
            Ok(bytes) => bytes,
            Err(e) => {
                warn!("{}: {e}", rel.display());
                continue;
            }
        };
        let text = decode(&bytes, rel).text;
        match python_source::scan(&text, rel, FileKind::PythonSource) {
            Ok(bindings) => out.extend(bindings),
            Err(e) => warn!("skipping import scan: {e}"),
        }
    }
    out
}

/// Top-level modules provided by `pkg`: the installed record's import names,
/// else the normalized name with `-` turned into `_`.
pub fn map_package_to_imports(pkg: &PackageName, dist_records: Option<&[DistributionRecord]>) -> BTreeSet<String> {
    dist_records
        .into_iter()
        .flatten()
        .find(|r| &r.name == pkg)
        .map(|r| r.import_names.clone())
        .filter(|names| !names.is_empty())
        .unwrap_or_else(|| BTreeSet::from([pkg.import_fallback()]))
}

fn sites_for<'a>(names: &BTreeSet<String>, bindings: &'a [ImportBinding]) -> Vec<&'a ImportBinding> {
    bindings.iter().filter(|b| names.contains(&b.top_level)).collect()
}

/// One finding per dependency none of whose import names is ever imported,
/// ordered by normalized name.
pub fn detect_unused(input: &DetectorInput, bindings: &[ImportBinding]) -> Vec<BloatFinding> {
    let records = input.dist_records.as_deref();
    let mut names: BTreeSet<&PackageName> = input.dependencies.keys().collect();
    names.extend(input.provenance.keys());
    names
        .into_iter()
        .filter(|pkg| sites_for(&map_package_to_imports(pkg, records), bindings).is_empty())
        .map(|pkg| {
            let declared_at = input.dependencies.get(pkg).cloned().unwrap_or_default();
            BloatFinding {
                package: pkg.clone(),
                report_only: declared_at.is_empty(),
                declared_at,
                import_sites: Vec::new(),
                detector_id: BUILTIN_DETECTOR.to_string(),
                provenance: input.provenance.get(pkg).copied(),
            }
        })
        .collect()
}

/// Binds externally supplied package names to their declarations. Names
/// declared nowhere become report-only findings.
pub fn load_external_findings(
    packages: &[String],
    statics: &StaticResolution,
    bindings: &[ImportBinding],
    dist_records: Option<&[DistributionRecord]>,
) -> Result<Vec<BloatFinding>> {
    let mut seen = BTreeSet::new();
    for raw in packages {
        seen.insert(PackageName::new(raw)?);
    }
    Ok(seen
        .into_iter()
        .map(|pkg| {
            let declared_at = statics.locations(&pkg);
            if declared_at.is_empty() {
                warn!("`{}` is not declared in any configuration file", pkg.raw());
            }
            let import_sites = sites_for(&map_package_to_imports(&pkg, dist_records), bindings)
                .into_iter()
                .cloned()
                .collect();
            let provenance = statics.dependencies.contains_key(&pkg).then_some(Provenance::Static);
            BloatFinding {
                report_only: declared_at.is_empty(),
                package: pkg,
                declared_at,
                import_sites,
                detector_id: EXTERNAL_DETECTOR.to_string(),
                provenance,
            }
        })
        .collect())
}
