use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use super::{
    load_catalog, load_mapping_catalog, load_rights_catalog, load_taxonomy, CatalogError, ConditionCatalog,
    MappingCatalog, RightsCatalog, Taxonomies, TaxonomyKind,
};
use crate::intake::{load_questionnaire, QuestionSet};
use crate::rights_impact::{load_impact_rules, ImpactRuleSet};
use crate::risk::{load_acceptability_policy, load_risk_matrix, AcceptabilityPolicy, RiskMatrix};

/// The catalog files an engine instance runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CatalogFile {
    Conditions,
    Mapping,
    Rights,
    Risks,
    RiskSources,
    Consequences,
    Mitigations,
    Questionnaire,
    RiskMatrix,
    Acceptability,
    ImpactRules,
}

impl CatalogFile {
    pub const ALL: [CatalogFile; 11] = [
        CatalogFile::Conditions,
        CatalogFile::Mapping,
        CatalogFile::Rights,
        CatalogFile::Risks,
        CatalogFile::RiskSources,
        CatalogFile::Consequences,
        CatalogFile::Mitigations,
        CatalogFile::Questionnaire,
        CatalogFile::RiskMatrix,
        CatalogFile::Acceptability,
        CatalogFile::ImpactRules,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CatalogFile::Conditions => "conditions",
            CatalogFile::Mapping => "mapping",
            CatalogFile::Rights => "rights",
            CatalogFile::Risks => "taxonomy-risks",
            CatalogFile::RiskSources => "taxonomy-sources",
            CatalogFile::Consequences => "taxonomy-consequences",
            CatalogFile::Mitigations => "taxonomy-mitigations",
            CatalogFile::Questionnaire => "questionnaire",
            CatalogFile::RiskMatrix => "risk-matrix",
            CatalogFile::Acceptability => "acceptability",
            CatalogFile::ImpactRules => "impact-rules",
        }
    }

    pub fn file_name(self) -> String {
        match self {
            CatalogFile::Questionnaire => "questionnaire.en.json".to_string(),
            other => format!("{}.json", other.name()),
        }
    }

    pub fn seed_bytes(self) -> &'static [u8] {
        let s: &'static str = match self {
            CatalogFile::Conditions => include_str!("../../catalogs/conditions.json"),
            CatalogFile::Mapping => include_str!("../../catalogs/mapping.json"),
            CatalogFile::Rights => include_str!("../../catalogs/rights.json"),
            CatalogFile::Risks => include_str!("../../catalogs/taxonomy-risks.json"),
            CatalogFile::RiskSources => include_str!("../../catalogs/taxonomy-sources.json"),
            CatalogFile::Consequences => include_str!("../../catalogs/taxonomy-consequences.json"),
            CatalogFile::Mitigations => include_str!("../../catalogs/taxonomy-mitigations.json"),
            CatalogFile::Questionnaire => include_str!("../../catalogs/questionnaire.en.json"),
            CatalogFile::RiskMatrix => include_str!("../../catalogs/risk-matrix.json"),
            CatalogFile::Acceptability => include_str!("../../catalogs/acceptability.json"),
            CatalogFile::ImpactRules => include_str!("../../catalogs/impact-rules.json"),
        };
        s.as_bytes()
    }
}

impl fmt::Display for CatalogFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CatalogFile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CatalogFile::ALL
            .into_iter()
            .find(|c| c.name() == s || c.file_name() == s)
            .ok_or_else(|| format!("unknown catalog '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file}: {error}")]
pub struct CatalogSetError {
    pub file: CatalogFile,
    pub error: CatalogError,
}

/// A consistent set of loaded catalogs. Immutable once built.
#[derive(Debug, Clone)]
pub struct CatalogSet {
    pub conditions: ConditionCatalog,
    pub mapping: MappingCatalog,
    pub rights: RightsCatalog,
    pub taxonomies: Taxonomies,
    pub questionnaire: QuestionSet,
    pub matrix: RiskMatrix,
    pub acceptability: AcceptabilityPolicy,
    pub impact_rules: ImpactRuleSet,
}

impl CatalogSet {
    /// The catalogs compiled into the crate.
    pub fn seed() -> Arc<CatalogSet> {
        static SEED: OnceLock<Arc<CatalogSet>> = OnceLock::new();
        SEED.get_or_init(|| {
            let set = CatalogSet::build(|f| Ok(f.seed_bytes().to_vec())).expect("seed catalogs are valid");
            Arc::new(set)
        })
        .clone()
    }

    /// Loads every catalog file found in `dir`; files that are absent fall
    /// back to the seed copy.
    pub fn from_dir(dir: &Path) -> Result<CatalogSet, CatalogSetError> {
        CatalogSet::build(|f| {
            let path = dir.join(f.file_name());
            match std::fs::read(&path) {
                Ok(bytes) => Ok(bytes),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(f.seed_bytes().to_vec()),
                Err(e) => Err(CatalogError::Parse(format!("{}: {e}", path.display()))),
            }
        })
    }

    fn build(
        mut read: impl FnMut(CatalogFile) -> Result<Vec<u8>, CatalogError>,
    ) -> Result<CatalogSet, CatalogSetError> {
        let mut get = |file: CatalogFile| read(file).map_err(|error| CatalogSetError { file, error });
        let wrap = |file: CatalogFile| move |error: CatalogError| CatalogSetError { file, error };
        use CatalogFile::*;
        let conditions = load_catalog(&get(Conditions)?).map_err(wrap(Conditions))?;
        let mapping = load_mapping_catalog(&get(Mapping)?).map_err(wrap(Mapping))?;
        let rights = load_rights_catalog(&get(Rights)?).map_err(wrap(Rights))?;
        let taxonomies = Taxonomies {
            risks: load_taxonomy(&get(Risks)?, TaxonomyKind::Risk).map_err(wrap(Risks))?,
            sources: load_taxonomy(&get(RiskSources)?, TaxonomyKind::RiskSource).map_err(wrap(RiskSources))?,
            consequences: load_taxonomy(&get(Consequences)?, TaxonomyKind::Consequence).map_err(wrap(Consequences))?,
            mitigations: load_taxonomy(&get(Mitigations)?, TaxonomyKind::Mitigation).map_err(wrap(Mitigations))?,
        };
        let questionnaire = load_questionnaire(&get(Questionnaire)?).map_err(wrap(Questionnaire))?;
        let matrix = load_risk_matrix(&get(RiskMatrix)?).map_err(wrap(RiskMatrix))?;
        let acceptability = load_acceptability_policy(&get(Acceptability)?).map_err(wrap(Acceptability))?;
        let impact_rules =
            load_impact_rules(&get(ImpactRules)?, &rights, &taxonomies.consequences).map_err(wrap(ImpactRules))?;
        Ok(CatalogSet {
            conditions,
            mapping,
            rights,
            taxonomies,
            questionnaire,
            matrix,
            acceptability,
            impact_rules,
        })
    }

    /// Checks a single catalog file. Impact rules are checked against this
    /// set's rights and consequences.
    pub fn validate_file(&self, file: CatalogFile, bytes: &[u8]) -> Result<String, CatalogError> {
        use CatalogFile::*;
        Ok(match file {
            Conditions => load_catalog(bytes)?.version,
            Mapping => load_mapping_catalog(bytes)?.version,
            Rights => load_rights_catalog(bytes)?.version,
            Risks => load_taxonomy(bytes, TaxonomyKind::Risk)?.version,
            RiskSources => load_taxonomy(bytes, TaxonomyKind::RiskSource)?.version,
            Consequences => load_taxonomy(bytes, TaxonomyKind::Consequence)?.version,
            Mitigations => load_taxonomy(bytes, TaxonomyKind::Mitigation)?.version,
            Questionnaire => load_questionnaire(bytes)?.version,
            RiskMatrix => load_risk_matrix(bytes)?.version,
            Acceptability => load_acceptability_policy(bytes)?.version,
            ImpactRules => load_impact_rules(bytes, &self.rights, &self.taxonomies.consequences)?.version,
        })
    }

    pub fn versions(&self) -> BTreeMap<String, String> {
        let t = &self.taxonomies;
        [
            (CatalogFile::Conditions, &self.conditions.version),
            (CatalogFile::Mapping, &self.mapping.version),
            (CatalogFile::Rights, &self.rights.version),
            (CatalogFile::Risks, &t.risks.version),
            (CatalogFile::RiskSources, &t.sources.version),
            (CatalogFile::Consequences, &t.consequences.version),
            (CatalogFile::Mitigations, &t.mitigations.version),
            (CatalogFile::Questionnaire, &self.questionnaire.version),
            (CatalogFile::RiskMatrix, &self.matrix.version),
            (CatalogFile::Acceptability, &self.acceptability.version),
            (CatalogFile::ImpactRules, &self.impact_rules.version),
        ]
        .into_iter()
        .map(|(f, v)| (f.name().to_string(), v.clone()))
        .collect()
    }

    pub fn checksums(&self) -> BTreeMap<String, String> {
        let t = &self.taxonomies;
        [
            (CatalogFile::Conditions, self.conditions.checksum.clone()),
            (CatalogFile::Mapping, self.mapping.checksum.clone()),
            (CatalogFile::Rights, self.rights.checksum.clone()),
            (CatalogFile::Risks, t.risks.checksum()),
            (CatalogFile::RiskSources, t.sources.checksum()),
            (CatalogFile::Consequences, t.consequences.checksum()),
            (CatalogFile::Mitigations, t.mitigations.checksum()),
            (CatalogFile::Questionnaire, self.questionnaire.checksum.clone()),
            (CatalogFile::RiskMatrix, self.matrix.checksum()),
            (CatalogFile::Acceptability, crate::canonical::digest(&self.acceptability).expect("policy serializes")),
            (CatalogFile::ImpactRules, self.impact_rules.checksum.clone()),
        ]
        .into_iter()
        .map(|(f, v)| (f.name().to_string(), v))
        .collect()
    }
}

/// Swappable handle to the active catalogs. A reload installs a whole new
/// set; readers holding the old `Arc` keep a consistent view.
#[derive(Debug, Clone)]
pub struct SharedCatalogs {
    inner: Arc<RwLock<Arc<CatalogSet>>>,
}

impl SharedCatalogs {
    pub fn new(set: Arc<CatalogSet>) -> Self {
        Self {
            inner: Arc::new(RwLock::new(set)),
        }
    }

    pub fn current(&self) -> Arc<CatalogSet> {
        self.inner.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace(&self, set: CatalogSet) -> Arc<CatalogSet> {
        let next = Arc::new(set);
        let mut guard = self.inner.write().unwrap_or_else(|e| e.into_inner());
        std::mem::replace(&mut *guard, next)
    }
}

impl Default for SharedCatalogs {
    fn default() -> Self {
        Self::new(CatalogSet::seed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_loads_and_reports_versions() {
        let set = CatalogSet::seed();
        let v = set.versions();
        assert_eq!(v.len(), CatalogFile::ALL.len());
        assert_eq!(set.checksums().len(), CatalogFile::ALL.len());
    }

    #[test]
    fn file_names_parse_back() {
        for f in CatalogFile::ALL {
            assert_eq!(f.name().parse::<CatalogFile>(), Ok(f));
            assert_eq!(f.file_name().parse::<CatalogFile>(), Ok(f));
        }
    }

    #[test]
    fn reload_swaps_whole_set() {
        let shared = SharedCatalogs::default();
        let before = shared.current();
        let mut next = (*before).clone();
        next.conditions.version = "reloaded".into();
        let old = shared.replace(next);
        assert_eq!(old.conditions.version, before.conditions.version);
        assert_eq!(shared.current().conditions.version, "reloaded");
        assert_ne!(before.conditions.version, "reloaded");
    }

    #[test]
    fn directory_overrides_seed() {
        let dir = std::env::temp_dir().join(format!("fria-catalogs-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("risk-matrix.json"), b"{\"version\":\"x\"}").unwrap();
        let err = CatalogSet::from_dir(&dir).unwrap_err();
        assert_eq!(err.file, CatalogFile::RiskMatrix);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
