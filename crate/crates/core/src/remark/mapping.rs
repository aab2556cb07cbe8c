use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RemarkCategory;

const DEFAULT_MAP: &str = include_str!("../../config/remark-map.json");

/// Substring rule; the first matching rule wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRule {
    pub contains: String,
    pub category: RemarkCategory,
}

/// Native remark identifier to category tables, loaded from data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    /// Matched against the Clang remark `Name`.
    pub clang: Vec<MappingRule>,
    /// Matched case-insensitively against Intel reason and detail text.
    pub intel: Vec<MappingRule>,
}

impl Default for CategoryMap {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_MAP).expect("bundled remark map is valid")
    }
}

impl CategoryMap {
    pub fn from_path(path: impl AsRef<Path>) -> std::io::Result<CategoryMap> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn clang_category(&self, name: &str) -> RemarkCategory {
        self.clang
            .iter()
            .find(|r| name.contains(&r.contains))
            .map(|r| r.category.clone())
            .unwrap_or_else(|| RemarkCategory::Other(name.to_string()))
    }

    pub fn intel_category(&self, text: &str) -> Option<RemarkCategory> {
        let lower = text.to_lowercase();
        self.intel
            .iter()
            .find(|r| lower.contains(&r.contains.to_lowercase()))
            .map(|r| r.category.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clang_table() {
        let m = CategoryMap::default();
        let cases = [
            ("UnsafeDep", RemarkCategory::UnsafeDependency),
            ("UnsafeMemDep", RemarkCategory::UnsafeDependency),
            ("NonReductionValueUsedOutsideLoop", RemarkCategory::NonReductionValue),
            ("CantIdentifyArrayBounds", RemarkCategory::ArrayBounds),
            ("WritesInEarlyExit", RemarkCategory::EarlyExit),
            ("VectorizationNotBeneficial", RemarkCategory::NotBeneficial),
            ("CantVectorizeLibcall", RemarkCategory::LibcallOrInstr),
            ("CantVectorizeInstruction", RemarkCategory::LibcallOrInstr),
            ("MissedDetails", RemarkCategory::Other("MissedDetails".into())),
        ];
        for (name, want) in cases {
            assert_eq!(m.clang_category(name), want, "{name}");
        }
    }

    #[test]
    fn intel_keywords_ignore_case() {
        let m = CategoryMap::default();
        assert_eq!(m.intel_category("Assumed ANTI dependence between a"), Some(RemarkCategory::AntiDependence));
        assert_eq!(m.intel_category("loop control variable i was found"), Some(RemarkCategory::LoopControlVar));
        assert_eq!(m.intel_category("unsupported data type"), None);
    }
}
