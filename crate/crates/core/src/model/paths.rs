//! Leaf field paths of the two descriptions and JSON access by path.

use serde_json::Value;

pub use super::dpia::DPIA_LEAF_PATHS;

pub const FRIA_CATEGORIES: [&str; 6] = [
    "intended_purposes",
    "involved_entities",
    "involved_data",
    "deployment",
    "provenance",
    "operational",
];

pub const FRIA_LEAF_PATHS: [&str; 31] = [
    "intended_purposes.developed",
    "intended_purposes.marketed",
    "intended_purposes.data_collection",
    "involved_entities.deployer",
    "involved_entities.provider",
    "involved_entities.can_update_system",
    "involved_entities.users",
    "involved_entities.ai_subjects",
    "involved_entities.interaction_context",
    "involved_entities.subject_controls",
    "involved_data.inputs",
    "involved_data.operations",
    "involved_data.outputs",
    "involved_data.output_is_profiling",
    "involved_data.output_is_decision",
    "involved_data.special_category",
    "involved_data.special_category_scale",
    "involved_data.special_category_safeguards",
    "deployment.integrations",
    "deployment.modality",
    "deployment.hardware_software",
    "deployment.user_interface",
    "deployment.duration_days",
    "deployment.frequency_per_day",
    "provenance.development_summary",
    "provenance.datasheets",
    "provenance.lifecycle_changes",
    "operational.expected_outputs",
    "operational.logic_summary",
    "operational.predetermined_changes",
    "operational.performance_metrics",
];

/// Leaves that are only asked for when special category data is involved.
pub const FRIA_CONDITIONAL_PATHS: [&str; 2] = [
    "involved_data.special_category_scale",
    "involved_data.special_category_safeguards",
];

/// Leaves every completed FRIA must have addressed.
pub fn fria_required_paths() -> impl Iterator<Item = &'static str> {
    FRIA_LEAF_PATHS
        .iter()
        .copied()
        .filter(|p| !FRIA_CONDITIONAL_PATHS.contains(p))
}

pub fn fria_category(path: &str) -> &str {
    path.split('.').next().unwrap_or(path)
}

pub fn is_fria_leaf(path: &str) -> bool {
    FRIA_LEAF_PATHS.contains(&path)
}

pub fn is_dpia_leaf(path: &str) -> bool {
    DPIA_LEAF_PATHS.contains(&path)
}

fn pointer(path: &str) -> String {
    let mut out = String::new();
    for part in path.split('.') {
        out.push('/');
        out.push_str(&part.replace('~', "~0").replace('/', "~1"));
    }
    out
}

pub fn get_path<'a>(root: &'a Value, path: &str) -> Option<&'a Value> {
    root.pointer(&pointer(path))
}

/// Replaces the value at an existing dotted path. Returns false when a
/// segment of the path does not exist.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> bool {
    match root.pointer_mut(&pointer(path)) {
        Some(slot) => {
            *slot = value;
            true
        }
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DpiaDescription, FriaDescription};
    use std::collections::BTreeSet;

    fn leaves(v: &Value, prefix: &str, depth: usize, out: &mut BTreeSet<String>) {
        match v {
            Value::Object(map) if depth > 0 => {
                for (k, child) in map {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    leaves(child, &p, depth - 1, out);
                }
            }
            _ => {
                out.insert(prefix.to_string());
            }
        }
    }

    #[test]
    fn fria_leaf_list_matches_the_type() {
        let v = serde_json::to_value(FriaDescription::default()).unwrap();
        let mut found = BTreeSet::new();
        leaves(&v, "", 2, &mut found);
        let declared: BTreeSet<String> = FRIA_LEAF_PATHS.iter().map(|s| s.to_string()).collect();
        assert_eq!(found, declared);
    }

    #[test]
    fn dpia_leaf_list_matches_the_type() {
        let v = serde_json::to_value(DpiaDescription::default()).unwrap();
        let found: BTreeSet<String> = v.as_object().unwrap().keys().cloned().collect();
        let declared: BTreeSet<String> = DPIA_LEAF_PATHS.iter().map(|s| s.to_string()).collect();
        assert_eq!(found, declared);
    }

    #[test]
    fn required_paths_exclude_follow_ups() {
        assert_eq!(fria_required_paths().count(), 29);
    }

    #[test]
    fn path_access() {
        let mut v = serde_json::to_value(FriaDescription::default()).unwrap();
        assert!(set_path(&mut v, "deployment.duration_days", Value::from(7)));
        assert_eq!(get_path(&v, "deployment.duration_days"), Some(&Value::from(7)));
        assert!(!set_path(&mut v, "deployment.nope.deeper", Value::Null));
    }
}
