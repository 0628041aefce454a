use super::item::{ConsequenceRef, Lasting, RiskItem};
use crate::catalog::Taxonomies;
use crate::intake::{classify_affected_persons, PersonRole};
use crate::model::{DataRole, FriaDescription, PersonalDataItem};

const POOR_ACCURACY: u8 = 2;

fn consequences(subjects: &[String], kinds: &[&str], t: &Taxonomies) -> Vec<ConsequenceRef> {
    subjects
        .iter()
        .flat_map(|p| {
            kinds
                .iter()
                .filter(|k| t.consequences.contains(k))
                .map(move |k| ConsequenceRef {
                    taxonomy_id: k.to_string(),
                    affected_profile: p.clone(),
                    significant: false,
                    lasting: Lasting::Temporary,
                })
        })
        .collect()
}

fn is_personal_output(item: &PersonalDataItem) -> bool {
    item.role_in_system == DataRole::Output || item.is_inference
}

/// Draft risks read off the FRIA description. Drafts are unscored and carry
/// deterministic ids so that suggesting twice yields the same set.
///
/// Each dependency on hardware or software can fail; each personal output
/// can be wrong; each data item with poor accuracy, and each datasheet with
/// known bias, can make outputs wrong. Suggestions whose risk kind is not in
/// the taxonomy are dropped.
pub fn enumerate_candidate_risks(f: &FriaDescription, t: &Taxonomies) -> Vec<RiskItem> {
    let subjects: Vec<String> = classify_affected_persons(f)
        .into_iter()
        .filter(|p| p.role == PersonRole::AiSubject)
        .map(|p| p.id)
        .collect();
    let mut out = Vec::new();

    for (i, dep) in f.deployment.hardware_software.iter().enumerate() {
        let mut r = RiskItem::draft(
            format!("cand-component-failure-{}", i + 1),
            "r-component-failure",
            &["s-component"],
            format!("{dep} fails or becomes unavailable"),
        );
        r.consequences = consequences(&subjects, &["c-delays", "c-denial"], t);
        out.push(r);
    }

    for (i, item) in f.involved_data.outputs.iter().filter(|d| is_personal_output(d)).enumerate() {
        let mut r = RiskItem::draft(
            format!("cand-incorrect-output-{}", i + 1),
            "r-incorrect-output",
            &["s-system"],
            format!("{} is wrong for the person concerned", item.name),
        );
        r.consequences = consequences(&subjects, &["c-exclusion", "c-delays", "c-psychological"], t);
        out.push(r);
    }

    let weak_items = f
        .involved_data
        .inputs
        .iter()
        .filter(|d| matches!(d.role_in_system, DataRole::Input | DataRole::Training | DataRole::Validation))
        .filter(|d| d.quality.accuracy.get() <= POOR_ACCURACY)
        .map(|d| format!("low accuracy of {}", d.name));
    let biased = f
        .provenance
        .datasheets
        .iter()
        .filter(|d| d.known_bias)
        .map(|d| format!("known bias in {}", d.reference));
    for (i, why) in weak_items.chain(biased).enumerate() {
        let mut r = RiskItem::draft(
            format!("cand-data-quality-{}", i + 1),
            "r-incorrect-output",
            &["s-component"],
            format!("Outputs are wrong because of {why}"),
        );
        r.consequences = consequences(&subjects, &["c-exclusion", "c-delays"], t);
        out.push(r);
    }

    out.retain(|r| t.risks.contains(&r.risk_kind) && r.sources.iter().all(|s| t.sources.contains(s)));
    out
}
