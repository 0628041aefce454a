use serde::{Deserialize, Serialize};

use super::impact::RightsImpact;
use super::rules::ImpactCategory;
use crate::catalog::Taxonomy;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemedialMeasure {
    pub description: String,
    pub addresses: ImpactCategory,
    pub mitigation_ref: Option<String>,
    /// Suggestions stay drafts until someone adopts them.
    pub draft: bool,
    /// The measure calls for stopping or rethinking the system.
    #[serde(default)]
    pub escalation: bool,
}

fn templates(c: ImpactCategory) -> &'static [(&'static str, Option<&'static str>, bool)] {
    use ImpactCategory::*;
    match c {
        Limited => &[
            ("Remove the limitation or provide an alternative mechanism", None, false),
            ("Set up manual oversight and intervention procedures", Some("m-monitoring"), false),
            ("Reduce the failure or error rate behind the limitation", Some("m-prevent-reduce"), false),
        ],
        Violated => &[("Stop the processing or redesign the system", None, true)],
        Prevented => &[("Restore the means to exercise the right", Some("m-prevent-reduce"), false)],
        Denied => &[("Recognise the right for the affected persons again", None, false)],
        Unfulfilled => &[("Meet the outstanding requirements of the right", Some("m-audit"), false)],
        Obstructed => &[("Remove the interference with exercising the right", Some("m-prevent-reduce"), false)],
    }
}

/// Draft measures for each category of the impact. References to mitigation
/// kinds are kept only when the taxonomy has them.
pub fn suggest_remedies(i: &RightsImpact, mitigations: &Taxonomy) -> Vec<RemedialMeasure> {
    i.categories
        .iter()
        .flat_map(|&c| {
            templates(c).iter().map(move |&(text, mref, escalation)| RemedialMeasure {
                description: text.to_string(),
                addresses: c,
                mitigation_ref: mref.filter(|m| mitigations.contains(m)).map(str::to_string),
                draft: true,
                escalation,
            })
        })
        .collect()
}
