use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use fria_core::model::{Assessment, ChangeContext, StageError, StageState};

const STATES: [StageState; 4] = [
    StageState::NotStarted,
    StageState::InProgress,
    StageState::Complete,
    StageState::Skipped,
];

fn ctx() -> ChangeContext {
    ChangeContext::new("tester", Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap())
}

fn fresh() -> Assessment {
    Assessment::new("gating", "DE".parse().unwrap(), &ctx())
}

fn permutations(items: &[u8]) -> Vec<Vec<u8>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

// Independent statement of the ordering rule: every earlier stage that was
// not skipped must be complete.
fn allowed(states: &BTreeMap<u8, StageState>, n: u8) -> bool {
    (1..n).all(|m| matches!(states.get(&m).copied().unwrap_or_default(), StageState::Complete | StageState::Skipped))
}

#[test]
fn every_ordering_of_completions_is_gated() {
    let orders = permutations(&[1, 2, 3, 4, 5]);
    assert_eq!(orders.len(), 120);
    let mut violations = Vec::new();
    for skip_dpia in [false, true] {
        for order in &orders {
            let mut a = fresh();
            let mut model: BTreeMap<u8, StageState> = BTreeMap::new();
            if skip_dpia {
                a = a.skip_stage(2, &ctx()).unwrap();
                model.insert(2, StageState::Skipped);
            }
            for &n in order {
                let expect = allowed(&model, n);
                match a.complete_stage(n, &ctx()) {
                    Ok(next) if expect => {
                        a = next;
                        model.insert(n, StageState::Complete);
                    }
                    Err(StageError::OrderViolation { .. }) if !expect => {}
                    other => violations.push(format!("{order:?} skip={skip_dpia} stage {n}: {other:?}")),
                }
            }
        }
    }
    assert!(violations.is_empty(), "{violations:#?}");
}

#[test]
fn every_state_combination_is_gated() {
    let mut checked = 0;
    for code in 0..4usize.pow(5) {
        let states: BTreeMap<u8, StageState> = (1..=5u8)
            .map(|n| (n, STATES[(code / 4usize.pow(n as u32 - 1)) % 4]))
            .collect();
        let mut a = fresh();
        a.stage_states = states.clone();
        for n in 1..=5u8 {
            assert_eq!(a.check_can_complete(n).is_ok(), allowed(&states, n), "{states:?} stage {n}");
            checked += 1;
        }
    }
    assert_eq!(checked, 5 * 1024);
}

#[test]
fn only_the_dpia_stage_can_be_skipped() {
    for n in [1, 3, 4, 5] {
        assert_eq!(fresh().skip_stage(n, &ctx()), Err(StageError::NotSkippable { stage: n }));
    }
    assert!(fresh().skip_stage(2, &ctx()).is_ok());
}
