use fria_core::catalog::CatalogSet;
use fria_core::model::Ordinal;
use fria_core::risk::{apply_mitigations, RiskLevel, Strategy};
use fria_core::testing::scored_risk;
use proptest::prelude::*;

#[test]
fn default_matrix_is_monotone_on_every_cell() {
    let m = &CatalogSet::seed().matrix;
    for l in 1..=5u8 {
        for s in 1..=5u8 {
            let here = m.level(Ordinal(l), Ordinal(s)).unwrap();
            if l < 5 {
                assert!(here <= m.level(Ordinal(l + 1), Ordinal(s)).unwrap(), "({l},{s}) vs likelihood+1");
            }
            if s < 5 {
                assert!(here <= m.level(Ordinal(l), Ordinal(s + 1)).unwrap(), "({l},{s}) vs severity+1");
            }
        }
    }
    assert_eq!(m.level(Ordinal(1), Ordinal(1)).unwrap(), RiskLevel::Low);
    assert_eq!(m.level(Ordinal(5), Ordinal(5)).unwrap(), RiskLevel::VeryHigh);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn residual_never_exceeds_initial_and_ignores_order(r in scored_risk(), seed in any::<u64>()) {
        let m = &CatalogSet::seed().matrix;
        let out = apply_mitigations(&r, m).unwrap();
        let res = out.residual.unwrap();
        let initial = r.initial_level(m).unwrap();
        prop_assert!(res.level <= initial);

        let dl: u32 = r.mitigations.iter().map(|x| x.likelihood_delta as u32).sum();
        let ds: u32 = r.mitigations.iter().map(|x| x.severity_delta as u32).sum();
        let expect_l = (r.likelihood.unwrap().0 as i64 - dl as i64).max(1) as u8;
        let expect_s = (r.severity.unwrap().0 as i64 - ds as i64).max(1) as u8;
        prop_assert_eq!((res.likelihood.0, res.severity.0), (expect_l, expect_s));
        if r.mitigations.iter().any(|x| x.strategy == Strategy::Eliminate) {
            prop_assert_eq!(res.level, RiskLevel::Low);
        }

        let mut shuffled = r.clone();
        let n = shuffled.mitigations.len();
        if n > 1 {
            shuffled.mitigations.rotate_left((seed as usize) % n);
            shuffled.mitigations.swap(0, (seed as usize / 7) % n);
        }
        prop_assert_eq!(apply_mitigations(&shuffled, m).unwrap().residual, out.residual);
    }
}
