use fria_core::reporting::audit::check_audit_chain;
use fria_core::reporting::document::{export_assessment, import_assessment};
use fria_core::testing::assessment;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn export_then_import_is_identity(a in assessment()) {
        prop_assert!(!a.audit_log.is_empty());
        prop_assert!(check_audit_chain(&a.audit_log).is_ok());
        let bytes = export_assessment(&a);
        let back = import_assessment(&bytes).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(export_assessment(&back), bytes);
    }
}
