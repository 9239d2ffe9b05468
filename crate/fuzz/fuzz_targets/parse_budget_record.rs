#![no_main]

use libfuzzer_sys::fuzz_target;
use spinchain::perturbation::parse_budget_record;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(budget) = parse_budget_record(text) {
        assert!((0.0..=1.0).contains(&budget.p_unwanted));
        let again = parse_budget_record(&budget.to_record()).expect("serialized record must parse");
        assert_eq!(again, budget);
    }
});
