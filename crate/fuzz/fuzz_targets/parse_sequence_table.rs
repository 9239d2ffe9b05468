#![no_main]

use libfuzzer_sys::fuzz_target;
use spinchain::protocol::parse_table;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(seq) = parse_table(text) {
        let again = parse_table(&seq.to_table()).expect("serialized table must parse");
        assert_eq!(again.pulses, seq.pulses);
        assert_eq!(again.params, seq.params);
    }
});
