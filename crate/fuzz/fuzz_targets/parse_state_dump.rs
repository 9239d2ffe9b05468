#![no_main]

use libfuzzer_sys::fuzz_target;
use spinchain::evolution::parse_state_dump;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(state) = parse_state_dump(text) {
        assert_eq!(state.amplitudes.len(), 1usize << state.length());
        let again = parse_state_dump(&state.to_dump(0.0)).expect("serialized dump must parse");
        assert_eq!(again.amplitudes, state.amplitudes);
    }
});
