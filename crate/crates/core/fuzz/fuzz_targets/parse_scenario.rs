//! Fuzzes the scenario-file parser: arbitrary input must never panic, and
//! accepted scenarios must survive an emit/parse round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use treeprice::scenario::{emit_scenario, parse_scenario};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(scenario) = parse_scenario(text) {
            let emitted = emit_scenario(&scenario);
            let reparsed = parse_scenario(&emitted).expect("emitted scenario parses");
            assert_eq!(scenario, reparsed);
        }
    }
});
