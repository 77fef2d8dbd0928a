#![no_main]

use libfuzzer_sys::fuzz_target;
use mzn_autogen::orchestrator::RunRecord;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = mzn_autogen::ScriptedBackend::from_json(&text);
    let _ = serde_json::from_str::<RunRecord>(&text);
});
