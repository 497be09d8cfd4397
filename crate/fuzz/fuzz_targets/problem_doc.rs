#![no_main]
use libfuzzer_sys::fuzz_target;

use ou_spectral::NlsProblemDoc;

fuzz_target!(|data: &[u8]| {
    if let Ok(doc) = NlsProblemDoc::from_json_slice(data) {
        // Validation may reject the document but must never panic.
        let _ = doc.to_problem();
    }
});
