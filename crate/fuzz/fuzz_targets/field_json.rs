#![no_main]
use libfuzzer_sys::fuzz_target;

use ou_spectral::SpectralField;

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = SpectralField::from_json_slice(data) {
        // Accepted records survive a serialize/parse cycle unchanged.
        let again = SpectralField::from_json_slice(field.to_json_string().as_bytes())
            .expect("re-encoded record must parse");
        assert_eq!(field, again);
    }
});
