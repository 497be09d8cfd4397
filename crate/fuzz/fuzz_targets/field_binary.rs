#![no_main]
use libfuzzer_sys::fuzz_target;

use ou_spectral::SpectralField;

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = SpectralField::from_binary(data) {
        // Decoded records must re-encode to the same bytes.
        let bytes = field.to_binary();
        assert_eq!(bytes.as_slice(), data);
    }
});
