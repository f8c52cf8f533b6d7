#![no_main]

use libfuzzer_sys::fuzz_target;

use clgrid_cli::gridio::{decode_grid, encode_grid};

// The dump decoder must never panic on arbitrary bytes, and accepted dumps
// must re-encode to the identical byte string.
fuzz_target!(|data: &[u8]| {
    if let Ok(dump) = decode_grid(data) {
        assert_eq!(dump.values.len() as u64, dump.rows * dump.cols);
        let back = encode_grid(
            dump.rows,
            dump.cols,
            dump.row_step,
            dump.col_step,
            &dump.values,
        );
        assert_eq!(back, data);
    }
});
