#![no_main]

use clockmap_core::io::{read_corr, read_curve, read_exact, read_series, read_strings, CsvTable};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = CsvTable::parse(text) {
            let _ = CsvTable::parse(&table.to_csv()).expect("written table parses");
        }
        let _ = read_exact(text);
        let _ = read_series(text);
        let _ = read_curve(text);
        let _ = read_corr(text);
        let _ = read_strings(text);
    }
});
