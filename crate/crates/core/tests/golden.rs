//! Checked-in Weingarten tables. Regenerate with
//! `UPDATE_GOLDEN=1 cargo test -p orthowg --test golden`.

use std::path::PathBuf;

use orthowg::weingarten::{verify_gram_inverse, weingarten_table, GoldenTable, WeingartenTable};

fn golden_path(n: usize) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("golden/wg_n{n}.json"))
}

#[test]
fn golden_tables_match_regeneration() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for n in [2, 4, 6, 8] {
        let table = weingarten_table(n).unwrap();
        let fresh = serde_json::to_string_pretty(&table.to_golden()).unwrap() + "\n";
        let path = golden_path(n);
        if update {
            std::fs::write(&path, &fresh).unwrap();
            continue;
        }
        let stored = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{}: {e}; regenerate with UPDATE_GOLDEN=1", path.display()));
        assert_eq!(stored, fresh, "golden table n = {n} differs from regeneration");
    }
}

#[test]
fn golden_tables_invert_the_gram_matrix() {
    for n in [2, 4, 6, 8] {
        let text = std::fs::read_to_string(golden_path(n)).unwrap();
        let golden: GoldenTable = serde_json::from_str(&text).unwrap();
        let table = WeingartenTable::from_golden(&golden).unwrap();
        assert_eq!(table.entries(), weingarten_table(n).unwrap().entries());
        assert!(verify_gram_inverse(&table, true).unwrap(), "n = {n}");
    }
}
