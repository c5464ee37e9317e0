//! Byte-exact comparison of subcommand outputs with the stored goldens.
//! Set `HARDY_BLESS=1` to rewrite the expected files.

mod common;

use common::{golden_cases, read_dir_files, run_case};

#[test]
fn outputs_match_goldens() {
    let bless = std::env::var_os("HARDY_BLESS").is_some();
    let cases = golden_cases();
    assert!(cases.len() >= 5);
    for case in cases {
        let out = tempfile::tempdir().unwrap();
        let got = run_case(&case, out.path(), Some(1));
        let expected_dir = case.join("expected");
        if bless {
            let _ = std::fs::remove_dir_all(&expected_dir);
            std::fs::create_dir_all(&expected_dir).unwrap();
            for (name, bytes) in &got {
                std::fs::write(expected_dir.join(name), bytes).unwrap();
            }
            continue;
        }
        let expected = read_dir_files(&expected_dir);
        assert_eq!(
            got.keys().collect::<Vec<_>>(),
            expected.keys().collect::<Vec<_>>(),
            "{}",
            case.display()
        );
        for (name, bytes) in &expected {
            assert!(
                &got[name] == bytes,
                "{}: {name} differs from golden",
                case.display()
            );
        }
    }
}
