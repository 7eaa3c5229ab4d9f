use std::path::Path;
use std::process::Command;

#[test]
fn header_is_current_and_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/tvalues.h")).unwrap();
    for sym in ["tv_eval", "tv_compare", "tv_phi", "tv_beta", "tv_last_error", "TV_STATUS_BUDGET_EXCEEDED"] {
        assert!(header.contains(sym), "{sym}");
    }
    let src = tempfile::Builder::new().suffix(".c").tempfile().unwrap();
    std::fs::write(
        src.path(),
        "#include \"tvalues.h\"\nint main(void) { TvIndex *k = 0; return tv_index_parse(\"2\", &k) == TV_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(src.path())
        .output()
    {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(_) => eprintln!("no C compiler found; syntax check skipped"),
    }
}
