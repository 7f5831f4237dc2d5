fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    #[cfg(feature = "generate-header")]
    generate_header();
}

/// Regenerate `include/halfgasket.h` from the exported items. The header
/// is committed, so plain builds never need cbindgen; turn the
/// `generate-header` feature on after changing the FFI surface and commit
/// the result.
#[cfg(feature = "generate-header")]
fn generate_header() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR");
    let config = cbindgen::Config::from_file(format!("{crate_dir}/cbindgen.toml"))
        .expect("cbindgen.toml must parse");
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation must succeed")
        .write_to_file(format!("{crate_dir}/include/halfgasket.h"));
}
