fn main() {
    // Regenerate the C header when the crate changes. Failures are not
    // fatal: consumers can fall back to the committed include/folms.h.
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(format!("{crate_dir}/include/folms.h"));
        }
        Err(err) => {
            println!("cargo:warning=cbindgen failed: {err}");
        }
    }
}
