fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR");
    let config_path = std::path::Path::new(&crate_dir).join("cbindgen.toml");
    let header = std::path::Path::new(&crate_dir).join("include").join("ssec.h");

    let config = cbindgen::Config::from_file(&config_path).unwrap_or_default();
    match cbindgen::Builder::new()
        .with_config(config)
        .with_crate(&crate_dir)
        .generate()
    {
        Ok(bindings) => {
            std::fs::create_dir_all(header.parent().unwrap()).expect("create include dir");
            bindings.write_to_file(&header);
        }
        Err(e) => {
            // Keep the checked-in header when generation is unavailable.
            if header.exists() {
                println!("cargo:warning=cbindgen failed ({e}); using committed include/ssec.h");
            } else {
                panic!("cbindgen failed and no committed header exists: {e}");
            }
        }
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
