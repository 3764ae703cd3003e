use std::path::Path;

fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let config = cbindgen::Config::from_file(Path::new(&crate_dir).join("cbindgen.toml")).unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            // write_to_file leaves the file untouched when the contents match.
            bindings.write_to_file(Path::new(&crate_dir).join("include/bfrate.h"));
        }
        Err(err) => {
            // Keep the committed header rather than failing the build.
            println!("cargo:warning=header not regenerated: {err}");
        }
    }
}
