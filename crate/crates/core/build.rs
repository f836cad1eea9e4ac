fn main() {
    // LAPACK/BLAS provider for ndarray-linalg: the system OpenBLAS ships the
    // full LAPACK symbol set, so we link it directly instead of pulling in
    // the openblas-src build machinery.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
