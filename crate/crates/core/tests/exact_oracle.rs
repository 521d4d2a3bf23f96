//! Field values at the origin against exact rational arithmetic.
//!
//! At x = t = 0 the evolved vectors equal the seeds, so with rational
//! eigenvalues and seeds the kernel matrix and the field are rational and
//! can be computed without rounding.

mod common;

use common::c;
use common::exact::{cases, exact_field, kernel, to_config, to_f64};
use hirota_rh::{build_kernel, evaluate_field, evolve_vectors};

#[test]
fn kernel_matches_exact_entries() {
    for points in cases() {
        let config = to_config(0.0, &points);
        let vecs = evolve_vectors(&config, 0.0, 0.0);
        assert_eq!(vecs.log_scale.iter().copied().fold(0.0f64, f64::max), 0.0);
        let k = build_kernel(&config, &vecs).unwrap();
        let exact = kernel(&points);
        for (i, row) in exact.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let (re, im) = to_f64(e);
                assert!((k.m[(i, j)] - c(re, im)).norm() <= 1e-13, "M[{i}][{j}]");
            }
        }
    }
}

#[test]
fn field_matches_exact_evaluation_at_origin() {
    for points in cases() {
        let exact = exact_field(&points);
        for epsilon in [0.0, 1.0, -0.5] {
            let got = evaluate_field(&to_config(epsilon, &points), 0.0, 0.0).unwrap();
            for (j, e) in exact.iter().enumerate() {
                let (re, im) = to_f64(e);
                let err = (got.q[j] - c(re, im)).norm();
                assert!(err <= 1e-13, "component {j}: error {err:e}");
            }
        }
    }
}
