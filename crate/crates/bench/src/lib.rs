//! Criterion benchmarks for operator assembly, Laplacian kernels and the cone solver.
