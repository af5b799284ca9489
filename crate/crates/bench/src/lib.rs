//! Benchmarks for the assembly and solve kernels.
