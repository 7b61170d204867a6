//! Benchmarks for plan generation, auditing, reassignment and scheduling.
