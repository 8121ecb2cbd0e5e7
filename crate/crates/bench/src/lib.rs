//! Shared scenario helpers for the benchmark targets.
