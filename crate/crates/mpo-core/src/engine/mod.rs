//! MPO run loop (placeholder).
