//! C ABI surface (placeholder).
