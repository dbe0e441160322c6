//! Holds the `acceptance` test target. Run it with
//! `cargo test -p trimhelix-verify --test acceptance`.
