//! Support code for the `cellform` binary. Lives in a library so the
//! parser can be unit-tested and reused from integration tests.

pub mod instance_file;
