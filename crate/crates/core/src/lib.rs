pub mod encoding;
pub mod error;
pub mod matcore;
pub mod metrics;
pub mod protosim;
pub mod qinfo;
pub mod qstate;
pub mod report;
pub mod suites;
pub mod transition;

pub use error::{Error, Result};
