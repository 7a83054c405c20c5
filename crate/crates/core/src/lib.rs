pub mod bits;
pub mod codec;
pub mod complexity;
pub mod compressor;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod harness;
pub mod machine;
pub mod mutual_info;
pub mod oracle;
pub mod pinned;

pub use error::{Error, Result};
