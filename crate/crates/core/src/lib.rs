pub mod corpus;
pub mod error;
pub mod frontend;
pub mod grounder;
pub mod oracle;
pub mod schemes;
pub mod term;
pub mod zclause;

pub use error::{Error, Result};
