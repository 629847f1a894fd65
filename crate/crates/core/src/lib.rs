pub mod error;
pub mod lineactions;
pub mod minsubtree;
pub mod bass_serre;
pub mod stallings;
pub mod corecomplex;
pub mod oracle;
pub mod session;
pub mod word;

pub use error::{Error, Result};
pub use word::Word;
