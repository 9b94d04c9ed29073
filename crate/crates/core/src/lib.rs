pub mod bounds;
pub mod error;
pub mod generators;
pub mod mdp;
pub mod nonindex;
pub mod rmab;
pub mod rollout;
pub mod scenario;
pub mod stream;
pub mod whittle;

pub use error::{Error, ErrorKind, Result};
