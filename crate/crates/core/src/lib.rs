pub mod empirical_process;
pub mod error;
pub mod extremal_index;
pub mod harness;
pub mod kernels;
pub mod path;
pub mod quadrature;
pub mod scedasis;
pub mod simulate;
pub mod tail;
pub mod testing;

pub use error::{Error, Result};
