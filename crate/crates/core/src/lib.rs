pub mod boundary_probe;
pub mod corpus;
pub mod error;
pub mod filling;
pub mod gehring_hayman;
pub mod graph;
pub mod hyperbolicity;
pub mod io;
pub mod label;
pub mod metric;
pub mod model_spaces;
pub mod uniformize;

pub use error::{Error, Result};
pub use label::Label;
