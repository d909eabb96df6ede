//! Lasso regularization paths and the candidate collections built from them.

mod collections;
mod lars;

pub use collections::{build_collection_prefix, build_collection_subsets};
pub use lars::{lars_path, LarsAction, LarsEvent, LarsOptions, LarsPath};
