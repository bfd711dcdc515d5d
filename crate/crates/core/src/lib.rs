#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod arrays;
pub mod assembly;
pub mod blocks;
pub mod cell_data;
pub mod dense;
pub mod error;
pub mod fe_spaces;
pub mod fields;
pub mod geometry;
pub mod maps;
pub mod reffe;
pub mod solvers;
pub mod tensors;

pub use error::{Error, Result};
