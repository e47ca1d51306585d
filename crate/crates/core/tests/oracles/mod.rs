//! Independent reference implementations shared by the integration and
//! acceptance tests. Nothing here calls into the library's algorithms.
#![allow(dead_code)]

pub mod cases;
pub mod ctrv;
pub mod raster;
pub mod savgol;
pub mod koi;
pub mod retrieval;
