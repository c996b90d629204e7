//! Independent oracles and fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod brute;
pub mod lps;
pub mod scenarios;
pub mod vertex;
