#![allow(dead_code)]

pub mod endpoint_checks;
pub mod equivalences;
pub mod oracles;
