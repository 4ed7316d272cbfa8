//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)]

pub mod atc_brute;
pub mod gauss_seidel;

use pstflow::model::{parse_case, Network};
use std::path::PathBuf;

pub fn case_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../cases")
        .join(name)
}

pub fn load_case(name: &str) -> Network {
    let path = case_path(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    parse_case(&text).unwrap_or_else(|e| panic!("{name} must parse: {e}"))
}

/// Corpus cases with at most 4 buses, checked against the Gauss-Seidel oracle.
pub const SMALL_CASES: &[&str] = &[
    "two_bus.json",
    "two_bus_r.json",
    "parallel_pair.json",
    "triangle.json",
    "triangle_pst.json",
    "four_bus_pst.json",
];

pub const ALL_CASES: &[&str] = &[
    "two_bus.json",
    "two_bus_r.json",
    "parallel_pair.json",
    "triangle.json",
    "triangle_pst.json",
    "four_bus_pst.json",
    "five_bus_pst.json",
];

/// (case, seller area, buyer area) triples with a well-defined transfer.
pub const TRANSFER_CASES: &[(&str, &str, &str)] = &[
    ("two_bus.json", "north", "south"),
    ("two_bus_r.json", "north", "south"),
    ("parallel_pair.json", "left", "right"),
    ("triangle.json", "west", "east"),
    ("four_bus_pst.json", "a", "b"),
    ("five_bus_pst.json", "north", "south"),
];
