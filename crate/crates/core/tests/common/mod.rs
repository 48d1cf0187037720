#![allow(dead_code)]

use std::path::PathBuf;

use pgcl_core::ast::{ProgState, Rat};
use pgcl_core::parser::{parse_program, SourceFile};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> SourceFile {
    let path = fixture_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_program(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn all_fixtures() -> Vec<(String, SourceFile)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .expect("fixture directory")
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".pgcl"))
        .collect();
    names.sort();
    names.into_iter().map(|n| (n.clone(), load(&n))).collect()
}

pub fn state(pairs: &[(&str, i64)]) -> ProgState {
    ProgState::from_pairs(pairs.iter().map(|(n, v)| (*n, Rat::from_integer((*v).into()))))
}
