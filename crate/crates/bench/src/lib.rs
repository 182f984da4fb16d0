//! Shared fixtures for the criterion benches.

use coxeter_core::coxeter::{parse_coxeter_graph, CoxeterSystem};
use coxeter_core::group::GroupCtx;

pub fn figure() -> GroupCtx {
    let cm = parse_coxeter_graph("vertices: a b c d\na b 3\na d 3\nb d 3\nb c inf\n").unwrap();
    GroupCtx::new(CoxeterSystem::new(cm).unwrap())
}

pub fn dinf() -> GroupCtx {
    let cm = parse_coxeter_graph("vertices: s t\ns t inf\n").unwrap();
    GroupCtx::new(CoxeterSystem::new(cm).unwrap())
}
