//! A unit-seeded directed surface CRN rewritten as a tile automaton.

use workbench::cross::to_ta;
use workbench::format::ModelFile;
use workbench::{explore, Limits, Region};

fn main() {
    let ModelFile::Scrn(src) = ModelFile::parse(include_str!("../models/fork.dscrn")).unwrap() else { unreachable!() };
    let comp = to_ta::compile(&src).unwrap();
    println!("states: {:?}", comp.system.states);
    println!("attachable: {:?}", comp.system.attachable);
    for r in &comp.system.rules {
        println!("{r:?}");
    }
    let g = explore(&comp.system, &Region::new(1), Limits::depth(10));
    for t in g.terminals() {
        println!("terminal {}", g.states[t]);
    }
}
