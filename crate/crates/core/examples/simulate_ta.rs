//! Tile automaton run: attachments followed by local state changes.

use workbench::format::ModelFile;
use workbench::{explore, Limits, Region};

fn main() {
    let ModelFile::Ta(sys) = ModelFile::parse(include_str!("../models/attach.ta")).unwrap() else { unreachable!() };
    let g = explore(&sys, &Region::new(1), Limits::depth(6));
    println!("{} reachable assemblies", g.len());
    for t in g.terminals() {
        println!("{}", g.states[t]);
    }
}
