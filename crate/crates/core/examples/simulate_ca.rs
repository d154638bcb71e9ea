//! Asynchronous cellular automaton: one cell updates per step.

use workbench::format::ModelFile;
use workbench::model::random_trace;
use workbench::Region;

fn main() {
    let ModelFile::Ca(sys) = ModelFile::parse(include_str!("../models/lock.ca")).unwrap() else { unreachable!() };
    let rg = Region::new(2);
    for seed in 0..3 {
        let (events, end) = random_trace(&sys, &rg, seed, 10);
        let steps: Vec<String> = events.iter().map(ToString::to_string).collect();
        println!("seed {seed}: [{}] -> {end}", steps.join(", "));
    }
}
