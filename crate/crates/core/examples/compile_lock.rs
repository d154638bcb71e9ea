//! Asynchronous CA compiled into a directed surface CRN that locks its
//! neighborhood before each update.

use workbench::cross::lock;
use workbench::format::ModelFile;
use workbench::model::random_trace;
use workbench::Region;

fn main() {
    let ModelFile::Ca(ca) = ModelFile::parse(include_str!("../models/lock.ca")).unwrap() else { unreachable!() };
    let rg = Region::new(1);
    let comp = lock::compile(&ca);
    let start = lock::settled(&ca, &ca.initial, &rg);
    println!("settled encoding: {start}");
    let mut sys = comp.system.clone();
    sys.initial = start;
    for seed in 0..4 {
        let (events, end) = random_trace(&sys, &rg, seed, 200);
        let img = end.try_map(ca.quiescent.clone(), lock::represent);
        println!("seed {seed}: image after {} reactions: {}", events.len(), img.map(|c| c.to_string()).unwrap_or_else(|| "undefined".into()));
    }
}
