//! A single particle that expands and contracts its way across the triangular lattice.

use workbench::format::ModelFile;
use workbench::model::random_trace;
use workbench::trace::Snapshot;
use workbench::Region;

fn main() {
    let ModelFile::Amoebot(m) = ModelFile::parse(include_str!("../models/walker.amoebot")).unwrap() else { unreachable!() };
    let sys = m.system();
    let (events, end) = random_trace(&sys, &Region::new(4), 3, 8);
    for (i, e) in events.iter().enumerate() {
        println!("step={i} {e}");
    }
    print!("{}", Snapshot::of_particles(&end));
}
