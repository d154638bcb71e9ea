//! Amoebot system compiled into a constant-frame surface CRN where each
//! particle occupies one or two cells.

use workbench::cross::movement;
use workbench::format::ModelFile;
use workbench::model::random_trace;
use workbench::trace::Snapshot;
use workbench::Region;

fn main() {
    let ModelFile::Amoebot(m) = ModelFile::parse(include_str!("../models/push.amoebot")).unwrap() else { unreachable!() };
    let src = m.system();
    let rg = Region::new(3);
    let comp = movement::compile(&src, &rg).unwrap();
    let mut sys = comp.system.clone();
    sys.initial = movement::settled(&src, &src.initial, &rg);
    let (events, end) = random_trace(&sys, &rg, 2, 500);
    println!("{} reactions", events.len());
    let (prep, wait) = movement::handover_nodes(&end);
    println!("handover roles left: prep {prep}, wait {wait}");
    match movement::project(&end) {
        Some(img) => print!("{}", Snapshot::of_particles(&img)),
        None => println!("mid-handshake"),
    }
}
