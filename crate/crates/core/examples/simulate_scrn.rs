//! Random asynchronous run of a directed surface CRN.

use workbench::format::ModelFile;
use workbench::model::random_trace;
use workbench::Region;

fn main() {
    let ModelFile::Scrn(sys) = ModelFile::parse(include_str!("../models/line.dscrn")).unwrap() else { unreachable!() };
    let rg = Region::new(3);
    println!("initial {}", sys.initial);
    let (events, end) = random_trace(&sys, &rg, 7, 20);
    for (i, e) in events.iter().enumerate() {
        println!("step={i} {e}");
    }
    println!("final {end}");
}
