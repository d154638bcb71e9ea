//! Draws the end of a random run as SVG; writes to the path given as the
//! first argument, or to stdout.

use workbench::format::ModelFile;
use workbench::render;
use workbench::trace;

fn main() {
    let m = ModelFile::parse(include_str!("../models/walker.amoebot")).unwrap();
    let (_, end) = trace::record(&m, 4, 11, 12).unwrap();
    let svg = render::svg(&end, Some(4));
    match std::env::args().nth(1) {
        Some(p) => std::fs::write(&p, svg).unwrap(),
        None => print!("{svg}"),
    }
}
