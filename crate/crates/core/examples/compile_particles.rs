//! Constant-frame surface CRN compiled into contracted amoebot particles.

use workbench::cross::particles;
use workbench::format::ModelFile;
use workbench::model::random_trace;
use workbench::scrn::nm;
use workbench::Region;

fn main() {
    let ModelFile::Scrn(src) = ModelFile::parse(include_str!("../models/swap.cscrn")).unwrap() else { unreachable!() };
    let rg = Region::new(1);
    let comp = particles::compile(&src, &rg).unwrap();
    let (events, end) = random_trace(&comp.system, &rg, 5, 40);
    for (i, e) in events.iter().enumerate() {
        println!("step={i} {e}");
    }
    let img = particles::project(&end, &nm("O"));
    println!("image {}", img.map(|c| c.to_string()).unwrap_or_else(|| "undefined".into()));
}
