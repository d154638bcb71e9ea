//! Tile systems compiled into directed surface CRNs that observe neighbors
//! before committing an attachment.

use workbench::assembly::corner_toy;
use workbench::cross::observe;
use workbench::format::ModelFile;
use workbench::model::random_trace;
use workbench::scrn::Rules;
use workbench::Region;

fn main() {
    let atam = corner_toy();
    let comp = observe::compile_atam(&atam).unwrap();
    if let Rules::Table(t) = &comp.system.rules {
        println!("aTAM: {} reactions", t.len());
        for (r, prov) in t.rules().iter().zip(&comp.provenance).take(8) {
            let why: Vec<String> = prov.iter().map(ToString::to_string).collect();
            println!("  {r}    [{}]", why.join("; "));
        }
    }
    let (_, end) = random_trace(&comp.system, &Region::new(2), 1, 10_000);
    let image = end.try_map(workbench::assembly::null(), |c| Some(observe::represent(c)));
    println!("random terminal image: {}", image.unwrap());

    let ModelFile::Ta(ta) = ModelFile::parse(include_str!("../models/attach.ta")).unwrap() else { unreachable!() };
    let comp = observe::compile_ta(&ta).unwrap();
    println!("TA: compiled to {:?}", comp.system.rules);
}
