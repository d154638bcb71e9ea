//! Compiles a directed surface CRN into an undirected one and watches the
//! seed bootstrap a colored 3x3 block around itself.

use workbench::format::ModelFile;
use workbench::lattice::block;
use workbench::orient::{self, Colored};
use workbench::scrn::Rules;
use workbench::{explore, Coord, Limits, Region};

fn main() {
    let ModelFile::Scrn(src) = ModelFile::parse(include_str!("../models/seed.dscrn")).unwrap() else { unreachable!() };
    let comp = orient::compile(&src).unwrap();
    if let Rules::Table(t) = &comp.system.rules {
        println!("{} undirected rules", t.len());
    }
    let g = explore(&comp.system, &Region::new(3), Limits::depth(19));
    let colored = |i: usize| {
        let c = &g.states[i];
        matches!(c.get(Coord::ORIGIN), Colored::Species(_, 5)) && block(Coord::ORIGIN).into_iter().all(|b| c.get(b).color().is_some())
    };
    let Some(hit) = (0..g.len()).find(|&i| colored(i)) else {
        println!("no colored block within depth 19");
        return;
    };
    for (i, e) in g.path_to(hit).iter().enumerate() {
        println!("step={i} {e}");
    }
    println!("{}", g.states[hit]);
    let image = g.states[hit].try_map(src.blank.clone(), |x| comp.image(x));
    println!("image {}", image.map(|c| c.to_string()).unwrap_or_else(|| "undefined".into()));
}
