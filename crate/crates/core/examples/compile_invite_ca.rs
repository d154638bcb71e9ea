//! Directed surface CRN compiled into an asynchronous CA with invite,
//! accept and withdraw handshakes.

use workbench::cross::invite;
use workbench::format::ModelFile;
use workbench::{explore, Limits, Region};

fn main() {
    let ModelFile::Scrn(src) = ModelFile::parse(include_str!("../models/line.dscrn")).unwrap() else { unreachable!() };
    let comp = invite::compile(&src).unwrap();
    println!("{} CA states, {} local rules", comp.system.states.len(), comp.system.rules.len());
    let g = explore(&comp.system, &Region::new(1), Limits::depth(20));
    println!("{} reachable CA configurations", g.len());
    for t in g.terminals() {
        let img = g.states[t].try_map(src.blank.clone(), invite::represent);
        println!("terminal {} (pending {}) represents {}", g.states[t], invite::pending(&g.states[t]), img.map(|c| c.to_string()).unwrap_or_default());
    }
}
