//! Exhaustive assembly of a small tile set, listing its terminal assemblies.

use workbench::assembly::corner_toy;
use workbench::{explore, Limits, Region};

fn main() {
    let sys = corner_toy();
    let g = explore(&sys, &Region::new(2), Limits::depth(10));
    println!("{} assemblies, exhausted: {}", g.len(), g.exact());
    for t in g.terminals() {
        println!("terminal after {} attachments: {}", g.depth[t], g.states[t]);
        for e in g.path_to(t) {
            println!("  {e}");
        }
    }
}
