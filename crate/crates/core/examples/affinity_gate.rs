//! Tile automata whose rules may weaken a bond are refused at load time.

use workbench::assembly::ladder_ta;
use workbench::format::ModelFile;

fn main() {
    for monotone in [true, false] {
        match ladder_ta(4, monotone).check_affinity_strengthening() {
            Ok(()) => println!("ladder (monotone={monotone}): accepted"),
            Err(e) => println!("ladder (monotone={monotone}): {e}"),
        }
    }
    match ModelFile::parse(include_str!("../models/ladder_decreasing.ta")) {
        Ok(_) => println!("file accepted"),
        Err(e) => println!("file refused: {e}"),
    }
}
