//! Bounded simulation checks through the file pipeline: a faithful
//! compilation passes and a broken representation is refuted.

use workbench::format::{ModelFile, RepMap, Section};
use workbench::pipeline::{self, Check, VerifyOptions};

fn main() {
    let src = ModelFile::parse(include_str!("../models/line.dscrn")).unwrap();
    let out = pipeline::compile(&src, Section::Ca, None).unwrap();
    for check in [Check::Follows, Check::Models, Check::Equiv] {
        let o = VerifyOptions::new(check, 1, 20);
        let v = pipeline::verify(&src, &out.model, &out.rep, &o).unwrap();
        println!("exit {}\n{}", v.code, v.report);
    }

    let broken = out.rep.to_tsv().replacen("\tB\n", "\tC\n", 1);
    let rep = RepMap::parse_tsv(&broken).unwrap();
    let v = pipeline::verify(&src, &out.model, &rep, &VerifyOptions::new(Check::Follows, 1, 20)).unwrap();
    println!("with a broken table: exit {}\n{}", v.code, v.report);
}
