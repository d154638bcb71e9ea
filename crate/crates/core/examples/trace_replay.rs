//! Records a trace, round-trips it through its text form and replays it.

use workbench::format::ModelFile;
use workbench::trace::{self, TraceFile};

fn main() {
    let m = ModelFile::parse(include_str!("../models/grow.dscrn")).unwrap();
    let (t, end) = trace::record(&m, 3, 99, 6).unwrap();
    let text = t.to_string();
    print!("{text}");
    let back = TraceFile::parse(&text).unwrap();
    let frames = trace::replay_file(&m, &back).unwrap();
    println!("{} frames, last frame matches the run: {}", frames.len(), frames.last() == Some(&end));

    let mut tampered = back.clone();
    tampered.events.reverse();
    if let Err(e) = trace::replay_file(&m, &tampered) {
        println!("reversed trace rejected: {e}");
    }
}
