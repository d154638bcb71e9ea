//! Compilers between model families, each paired with its representation.

pub mod invite;
pub mod lock;
pub mod movement;
pub mod observe;
pub mod particles;
pub mod to_ta;
