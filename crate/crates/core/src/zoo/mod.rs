pub mod atoms;
pub mod bumps;
pub mod oswald;
pub mod sequence;
pub mod singular;
