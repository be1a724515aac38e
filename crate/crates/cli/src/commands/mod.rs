pub mod constancy;
pub mod invariants;
pub mod segment;
pub mod simulate;

mod shared;
