pub mod bode;
pub mod generate;
pub mod identify;
pub mod reduce;
pub mod simulate;
pub mod tune;
