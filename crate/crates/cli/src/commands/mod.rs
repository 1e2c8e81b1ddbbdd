pub mod fit;
pub mod scenarios;
pub mod simulate;
pub mod validate;
