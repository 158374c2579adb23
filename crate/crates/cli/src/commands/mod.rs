pub mod admd;
pub mod cluster;
pub mod fit;
pub mod simulate;
pub mod synth;
pub mod validate;
