pub mod bounds;
pub mod bruteforce;
pub mod contfrac;
pub mod mpreal;
pub mod pipeline;
pub mod reduction;
pub mod report;
pub mod sequences;
