pub mod annotate;
pub mod did;
pub mod link;
pub mod parse;
pub mod report;
pub mod stats;
pub mod validate;
