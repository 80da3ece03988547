pub mod bench;
pub mod config;
pub mod error;
pub mod forge;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod lasserre;
pub mod matroid;
pub mod oracle;
pub mod pipeline;
pub mod rounding;
pub mod seed;
pub mod verify;
