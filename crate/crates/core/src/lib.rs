pub mod gf;
pub mod linalg;
pub mod network;
pub mod codec;
pub mod adversary;
pub mod qcheck;
pub mod harness;
