pub mod bench;
pub mod demo;
pub mod evaluate;
pub mod fixtures;
pub mod verify;
