pub mod config;
pub mod fit;
pub mod io;
pub mod run;
pub mod verify;
