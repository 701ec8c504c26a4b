pub mod algebra;
pub mod cochain;
pub mod cohomology;
pub mod deform;
pub mod error;
pub mod exactla;
pub mod rational;
pub mod suite;
