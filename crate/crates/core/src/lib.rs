pub mod demo;
pub mod graph;
pub mod harvester;
pub mod minilang;
pub mod pdg;
pub mod store;
pub mod synthesis;
