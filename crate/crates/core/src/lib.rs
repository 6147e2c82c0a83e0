pub mod exact_linalg;
pub mod root_g2;
pub mod rep_functors;
pub mod monodromy_dataset;
pub mod cocycle_engine;
pub mod hodge_formulas;
pub mod driver;
