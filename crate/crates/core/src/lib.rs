pub mod specfun;
pub mod kernel;
pub mod testfn;
pub mod quad;
pub mod correlators;
pub mod experiment;
pub mod search;
