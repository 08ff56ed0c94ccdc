pub mod cox;
pub mod divisor;
pub mod fan;
pub mod jacobian;
pub mod lattice;
pub mod oda;
pub mod pipeline;
