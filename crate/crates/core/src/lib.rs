pub mod model;
pub mod saddle;
mod sparse;
pub mod fokkerplanck;
pub mod sde;
pub mod diffusion;
pub mod lindblad;
pub mod cli;
