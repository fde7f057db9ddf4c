pub mod attacks;
pub mod classgroup;
pub mod protocol;
pub mod qsim;
pub mod scheme;
