//! Energy spectrum of a harmonic trap decorated with one off-center Dirac
//! delta ("dimple"), and finite-N ideal Bose gas observables built on it.

pub mod app;
pub mod density;
pub mod specfun;
pub mod spectrum;
pub mod thermo;
