//! Exact diagonalization of the generalized Dicke model (N qubits with an
//! Ising-type `J_z²` interaction coupled to one bosonic mode) and the
//! multipartite correlation and entanglement measures of its ground state.
//!
//! The pipeline is: [`model`] builds the Hamiltonian, [`spectra`] finds a
//! converged ground state, [`reduce`] traces out the cavity and forms
//! symmetric marginals, and [`measures`] turns those into genuine
//! multipartite correlations, the QFI witness and global entanglement.
//! [`oracle`] repeats everything by brute force in the full `2^N` space for
//! small `N`, and [`sweep`] drives parameter scans and writes CSV/JSON.

pub mod error;
pub mod linalg;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod reduce;
pub mod spectra;
pub mod sweep;

pub use error::{Error, Result};
pub use linalg::{HermitianOperator, StateVector};
pub use measures::{GmcReport, QfiReport};
pub use model::{ModelParams, ProductBasis};
pub use reduce::{BasisTag, DensityMatrix};
pub use spectra::{ConvergenceOptions, Frame, GroundState, SpectralDecomposition};
pub use sweep::{Grid, MeasureSet, NvParams, OutputFormat, SweepConfig, SweepRow};
