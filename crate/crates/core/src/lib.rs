//! Gaussian-state phase estimation in passive linear-optical circuits.
//!
//! A probe [`GaussianState`] is sent through a [`ParamCircuit`] whose unitary
//! depends on one phase `φ`. The crate computes the quantum Fisher
//! information of the output, the bound `8‖g‖²N̄(N̄+1)`, the probe that
//! reaches it, a homodyne readout that extracts it and the gain of running
//! the circuit several times in sequence.
//!
//! ```
//! use gaussmet::{corpus, probe, qfi};
//!
//! let mz = corpus::mz1();
//! let spec = probe::optimal_state(&mz, 0.3, 1.0).unwrap();
//! let report = qfi::qfi(&spec.state, &mz, 0.3).unwrap();
//! assert!((report.qfi - 16.0).abs() < 1e-9);
//! ```

pub mod circuit;
pub mod corpus;
pub mod error;
pub mod gaussian;
pub mod homodyne;
pub mod lemmas;
pub mod linalg;
pub mod probe;
pub mod qfi;
pub mod sequential;

pub use circuit::{parse_circuit, GeneratorSpectrum, ParamCircuit, PassiveCircuit};
pub use error::{Error, Result};
pub use gaussian::{random_state, GaussianState, PurityClass, Tolerances};
pub use qfi::{QfiReport, Route};
