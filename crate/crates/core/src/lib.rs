//! Classical shadow tomography of quantum states and channels.
//!
//! Channels are learned from randomized single-shot records: a random
//! product eigenstate (or Clifford-rotated basis state) is sent through the
//! channel and the output is measured in a random frame. Each record yields an
//! unbiased snapshot of the Choi matrix. From a set of records the crate
//! reconstructs the Choi matrix, estimates channel functionals by median of
//! means, applies a channel shadow to a state shadow, composes two channel
//! shadows and checks unitarity through the Choi purity.
//!
//! Every numeric type is generic over a [`Real`] scalar (`f64` or `f32`).
//! The aliases at the crate root fix the scalar to `f64`.
//!
//! Conventions: operators are dense and row-major, qubit 0 is the most
//! significant tensor factor, and in a Choi matrix the input register comes
//! first.
//!
//! ```
//! use proc_shadow::{acquire_process_shadow, Channel, Ensemble};
//! use proc_shadow::rng::stream;
//!
//! let ch = Channel::<f64>::identity(1);
//! let ps = acquire_process_shadow(&ch, Ensemble::PauliProduct, Ensemble::PauliProduct, 2000, &mut stream(7, 0)).unwrap();
//! let eta = ps.reconstruct_choi().unwrap();
//! let exact = ch.choi().normalize();
//! assert!((eta.as_operator() - exact.as_operator()).operator_norm() < 0.2);
//! ```

pub mod algebra;
pub mod applications;
pub mod channel;
pub mod complexity;
pub mod ensembles;
pub mod error;
pub mod operator;
pub mod pauli;
pub mod process_shadows;
pub mod rng;
pub mod scalar;
pub mod state;
pub mod state_shadows;
pub mod stats;
pub mod zoo;

pub use algebra::{
    apply_process_to_state_shadow, compose_process_shadows, weight_sign_statistics, SignStatistics,
    WeightedSnapshotSum,
};
pub use applications::{
    multitime_correlator_exact_input, multitime_correlator_shadow_input, purity_estimate,
    transition_probability, unitarity_verdict, CorrelatorSpec, UnitarityReport, Verdict,
    VerdictOptions,
};
pub use channel::{Channel, ChoiMatrix};
pub use complexity::{
    f_value, s_operator, sample_budget, shadow_norm_bruteforce, verify_lemma1, ComplexityAnswer,
    ComplexityQuery, Observable,
};
pub use ensembles::{Axis, Bits, Clifford, Ensemble, UnitarySpec};
pub use error::{Result, ShadowError};
pub use operator::DenseOperator;
pub use pauli::{Pauli, PauliString};
pub use process_shadows::{acquire_process_shadow, reconstruct_choi, ProcessShadow, ShadowRecord};
pub use scalar::{Cx, Real};
pub use state::DensityMatrix;
pub use state_shadows::{acquire_state_shadow, ShadowEstimate, StateSnapshot};
pub use zoo::{named_channel, random_full_rank_channel, random_unitary_channel, NamedChannel};

pub type Complex = Cx<f64>;
pub type Operator = DenseOperator<f64>;
pub type Density = DensityMatrix<f64>;
pub type KrausChannel = Channel<f64>;
pub type Choi = ChoiMatrix<f64>;
pub type Frame = UnitarySpec<f64>;
pub type Record = ShadowRecord<f64>;
pub type Shadow = ProcessShadow<f64>;
pub type StateShadow = ShadowEstimate<f64>;
pub type Snapshot = StateSnapshot<f64>;
pub type Query = ComplexityQuery<f64>;
