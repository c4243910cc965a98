//! Pure-state linear algebra over party-partitioned qudit registers.

mod basis;
mod binary;
pub mod builtin;
mod error;
mod factor;
pub mod format;
mod measure;
mod state;

pub use basis::{basis, mutual_unbiasedness, BasisKind, BasisSet};
pub use binary::{decimal_to_binary_map, permute_subsystems};
pub use error::QuditError;
pub use factor::{
    all_bipartitions, is_irreducible, product_test, product_test_with_tolerance, reducibility_scan,
    reducibility_scan_with_tolerance,
    Bipartition, FactorizationResult, IRREDUCIBILITY_MARGIN, PRODUCT_TOLERANCE,
};
pub use measure::{
    born_probabilities, joint_distribution, measure, measure_subsystem, project_subsystem,
    DistributionTable, SUPPORT_TOLERANCE,
};
pub(crate) use measure::subsystem_weights;
pub use state::{accumulate_amplitudes, make_state, tensor_product, PureState};

pub type Result<T> = std::result::Result<T, QuditError>;
