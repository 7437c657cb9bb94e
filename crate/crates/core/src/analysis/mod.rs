//! Structure of tree maps without periodic cut-points: consistent sequences,
//! limit sets, the attracting fixed point and its basin.

mod afp;
mod basin;
mod consistent;
mod limsup;
mod points;

pub use afp::{
    certify_afp, default_start, find_afp, find_afp_from, verify_no_periodic_cutpoints, AfpReport, CutPointCheck,
    DescentStep,
};
pub use basin::{immediate_basin, BasinReport, OpenSubtree};
pub use consistent::{is_consistent_with, partition_consistent, ConsistentClass, ConsistentPartition};
pub use limsup::{limsup_set, LimsupReport};
pub use points::{classify_point, omega_limit, OmegaReport, PointClass, PointConfig};
