//! Interface transfer and its discrete empirical interpolation.

pub mod greedy;
pub mod reducer;
pub mod transfer;

pub use greedy::{deim_indices, deim_indices_limited};
pub use reducer::{build_interface_reducer, reducer_from_basis, reducer_from_spectrum, InterfaceReducer};
pub use transfer::{nearest_dof_map, transfer_linear, InterfaceTransfer};
