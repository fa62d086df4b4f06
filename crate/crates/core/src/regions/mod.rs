//! Entropic set functions over sender subsets, their polymatroid
//! structure, and the rate regions built from them.
//!
//! Subsets are bitmasks internally (bit `z-1` for sender `z`) and 1-based
//! member lists at the API and JSON boundary.

mod properties;
mod region;
mod separate;
mod set_function;
mod vertices;

pub use properties::{
    check_set_function_properties, PropertyCheck, PropertyKind, PropertyReport, Witness,
    ENTROPIC_TOL,
};
pub use region::{
    main_region, membership, Constraint, Direction, MainRegion, Membership, RateRegion, RateTuple,
};
pub use separate::{rate_split, separate};
pub use set_function::{
    chat_from_state, dcheck_from_dhat, dcheck_from_state, dhat_from_state, mask_of, members,
    sender_log_dims, Mask, SetFunction, MAX_SENDERS,
};
pub use vertices::{contrapolymatroid_vertices, polymatroid_vertices, MAX_VERTEX_SENDERS};
