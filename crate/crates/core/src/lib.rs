pub mod ce_bounds;
pub mod collective;
pub mod covariance;
pub mod error;
pub mod fisher;
pub mod global_control;
pub mod linalg;
pub mod optim;
pub mod photonics;
pub mod qcore;
pub mod readout;
pub mod tol;
