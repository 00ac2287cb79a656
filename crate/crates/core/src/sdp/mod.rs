mod diamond;
mod ipm;
mod problem;

pub use diamond::{diamond_norm, diamond_norm_with, DiamondMethod};
pub use ipm::{IpmOptions, IterationRecord, SdpStatus};
pub use problem::{solve_sdp, solve_sdp_with, Entry, SdpProblem, SdpSolution, Sense};
