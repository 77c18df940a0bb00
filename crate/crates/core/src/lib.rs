//! Strategic stable matching: mechanisms, honesty metrics, equilibrium
//! refinements and exhaustive small-instance verification.

pub mod college;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod format;
pub mod game;
pub mod honesty;
pub mod mechanisms;
pub mod model;
pub mod properties;
pub mod search;

pub use error::{Error, ParseErrorKind, Result};
pub use mechanisms::{Builtin, MatchDistribution, Mechanism};
pub use model::{AgentId, Entry, Matching, PreferenceList, Profile, Side};
