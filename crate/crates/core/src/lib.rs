//! Proactive information-need anticipation from check-in activity.
//!
//! Given the last activity a user performed (the category of the venue they
//! checked in to), the models in [`anticipate`] rank canonical information
//! needs by how likely they are to be useful next. The building blocks are
//! fitted from plain TSV/JSON files:
//!
//! * [`taxonomy`]: the two-level activity tree, venues, and check-ins.
//! * [`sessions`]: deduplication, gap-bounded sessions, chronological split.
//! * [`transitions`]: first-order Markov model over activities.
//! * [`needs`]: query-suggestion mining, cleansing, synonym clustering.
//! * [`relevance`]: need relevance per activity, with hierarchical smoothing.
//! * [`temporal`]: pre/peri/post temporal scope of needs.
//! * [`evaluate`]: NDCG, the transition-sampled protocol, paired t-tests.

pub mod anticipate;
pub mod dist;
pub mod error;
pub mod evaluate;
pub mod ids;
pub mod needs;
pub mod relevance;
pub mod sessions;
pub mod taxonomy;
pub mod temporal;
pub mod transitions;
pub(crate) mod tsv;

pub use dist::Distribution;
pub use error::{Error, Result};
pub use ids::{ActivityId, NeedId, UserId, VenueId};
