//! Scoring engine of the drawing game. A hidden [`RewardField`] holds reward
//! points sampled on a boundary map and penalty points sampled far from it; a
//! [`GameSession`] scores strokes against the field as they arrive and
//! decides acceptance from the fraction of rewards collected.

pub mod agents;
mod field;
mod session;

pub use field::{generate_field, Boundary, FieldParams, PenaltyPoint, RewardField, RewardPoint};
pub use session::{
    classify_submission, EventFlash, FlashKind, GameEvent, GameSession, SegmentOutcome, SessionStatus, SessionView,
    Verdict,
};

pub const DEFAULT_CUTOFF: f64 = 0.5;
