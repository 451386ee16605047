//! Multi-scale ball classification.

pub mod classify;
pub mod params;

pub use classify::{
    classify_ball_singular, classify_cnr, classify_m_localized, classify_resonant, classify_singular,
    classify_tunneling, max_disjoint_singular, Ball, BallVerdict, CnrVerdict, DisjointCount, LocalizationVerdict,
    PairWitness, ResonanceVerdict, ResonantProbe, SingularReason, SingularVerdict, TunnelingMode, TunnelingVerdict,
};
pub use params::{gamma, scale_sequence, Preset, ScaleParams, ScaleSequence, Section8Relations};
