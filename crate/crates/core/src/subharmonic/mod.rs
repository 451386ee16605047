//! (ℓ, q)-subharmonic functions on graphs and their radial descent bounds.

pub mod bounds;
pub mod check;
pub mod generator;
pub mod green;

pub use bounds::{annuli_bound, radial_bound, radial_bound_relaxed, two_ball_bound, Annulus, AnnuliCover};
pub use check::{
    certify_annular, is_lq_subharmonic, is_lqr_subharmonic, radial_estimate, regular_radii, regular_set,
    AnnularVerdict, RadialEstimate, SubharmonicCertificate, SubharmonicVerdict, SubharmonicWitness,
};
pub use green::{verify_green_subharmonicity, GreenSubharmonicity};
