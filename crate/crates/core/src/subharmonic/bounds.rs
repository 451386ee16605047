use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of radial descent steps of length ℓ+1 that fit in [0, L+1].
pub fn descent_steps(l: u64, ell: u64) -> u64 {
    (l + 1) / (ell + 1)
}

/// Bound on f(center) / M(f) for an (ℓ, q)-subharmonic f in B_L(center): q^{⌊(L+1)/(ℓ+1)⌋}.
pub fn radial_bound(l: u64, ell: u64, q: f64) -> f64 {
    pow(q, descent_steps(l, ell))
}

/// Weaker closed form q^{(L-ℓ)/(ℓ+1)}, always at least [`radial_bound`] for q in (0, 1).
pub fn radial_bound_relaxed(l: u64, ell: u64, q: f64) -> f64 {
    q.powf((l as f64 - ell as f64) / (ell as f64 + 1.0))
}

/// Bound for a function separately subharmonic in two balls of radii r1 and r2.
pub fn two_ball_bound(r1: u64, r2: u64, ell: u64, q: f64) -> f64 {
    pow(q, descent_steps(r1, ell) + descent_steps(r2, ell))
}

/// Annulus `B_outer(u) \ B_inner(u)` of width `outer - inner`, declared as at most `c` widths ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: u64,
    pub outer: u64,
    pub c: u64,
}

impl Annulus {
    pub fn new(inner: u64, outer: u64, c: u64) -> Self {
        Annulus { inner, outer, c }
    }

    pub fn width(&self) -> u64 {
        self.outer.saturating_sub(self.inner)
    }

    /// Radii r with inner < r <= outer.
    pub fn contains_radius(&self, r: u64) -> bool {
        r > self.inner && r <= self.outer
    }
}

/// Validated annuli family with its total width and count constant C = Σ c_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnuliCover {
    pub annuli: Vec<Annulus>,
    pub total_width: u64,
    pub c_total: u64,
}

impl AnnuliCover {
    pub fn new(annuli: Vec<Annulus>, ell: u64) -> Result<Self> {
        for a in &annuli {
            if a.outer < a.inner {
                return Err(Error::InvalidGeometry(format!("annulus ({}, {}] is reversed", a.inner, a.outer)));
            }
            if a.c == 0 {
                return Err(Error::HypothesisFailure("annulus multiplicity c must be at least 1".into()));
            }
            if a.width() > a.c * ell {
                return Err(Error::HypothesisFailure(format!(
                    "annulus ({}, {}] has width {} > c·ℓ = {}",
                    a.inner,
                    a.outer,
                    a.width(),
                    a.c * ell
                )));
            }
        }
        let total_width = annuli.iter().map(Annulus::width).sum();
        let c_total = annuli.iter().map(|a| a.c).sum();
        Ok(AnnuliCover { annuli, total_width, c_total })
    }

    pub fn covers_radius(&self, r: u64) -> bool {
        self.annuli.iter().any(|a| a.contains_radius(r))
    }
}

/// q^{⌊(L+1)/(ℓ+1)⌋ - 2C}, valid when 2C(ℓ+1) < L.
pub fn annuli_bound(l: u64, ell: u64, q: f64, cover: &AnnuliCover) -> Result<f64> {
    let c = cover.c_total;
    if 2 * c * (ell + 1) >= l {
        return Err(Error::HypothesisFailure(format!("2C(ℓ+1) = {} is not below L = {l}", 2 * c * (ell + 1))));
    }
    Ok(pow(q, descent_steps(l, ell) - 2 * c))
}

fn pow(q: f64, k: u64) -> f64 {
    match i32::try_from(k) {
        Ok(k) => q.powi(k),
        Err(_) => q.powf(k as f64),
    }
}
