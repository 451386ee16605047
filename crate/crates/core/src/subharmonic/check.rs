use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::msa::Ball;
use crate::subharmonic::bounds::{annuli_bound, radial_bound, AnnuliCover};

/// A point where a subharmonicity inequality fails: `value > q · neighborhood_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicWitness {
    pub x: usize,
    /// Radius of the ball the maximum is taken over.
    pub reach: u64,
    /// Center of that ball: `x` for regular points, the domain center for irregular ones.
    pub around: usize,
    pub value: f64,
    pub neighborhood_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicVerdict {
    pub holds: bool,
    pub checked: usize,
    pub witnesses: Vec<SubharmonicWitness>,
}

/// Geometry shared by the checkers: the domain ball, its distances and the function values.
pub(crate) struct Domain<'a> {
    pub g: &'a FiniteGraph,
    pub f: &'a [f64],
    pub radius: u32,
    pub dist_u: &'a [u32],
}

impl<'a> Domain<'a> {
    pub fn new(f: &'a [f64], g: &'a FiniteGraph, ball: Ball) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::InvalidDomain(format!("function has {} values on {} vertices", f.len(), g.len())));
        }
        if let Some(v) = f.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDomain(format!("f({v}) = {} is not a finite nonnegative number", f[v])));
        }
        let radius = u32::try_from(ball.radius).map_err(|_| Error::InvalidSize("radius overflow".into()))?;
        let dist_u = g.distances_from(ball.center)?;
        if dist_u.iter().all(|&d| d <= radius) {
            return Err(Error::InvalidDomain("ball must be a proper subset of the graph".into()));
        }
        Ok(Domain { g, f, radius, dist_u })
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.g.len()).filter(move |&v| self.dist_u[v] <= self.radius)
    }

    pub fn max_around(&self, x: usize, r: u32) -> Result<f64> {
        let d = self.g.distances_from(x)?;
        Ok(self.max_where(|v| d[v] <= r))
    }

    pub fn max_where(&self, keep: impl Fn(usize) -> bool) -> f64 {
        (0..self.g.len()).filter(|&v| keep(v)).map(|v| self.f[v]).fold(0.0, f64::max)
    }

    /// Points x with B_ℓ(x) ⊆ B_L(u).
    pub fn inner_points(&self, ell: u32) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for x in self.members() {
            let d = self.g.distances_from(x)?;
            if (0..self.g.len()).all(|v| d[v] > ell || self.dist_u[v] <= self.radius) {
                out.push(x);
            }
        }
        Ok(out)
    }
}

fn ell_u32(ell: u64) -> Result<u32> {
    u32::try_from(ell).map_err(|_| Error::InvalidSize("ℓ overflow".into()))
}

/// f(x) ≤ q · max_{B_{ℓ+1}(x)} f for every x with B_ℓ(x) ⊆ B_L(center). Distances are those of `g`.
pub fn is_lq_subharmonic(f: &[f64], g: &FiniteGraph, ball: Ball, ell: u64, q: f64) -> Result<SubharmonicVerdict> {
    let dom = Domain::new(f, g, ball)?;
    let ell = ell_u32(ell)?;
    let mut verdict = SubharmonicVerdict { holds: true, checked: 0, witnesses: Vec::new() };
    for x in dom.inner_points(ell)? {
        verdict.checked += 1;
        let m = dom.max_around(x, ell + 1)?;
        if f[x] > q * m {
            verdict.holds = false;
            verdict.witnesses.push(SubharmonicWitness {
                x,
                reach: u64::from(ell) + 1,
                around: x,
                value: f[x],
                neighborhood_max: m,
            });
        }
    }
    Ok(verdict)
}

/// Points of B_L(center) that are (ℓ, q)-regular: f(x) ≤ q · max_{B_{ℓ+1}(x)} f.
pub fn regular_set(f: &[f64], g: &FiniteGraph, ball: Ball, ell: u64, q: f64) -> Result<Vec<usize>> {
    let dom = Domain::new(f, g, ball)?;
    let ell = ell_u32(ell)?;
    let mut out = Vec::new();
    for x in dom.members() {
        if f[x] <= q * dom.max_around(x, ell + 1)? {
            out.push(x);
        }
    }
    Ok(out)
}

/// Radii r in [0, L] whose whole sphere S_r(center) is regular.
pub fn regular_radii(g: &FiniteGraph, ball: Ball, regular: &[usize]) -> Result<Vec<u64>> {
    let dist_u = g.distances_from(ball.center)?;
    let mut all_regular = vec![true; ball.radius as usize + 1];
    let mut in_regular = vec![false; g.len()];
    for &x in regular {
        in_regular[x] = true;
    }
    for v in 0..g.len() {
        let d = u64::from(dist_u[v]);
        if d <= ball.radius && !in_regular[v] {
            all_regular[d as usize] = false;
        }
    }
    Ok((0..=ball.radius).filter(|&r| all_regular[r as usize]).collect())
}

/// Certificate for a function that is (ℓ, q, ℛ)-subharmonic with its irregular points inside a
/// declared annuli cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicCertificate {
    pub domain: Ball,
    pub ell: u64,
    pub q: f64,
    pub regular_set: Vec<usize>,
    pub annuli_cover: AnnuliCover,
}

impl SubharmonicCertificate {
    pub fn total_width(&self) -> u64 {
        self.annuli_cover.total_width
    }

    pub fn c_total(&self) -> u64 {
        self.annuli_cover.c_total
    }

    pub fn bound(&self) -> Result<f64> {
        annuli_bound(self.domain.radius, self.ell, self.q, &self.annuli_cover)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnularVerdict {
    pub subharmonic: SubharmonicVerdict,
    pub regular_set: Vec<usize>,
    /// Irregular points not covered by the annuli (radially).
    pub uncovered: Vec<usize>,
}

impl AnnularVerdict {
    pub fn certified(&self) -> bool {
        self.subharmonic.holds && self.uncovered.is_empty()
    }
}

/// (ℓ, q, ℛ)-subharmonicity: each irregular x whose radius is followed by a fully regular
/// sphere S_r(center), r ≥ d(center, x), r + ℓ + 1 ≤ L + 1, satisfies
/// f(x) ≤ q · max_{B_{r+ℓ+1}(center)} f for every such r. Also reports irregular points that
/// the annuli cover misses.
pub fn is_lqr_subharmonic(
    f: &[f64],
    g: &FiniteGraph,
    ball: Ball,
    ell: u64,
    q: f64,
    cover: &AnnuliCover,
) -> Result<AnnularVerdict> {
    let dom = Domain::new(f, g, ball)?;
    let regular = regular_set(f, g, ball, ell, q)?;
    let radii = regular_radii(g, ball, &regular)?;
    let mut is_regular = vec![false; g.len()];
    for &x in &regular {
        is_regular[x] = true;
    }
    // Prefix maxima of f over balls around the center.
    let mut sphere_max = vec![0.0f64; ball.radius as usize + ell as usize + 3];
    for v in 0..g.len() {
        let d = dom.dist_u[v] as usize;
        if d < sphere_max.len() {
            sphere_max[d] = sphere_max[d].max(f[v]);
        }
    }
    let mut ball_max = sphere_max.clone();
    for i in 1..ball_max.len() {
        ball_max[i] = ball_max[i].max(ball_max[i - 1]);
    }

    let mut verdict = SubharmonicVerdict { holds: true, checked: 0, witnesses: Vec::new() };
    let mut uncovered = Vec::new();
    for x in dom.members() {
        if is_regular[x] {
            continue;
        }
        let dx = u64::from(dom.dist_u[x]);
        if !cover.covers_radius(dx) {
            uncovered.push(x);
        }
        for &r in radii.iter().filter(|&&r| r >= dx && r + ell < ball.radius + 1) {
            verdict.checked += 1;
            let reach = r + ell + 1;
            let m = ball_max[reach as usize];
            if f[x] > q * m {
                verdict.holds = false;
                verdict.witnesses.push(SubharmonicWitness { x, reach, around: ball.center, value: f[x], neighborhood_max: m });
            }
        }
    }
    Ok(AnnularVerdict { subharmonic: verdict, regular_set: regular, uncovered })
}

/// Certify f against a cover; fails with `HypothesisFailure` when the checks or the count
/// hypothesis of the annuli bound do not hold.
pub fn certify_annular(
    f: &[f64],
    g: &FiniteGraph,
    ball: Ball,
    ell: u64,
    q: f64,
    cover: AnnuliCover,
) -> Result<SubharmonicCertificate> {
    let v = is_lqr_subharmonic(f, g, ball, ell, q, &cover)?;
    if !v.subharmonic.holds {
        return Err(Error::HypothesisFailure(format!("{} subharmonicity violations", v.subharmonic.witnesses.len())));
    }
    if !v.uncovered.is_empty() {
        return Err(Error::HypothesisFailure(format!("{} irregular points outside the cover", v.uncovered.len())));
    }
    let cert = SubharmonicCertificate { domain: ball, ell, q, regular_set: v.regular_set, annuli_cover: cover };
    cert.bound()?;
    Ok(cert)
}

/// f(center) against the radial bound, measured both over the whole graph and over B_{L+1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialEstimate {
    pub value: f64,
    pub bound: f64,
    pub max_global: f64,
    pub max_local: f64,
}

impl RadialEstimate {
    pub fn holds_global(&self, rel_tol: f64) -> bool {
        self.value <= self.bound * self.max_global * (1.0 + rel_tol)
    }

    pub fn holds_local(&self, rel_tol: f64) -> bool {
        self.value <= self.bound * self.max_local * (1.0 + rel_tol)
    }
}

pub fn radial_estimate(f: &[f64], g: &FiniteGraph, ball: Ball, ell: u64, q: f64) -> Result<RadialEstimate> {
    let dom = Domain::new(f, g, ball)?;
    let reach = dom.radius + 1;
    Ok(RadialEstimate {
        value: f[ball.center],
        bound: radial_bound(ball.radius, ell, q),
        max_global: dom.max_where(|_| true),
        max_local: dom.max_where(|v| dom.dist_u[v] <= reach),
    })
}
