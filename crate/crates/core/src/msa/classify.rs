//! Ball predicates: resonance, singularity, tunneling, complete non-resonance and
//! m-localization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::msa::params::{ceil_power, gamma, snapped_power, ScaleParams};
use crate::operator::{spectral_gap, Realization, SpectralData};

/// Cap on the number of witness pairs stored per verdict.
pub const MAX_WITNESSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: u64,
}

impl Ball {
    pub fn new(center: usize, radius: u64) -> Self {
        Ball { center, radius }
    }

    pub(crate) fn radius_u32(&self) -> u32 {
        u32::try_from(self.radius).unwrap_or(u32::MAX)
    }
}

/// A pair `(x, y)` violating a decay bound: `value` exceeded `bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub x: usize,
    pub y: usize,
    pub distance: u64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceVerdict {
    pub resonant: bool,
    pub gap: f64,
    pub threshold: f64,
}

/// R iff dist(Σ, E) < exp(-L^β).
pub fn classify_resonant(s: &SpectralData, e: f64, p: &ScaleParams, l: u64) -> ResonanceVerdict {
    let gap = spectral_gap(s, e);
    let threshold = p.resonance_threshold(l);
    ResonanceVerdict { resonant: gap < threshold, gap, threshold }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularReason {
    /// The decay inequality failed for at least one admissible pair.
    Decay,
    /// E lies within the NearSpectrum tolerance of Σ(H_B).
    NearSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularVerdict {
    pub singular: bool,
    pub reason: Option<SingularReason>,
    /// Admissible pairs (x < y) examined.
    pub pairs_checked: usize,
    pub violations: usize,
    pub witnesses: Vec<PairWitness>,
}

/// (E, m)-nonsingular iff C_d^2 L^d |G_B(x, y; E)| <= exp(-γ(m, L) d(x, y)) for every pair in
/// the ball with d(x, y) >= ⌈L^{(1+ϱ)/α}⌉. Distances are taken in `graph`.
pub fn classify_singular(
    s: &SpectralData,
    graph: &FiniteGraph,
    ball: Ball,
    e: f64,
    p: &ScaleParams,
    c_d: f64,
) -> Result<SingularVerdict> {
    let l = ball.radius;
    let min_dist = p.ns_min_distance(l);
    let members = s.domain().members();
    let g_matrix = match s.green_matrix(e) {
        Ok(m) => m,
        Err(Error::NearSpectrum { .. }) => {
            return Ok(SingularVerdict {
                singular: true,
                reason: Some(SingularReason::NearSpectrum),
                pairs_checked: 0,
                violations: 0,
                witnesses: vec![PairWitness { x: ball.center, y: ball.center, distance: 0, value: f64::INFINITY, bound: 0.0 }],
            })
        }
        Err(err) => return Err(err),
    };
    let prefactor = c_d * c_d * (l as f64).powi(graph.dim_hint() as i32);
    let rate = gamma(p.m, l.max(1), p.tau);
    let mut verdict =
        SingularVerdict { singular: false, reason: None, pairs_checked: 0, violations: 0, witnesses: Vec::new() };
    for (i, &x) in members.iter().enumerate() {
        let dist = graph.distances_from(x)?;
        for (j, &y) in members.iter().enumerate().skip(i + 1) {
            let d = u64::from(dist[y]);
            if d < min_dist {
                continue;
            }
            verdict.pairs_checked += 1;
            let value = prefactor * g_matrix[(i, j)].abs();
            let bound = (-rate * d as f64).exp();
            if value > bound {
                verdict.violations += 1;
                if verdict.witnesses.len() < MAX_WITNESSES {
                    verdict.witnesses.push(PairWitness { x, y, distance: d, value, bound });
                }
            }
        }
    }
    if verdict.violations > 0 {
        verdict.singular = true;
        verdict.reason = Some(SingularReason::Decay);
    }
    Ok(verdict)
}

/// Singularity verdict for a ball of a realisation.
pub fn classify_ball_singular(
    r: &Realization<'_>,
    ball: Ball,
    e: f64,
    p: &ScaleParams,
    c_d: f64,
) -> Result<SingularVerdict> {
    let s = r.ball_spectrum(ball.center, ball.radius_u32())?;
    classify_singular(&s, r.graph(), ball, e, p, c_d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TunnelingMode {
    /// T iff two disjoint singular sub-balls exist.
    Pairwise,
    /// T iff more than L_k^{σ(α-1)} pairwise disjoint singular sub-balls exist.
    Counted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelingVerdict {
    pub tunneling: bool,
    /// Maximal number of pairwise disjoint singular sub-balls (a lower bound if not `exact`).
    pub count: usize,
    pub exact: bool,
    pub threshold: f64,
    pub sub_balls: usize,
    pub singular_centers: Vec<usize>,
}

/// Maximum number of pairwise disjoint balls of radius `radius` among `centers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointCount {
    pub count: usize,
    pub exact: bool,
}

/// Centers above which only the greedy lower bound is computed.
pub const EXACT_DISJOINT_LIMIT: usize = 20;

/// Two balls of equal radius r in a graph metric are disjoint iff d(x, y) > 2r.
pub fn max_disjoint_singular(centers: &[usize], radius: u64, g: &FiniteGraph) -> Result<DisjointCount> {
    let mut centers = centers.to_vec();
    centers.sort_unstable();
    centers.dedup();
    let n = centers.len();
    if n == 0 {
        return Ok(DisjointCount { count: 0, exact: true });
    }
    let mut conflicts = vec![0u64; n];
    let mut conflict_lists = vec![Vec::new(); n];
    for i in 0..n {
        let dist = g.distances_from(centers[i])?;
        for j in 0..n {
            if i != j && u64::from(dist[centers[j]]) <= 2 * radius {
                if n <= EXACT_DISJOINT_LIMIT {
                    conflicts[i] |= 1 << j;
                }
                conflict_lists[i].push(j);
            }
        }
    }
    if n <= EXACT_DISJOINT_LIMIT {
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        return Ok(DisjointCount { count: max_independent(all, &conflicts), exact: true });
    }
    // Greedy by fewest conflicts; never returns fewer than 2 when two disjoint balls exist.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (conflict_lists[i].len(), i));
    let mut blocked = vec![false; n];
    let mut count = 0;
    for i in order {
        if blocked[i] {
            continue;
        }
        count += 1;
        blocked[i] = true;
        for &j in &conflict_lists[i] {
            blocked[j] = true;
        }
    }
    Ok(DisjointCount { count, exact: false })
}

fn max_independent(candidates: u64, conflicts: &[u64]) -> usize {
    if candidates == 0 {
        return 0;
    }
    let v = candidates.trailing_zeros() as usize;
    let rest = candidates & !(1u64 << v);
    let with = 1 + max_independent(rest & !conflicts[v], conflicts);
    if conflicts[v] & rest == 0 {
        return with;
    }
    with.max(max_independent(rest, conflicts))
}

pub fn classify_tunneling(
    r: &Realization<'_>,
    big_ball: Ball,
    e: f64,
    p: &ScaleParams,
    small_radius: u64,
    mode: TunnelingMode,
    c_d: f64,
) -> Result<TunnelingVerdict> {
    if big_ball.radius <= 2 * small_radius {
        return Err(Error::InvalidGeometry(format!(
            "big radius {} must exceed twice the small radius {small_radius}",
            big_ball.radius
        )));
    }
    let threshold = match mode {
        TunnelingMode::Pairwise => 1.0,
        TunnelingMode::Counted => {
            let sigma = p.sigma.ok_or_else(|| Error::InvalidParams("counted tunneling needs sigma".into()))?;
            snapped_power(small_radius, sigma * (p.alpha - 1.0))
        }
    };
    let small = u32::try_from(small_radius).map_err(|_| Error::InvalidSize("radius overflow".into()))?;
    let centers = r.inner_centers(big_ball.center, big_ball.radius_u32(), small)?;
    let mut singular_centers = Vec::new();
    for &x in &centers {
        if classify_ball_singular(r, Ball::new(x, small_radius), e, p, c_d)?.singular {
            singular_centers.push(x);
        }
    }
    let disjoint = max_disjoint_singular(&singular_centers, small_radius, r.graph())?;
    let tunneling = match mode {
        TunnelingMode::Pairwise => disjoint.count >= 2,
        TunnelingMode::Counted => disjoint.count as f64 > threshold,
    };
    Ok(TunnelingVerdict {
        tunneling,
        count: disjoint.count,
        exact: disjoint.exact,
        threshold,
        sub_balls: centers.len(),
        singular_centers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantProbe {
    pub ball: Ball,
    pub gap: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnrVerdict {
    pub cnr: bool,
    /// First resonant probe, in probe order (big ball, concentric radii ascending, inner L_k-balls).
    pub witness: Option<ResonantProbe>,
    pub probes: usize,
}

/// Complete non-resonance of `B_{L_{k+1}}(u)` probed on: the ball itself, every concentric
/// ball of radius in `[L_k, L_{k+1})`, and every `L_k`-ball contained in it.
pub fn classify_cnr(r: &Realization<'_>, big_ball: Ball, e: f64, p: &ScaleParams, small_radius: u64) -> Result<CnrVerdict> {
    if small_radius > big_ball.radius {
        return Err(Error::InvalidGeometry("L_k must not exceed L_{k+1}".into()));
    }
    let mut probes: Vec<Ball> = vec![big_ball];
    probes.extend((small_radius..big_ball.radius).map(|rad| Ball::new(big_ball.center, rad)));
    let small = u32::try_from(small_radius).map_err(|_| Error::InvalidSize("radius overflow".into()))?;
    for x in r.inner_centers(big_ball.center, big_ball.radius_u32(), small)? {
        if x != big_ball.center {
            probes.push(Ball::new(x, small_radius));
        }
    }
    for (count, ball) in probes.iter().enumerate() {
        let s = r.ball_spectrum(ball.center, ball.radius_u32())?;
        let verdict = classify_resonant(&s, e, p, ball.radius);
        if verdict.resonant {
            return Ok(CnrVerdict {
                cnr: false,
                witness: Some(ResonantProbe { ball: *ball, gap: verdict.gap, threshold: verdict.threshold }),
                probes: count + 1,
            });
        }
    }
    Ok(CnrVerdict { cnr: true, witness: None, probes: probes.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationVerdict {
    pub localized: bool,
    pub pairs_checked: usize,
    pub violations: usize,
    pub witnesses: Vec<PairWitness>,
}

/// m-localized iff Σ_i |ψ_i(x) ψ_i(y)| <= exp(-γ(m, L) d(x, y)) whenever d(x, y) >= ⌈L^{7/8}⌉.
pub fn classify_m_localized(s: &SpectralData, graph: &FiniteGraph, ball: Ball, p: &ScaleParams) -> Result<LocalizationVerdict> {
    let l = ball.radius;
    let min_dist = ceil_power(l, 7.0 / 8.0);
    let rate = gamma(p.m, l.max(1), p.tau);
    let members = s.domain().members();
    let vecs = s.eigenvectors();
    let mut verdict = LocalizationVerdict { localized: true, pairs_checked: 0, violations: 0, witnesses: Vec::new() };
    if l == 0 {
        return Ok(verdict);
    }
    for (i, &x) in members.iter().enumerate() {
        let dist = graph.distances_from(x)?;
        for (j, &y) in members.iter().enumerate().skip(i + 1) {
            let d = u64::from(dist[y]);
            if d < min_dist {
                continue;
            }
            verdict.pairs_checked += 1;
            let value: f64 = (0..s.dim()).map(|k| (vecs[(i, k)] * vecs[(j, k)]).abs()).sum();
            let bound = (-rate * d as f64).exp();
            if value > bound {
                verdict.violations += 1;
                if verdict.witnesses.len() < MAX_WITNESSES {
                    verdict.witnesses.push(PairWitness { x, y, distance: d, value, bound });
                }
            }
        }
    }
    verdict.localized = verdict.violations == 0;
    Ok(verdict)
}

/// All flags computed for one (ball, E); `None` where a predicate was not evaluated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BallVerdict {
    pub resonant: Option<bool>,
    pub singular: Option<bool>,
    pub tunneling: Option<bool>,
    pub cnr: Option<bool>,
    pub m_localized: Option<bool>,
}
