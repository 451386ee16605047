//! Certified test functions for the radial descent bounds.
//!
//! Each generator projects a random nonnegative seed function onto the largest function
//! below it that satisfies a family of constraints `f(x) ≤ q · max_{N(x)} f`. The projection
//! is computed from below (constrained points start at zero), so it terminates and the
//! result satisfies every constraint with the very floating-point operations the checkers use.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::msa::Ball;
use crate::subharmonic::bounds::{Annulus, AnnuliCover};
use crate::subharmonic::check::Domain;

/// Largest g ≤ w with g(x) ≤ q · max_{nbhd[x]} g for every constrained x.
pub fn project_below(w: &[f64], q: f64, constraints: &[(usize, Vec<usize>)]) -> Vec<f64> {
    let mut f = w.to_vec();
    for (x, _) in constraints {
        f[*x] = 0.0;
    }
    loop {
        let mut changed = false;
        for (x, nbhd) in constraints {
            let m = nbhd.iter().map(|&v| f[v]).fold(0.0, f64::max);
            let next = w[*x].min(q * m);
            if next > f[*x] {
                f[*x] = next;
                changed = true;
            }
        }
        if !changed {
            return f;
        }
    }
}

/// Seed function: radial profile q^{⌈(L+1-d)/(ℓ+1)⌉} outside-in, damped by random factors.
pub fn damped_profile(g: &FiniteGraph, ball: Ball, ell: u64, q: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let dist = g.distances_from(ball.center)?;
    let top = ball.radius + 1;
    Ok((0..g.len())
        .map(|v| {
            let d = u64::from(dist[v]);
            let steps = top.saturating_sub(d).div_ceil(ell + 1);
            let damping = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(0.05..1.0) };
            q.powi(steps as i32) * damping * rng.gen_range(0.5..2.0)
        })
        .collect())
}

/// A certified (ℓ, q)-subharmonic function in `ball`.
pub fn generate_subharmonic(g: &FiniteGraph, ball: Ball, ell: u64, q: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = damped_profile(g, ball, ell, q, &mut rng)?;
    let dom = Domain::new(&w, g, ball)?;
    let ell32 = u32::try_from(ell).map_err(|_| Error::InvalidSize("ℓ overflow".into()))?;
    let mut constraints = Vec::new();
    for x in dom.inner_points(ell32)? {
        constraints.push((x, g.ball(x, ell32 + 1)?));
    }
    Ok(project_below(&w, q, &constraints))
}

/// The extremal profile on the path {0, ..., L+1}: f(L+1) = 1 and f(x) = q f(x+1), so that
/// f(0) = q^{L+1} and every step of the descent is an equality.
pub fn sharp_example(l: u64, q: f64) -> Result<(FiniteGraph, Vec<f64>)> {
    let r = usize::try_from(l).map_err(|_| Error::InvalidSize("L overflow".into()))? + 1;
    let g = crate::graph::build_interval_graph(r + 1)?;
    let mut f = vec![1.0; r + 1];
    for x in (0..r).rev() {
        f[x] = q * f[x + 1];
    }
    Ok((g, f))
}

/// Random annuli cover for [`generate_annular`]; respects 2C(ℓ+1) < L when possible.
pub fn random_cover(l: u64, ell: u64, rng: &mut impl Rng) -> Result<AnnuliCover> {
    let max_c = (l.saturating_sub(1)) / (2 * (ell + 1));
    let budget = if max_c == 0 { 0 } else { rng.gen_range(0..=max_c.min(3)) };
    let mut annuli = Vec::new();
    let mut used = 0;
    while used < budget {
        let c = rng.gen_range(1..=(budget - used));
        let width = if ell == 0 { 0 } else { rng.gen_range(1..=c * ell) };
        let inner = rng.gen_range(0..=l.saturating_sub(width));
        annuli.push(Annulus::new(inner, (inner + width).min(l), c));
        used += c;
    }
    AnnuliCover::new(annuli, ell)
}

/// A function whose irregular points lie in `cover` and which is (ℓ, q, ℛ)-subharmonic.
///
/// Points at uncovered radii are forced regular; points at covered radii get the stronger
/// constraint f(x) ≤ q · max over B_{d(u,x)+ℓ+1}(u), and the seed puts spikes there.
pub fn generate_annular(g: &FiniteGraph, ball: Ball, ell: u64, q: f64, cover: &AnnuliCover, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = damped_profile(g, ball, ell, q, &mut rng)?;
    let dom = Domain::new(&w, g, ball)?;
    let dist_u = dom.dist_u;
    let ell32 = u32::try_from(ell).map_err(|_| Error::InvalidSize("ℓ overflow".into()))?;
    let mut constraints = Vec::new();
    let mut spikes = Vec::new();
    for x in dom.members() {
        let dx = u64::from(dist_u[x]);
        if cover.covers_radius(dx) {
            let reach = dist_u[x] + ell32 + 1;
            let nbhd: Vec<usize> = (0..g.len()).filter(|&v| dist_u[v] <= reach).collect();
            constraints.push((x, nbhd));
            spikes.push(x);
        } else {
            constraints.push((x, g.ball(x, ell32 + 1)?));
        }
    }
    for x in spikes {
        w[x] *= 1.0 + rng.gen_range(0.0..4.0) / q;
    }
    Ok(project_below(&w, q, &constraints))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_box_graph, build_interval_graph};
    use crate::subharmonic::check::{is_lq_subharmonic, is_lqr_subharmonic};

    #[test]
    fn projection_satisfies_constraints_and_stays_below() {
        let w = vec![1.0, 5.0, 2.0, 0.5];
        let cons = vec![(0, vec![0, 1]), (1, vec![0, 1, 2]), (2, vec![1, 2, 3])];
        let f = project_below(&w, 0.5, &cons);
        for (x, n) in &cons {
            let m = n.iter().map(|&v| f[v]).fold(0.0, f64::max);
            assert!(f[*x] <= 0.5 * m);
        }
        assert!(f.iter().zip(&w).all(|(a, b)| a <= b));
        assert_eq!(f[3], 0.5);
        assert_eq!(f[2], 0.25);
    }

    #[test]
    fn generated_functions_are_certified() {
        let g = build_box_graph(2, 9).unwrap();
        for seed in 0..20 {
            let f = generate_subharmonic(&g, Ball::new(40, 3), 1, 0.4, seed).unwrap();
            assert!(is_lq_subharmonic(&f, &g, Ball::new(40, 3), 1, 0.4).unwrap().holds);
        }
    }

    #[test]
    fn annular_generator_is_certified_with_irregular_points() {
        let g = build_interval_graph(61).unwrap();
        let ball = Ball::new(30, 24);
        let cover = AnnuliCover::new(vec![Annulus::new(5, 7, 1)], 2).unwrap();
        let mut saw_irregular = false;
        for seed in 0..20 {
            let f = generate_annular(&g, ball, 2, 0.5, &cover, seed).unwrap();
            let v = is_lqr_subharmonic(&f, &g, ball, 2, 0.5, &cover).unwrap();
            assert!(v.certified(), "seed {seed}: {v:?}");
            saw_irregular |= v.regular_set.len() < 49;
        }
        assert!(saw_irregular);
    }
}
