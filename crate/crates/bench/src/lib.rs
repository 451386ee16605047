//! Benchmark fixtures shared by the criterion targets.

use msa_lab::{build_box_graph, build_interval_graph, Ensemble, FiniteGraph, Realization};

/// A 1D chain and a 2D box of comparable size.
pub fn hosts() -> Vec<(&'static str, FiniteGraph)> {
    vec![
        ("chain", build_interval_graph(129).expect("chain")),
        ("box", build_box_graph(2, 11).expect("box")),
    ]
}

pub fn realization(g: &FiniteGraph, seed: u64) -> Realization<'_> {
    Realization::sample(g, &Ensemble::uniform(8.0), seed)
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_build() {
        let hosts = super::hosts();
        assert_eq!(hosts[0].1.len(), 129);
        assert_eq!(hosts[1].1.len(), 121);
        assert_eq!(super::realization(&hosts[0].1, 1).potential().len(), 129);
    }
}
