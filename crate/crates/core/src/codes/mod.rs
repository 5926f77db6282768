//! One-block codes, magic words and almost isomorphisms.

pub mod ai;
pub mod magic;
pub mod point;
pub mod transport;

use crate::error::{Result, ShiftError};
use crate::shift::{higher_block, FiniteGraph, PeriodicPoint, Word};

pub use ai::{assemble_ai, detect_conjugacy, gamma_on_point, AlmostIsomorphism, ConjugacyWindow};
pub use magic::{check_witness, verify_magic, verify_magic_with_budget, MagicStatus, MagicWitness, MagicWordCertificate};
pub use point::EventuallyPeriodicPoint;
pub use transport::{
    perturb_potential, recode_potential, transport_measure, verify_correspondence, CorrespondenceOptions, CorrespondenceReport,
    CorrespondenceWitness, TransportMethod, TransportOptions, TransportResult,
};

/// A symbol map `source -> target` sending edges to edges.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBlockCode {
    source: FiniteGraph,
    target: FiniteGraph,
    map: Vec<usize>,
}

impl OneBlockCode {
    pub fn new(source: &FiniteGraph, target: &FiniteGraph, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.vertex_count() {
            return Err(ShiftError::Code(format!("map has {} entries for {} source symbols", map.len(), source.vertex_count())));
        }
        if let Some(&v) = map.iter().find(|&&v| v >= target.vertex_count()) {
            return Err(ShiftError::VertexOutOfRange { index: v, size: target.vertex_count() });
        }
        if let Some((u, v)) = source.edges().into_iter().find(|&(u, v)| !target.has_edge(map[u], map[v])) {
            return Err(ShiftError::Code(format!(
                "source edge {} -> {} maps to the missing target edge {} -> {}",
                source.name(u),
                source.name(v),
                target.name(map[u]),
                target.name(map[v])
            )));
        }
        Ok(OneBlockCode { source: source.clone(), target: target.clone(), map })
    }

    pub fn identity(g: &FiniteGraph) -> Self {
        OneBlockCode { source: g.clone(), target: g.clone(), map: (0..g.vertex_count()).collect() }
    }

    /// Everything onto a single vertex `*` with a loop.
    pub fn collapse(g: &FiniteGraph) -> Self {
        let point = FiniteGraph::new(vec!["*".into()], &[(0, 0)]).expect("one loop");
        OneBlockCode { source: g.clone(), target: point, map: vec![0; g.vertex_count()] }
    }

    /// The labeling of the `n`-block graph by the symbol at `position`.
    pub fn block_labeling(g: &FiniteGraph, n: usize, position: usize) -> Result<Self> {
        if position >= n {
            return Err(ShiftError::InvalidArgument(format!("position {position} outside blocks of length {n}")));
        }
        let hb = higher_block(g, n)?;
        let map = hb.blocks.iter().map(|b| b[position]).collect();
        Self::new(&hb.graph, g, map)
    }

    pub fn source(&self) -> &FiniteGraph {
        &self.source
    }

    pub fn target(&self) -> &FiniteGraph {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn symbol(&self, s: usize) -> usize {
        self.map[s]
    }

    /// Symbolwise image of a source word.
    pub fn apply(&self, w: &[usize]) -> Result<Word> {
        if !self.source.is_word(w) {
            return Err(ShiftError::NotAWord(w.to_vec()));
        }
        Ok(self.apply_unchecked(w))
    }

    pub(crate) fn apply_unchecked(&self, w: &[usize]) -> Word {
        w.iter().map(|&s| self.map[s]).collect()
    }

    pub fn apply_periodic(&self, x: &PeriodicPoint) -> Result<PeriodicPoint> {
        if !self.source.is_cycle(&x.word) {
            return Err(ShiftError::NotAWord(x.word.clone()));
        }
        Ok(PeriodicPoint { word: self.apply_unchecked(&x.word) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::fixtures::{full2, golden_mean};

    #[test]
    fn identity_and_collapse() {
        let g = golden_mean();
        let id = OneBlockCode::identity(&g);
        assert_eq!(id.apply(&[0, 1, 0, 0]).unwrap(), vec![0, 1, 0, 0]);
        assert!(id.apply(&[1, 1]).is_err());
        let c = OneBlockCode::collapse(&full2());
        assert_eq!(c.apply(&[0, 1, 1]).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn block_labeling_of_periodic_point() {
        let g = golden_mean();
        let code = OneBlockCode::block_labeling(&g, 2, 0).unwrap();
        let hb = crate::shift::higher_block(&g, 2).unwrap();
        // (10)^∞ lifts to the 2-block cycle 10 -> 01
        let x = PeriodicPoint { word: vec![hb.vertex_of(&[1, 0]).unwrap(), hb.vertex_of(&[0, 1]).unwrap()] };
        assert_eq!(code.apply_periodic(&x).unwrap().word, vec![1, 0]);
    }

    #[test]
    fn edges_must_map_to_edges() {
        let g = full2();
        assert!(OneBlockCode::new(&g, &golden_mean(), vec![0, 1]).is_err());
        assert!(OneBlockCode::new(&g, &golden_mean(), vec![0, 0]).is_ok());
    }
}
