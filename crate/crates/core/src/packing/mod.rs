//! Absorbers, absorber families, greedy packing and the perfect packing pipelines.

mod absorbers;
mod family;
mod greedy;
mod pipeline;

pub use absorbers::{
    find_absorbers, grid_absorbers, verify_absorbs, AbsorbCheck, Absorber, AbsorberSearch,
};
pub use family::{
    asymptotic_capacity, asymptotic_q, build_absorber_family, clashes, measure_ell, sample_a_sets,
    AbsorberFamily, FamilyDiagnostics, FamilyMember, FamilyMode, FamilyOptions,
};
pub use greedy::{greedy_pack, GreedyMode, GreedyOutcome};
pub use pipeline::{
    perfect_matching_sparse, perfect_packing, AttemptRecord, PipelineConfig, PipelineDiagnostics,
    PipelineFailure, PipelineOutcome, SparseAdvisory, Stage,
};

use serde::{Deserialize, Serialize};

use crate::audit::degree_report;
use crate::embedding::find_copy_within;
use crate::error::{Error, Result};
use crate::generators::{edge, pattern_library, Pattern};
use crate::hypergraph::Hypergraph;
use crate::vertex_set::VertexSet;

/// Absorber constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Cherry absorbers: `a = 4`, `b = 4`.
    Cherry,
    /// `C4(2+1)` absorbers: `a = 18`, `b = 6`.
    C4,
    /// Grid absorbers for a linear pattern on `f` vertices: `a = f² − f`, `b = f`.
    LinearGrid,
    /// Edge absorbers for perfect matchings of 3-graphs: `a = 6`, `b = 3`.
    Matching,
}

impl Strategy {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "cherry" => Ok(Strategy::Cherry),
            "c4" => Ok(Strategy::C4),
            "linear" | "linear_grid" => Ok(Strategy::LinearGrid),
            "matching" => Ok(Strategy::Matching),
            other => Err(Error::UnsupportedStrategy(format!(
                "unknown strategy `{other}`"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Cherry => "cherry",
            Strategy::C4 => "c4",
            Strategy::LinearGrid => "linear_grid",
            Strategy::Matching => "matching",
        }
    }

    /// Absorber and absorbee sizes `(a, b)` for this pattern.
    pub fn sizes(self, pattern: &Pattern) -> (usize, usize) {
        match self {
            Strategy::Cherry => (4, 4),
            Strategy::C4 => (18, 6),
            Strategy::LinearGrid => (pattern.f() * (pattern.f() - 1), pattern.f()),
            Strategy::Matching => (6, 3),
        }
    }

    /// Whether leftovers must be split along codegree pairs.
    pub fn separable(self) -> bool {
        matches!(self, Strategy::Cherry | Strategy::C4)
    }

    /// Checks the pattern is one this strategy is built for.
    pub fn check(self, pattern: &Pattern) -> Result<()> {
        let ok = match self {
            Strategy::Cherry => is_isomorphic(pattern, &pattern_library("cherry")?),
            Strategy::C4 => is_isomorphic(pattern, &pattern_library("c4_2plus1")?),
            Strategy::Matching => is_isomorphic(pattern, &edge(3)?),
            Strategy::LinearGrid => pattern.is_linear(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedStrategy(format!(
                "strategy {} does not apply to pattern {}",
                self.name(),
                pattern.name().unwrap_or("custom")
            )))
        }
    }

    /// Strategy chosen automatically for a pattern.
    pub fn auto(pattern: &Pattern) -> Result<Self> {
        [
            Strategy::Cherry,
            Strategy::C4,
            Strategy::Matching,
            Strategy::LinearGrid,
        ]
        .into_iter()
        .find(|s| s.check(pattern).is_ok())
        .ok_or_else(|| {
            Error::UnsupportedStrategy(format!(
                "no absorber construction for pattern {}",
                pattern.name().unwrap_or("custom")
            ))
        })
    }
}

/// Same vertex count, uniformity and edge count, and one embeds in the other.
pub fn is_isomorphic(p: &Pattern, q: &Pattern) -> bool {
    p.f() == q.f()
        && p.k() == q.k()
        && p.edge_count() == q.edge_count()
        && find_copy_within(q.graph(), p, &VertexSet::full(q.f())).is_some()
}

/// Default separability threshold `min(p/4, α/4)` with `p = |H|/C(n,3)` and
/// `α = δ_1 / C(n−1,2)`, the same value the audit reports.
pub fn default_zeta(h: &Hypergraph) -> f64 {
    crate::audit::edge_density(h).min(degree_report(h).alpha_hat) / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_strategies() {
        assert_eq!(
            Strategy::auto(&pattern_library("cherry").unwrap()).unwrap(),
            Strategy::Cherry
        );
        assert_eq!(
            Strategy::auto(&pattern_library("c4_2plus1").unwrap()).unwrap(),
            Strategy::C4
        );
        assert_eq!(
            Strategy::auto(&pattern_library("edge").unwrap()).unwrap(),
            Strategy::Matching
        );
        assert_eq!(
            Strategy::auto(&pattern_library("edge(4)").unwrap()).unwrap(),
            Strategy::LinearGrid
        );
        assert!(Strategy::auto(&pattern_library("k222").unwrap()).is_err());
        let relabeled = Pattern::new(4, 3, [[1, 2, 3], [0, 2, 3]]).unwrap();
        assert_eq!(Strategy::auto(&relabeled).unwrap(), Strategy::Cherry);
        assert!(Strategy::LinearGrid
            .check(&pattern_library("cherry").unwrap())
            .is_err());
    }
}
