//! Built-in configurations.

use crate::graph::{build_gamma1, build_gamma2, CompactGraph, Gamma1Params, Gamma2Params};
use crate::polygon::PolygonSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Four unit edges between `A` (gamma 0) and `B` (gamma 1).
    Gamma1Equilateral,
    /// Four unit edges between `A` and `B` plus a unit tail at `A`, all Neumann-Kirchhoff.
    Gamma2Equilateral,
    /// Quadrangle with sides `(1.1, 0.95, 0.9, 1)`.
    ReferenceQuadrangle,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Gamma1Equilateral, Preset::Gamma2Equilateral, Preset::ReferenceQuadrangle];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Gamma1Equilateral => "gamma1-equilateral",
            Preset::Gamma2Equilateral => "gamma2-equilateral",
            Preset::ReferenceQuadrangle => "fig5-polygon",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn graph(self) -> Option<CompactGraph> {
        match self {
            Preset::Gamma1Equilateral => {
                Some(build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).expect("valid preset"))
            }
            Preset::Gamma2Equilateral => {
                Some(build_gamma2(&Gamma2Params::equilateral()).expect("valid preset"))
            }
            Preset::ReferenceQuadrangle => None,
        }
    }

    pub fn polygon(self) -> Option<PolygonSpec> {
        match self {
            Preset::ReferenceQuadrangle => Some(PolygonSpec { a: [1.1, 0.95, 0.9, 1.0] }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()), Some(p));
        }
        assert_eq!(Preset::from_name("nope"), None);
    }

    #[test]
    fn graph_shapes() {
        let g1 = Preset::Gamma1Equilateral.graph().unwrap();
        assert_eq!((g1.vertices().len(), g1.edges().len()), (2, 4));
        let g2 = Preset::Gamma2Equilateral.graph().unwrap();
        assert_eq!((g2.vertices().len(), g2.edges().len()), (3, 5));
        assert!(Preset::ReferenceQuadrangle.graph().is_none());
    }
}
