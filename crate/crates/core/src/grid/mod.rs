//! Radial network model.
//!
//! A [`RadialNetwork`] is a set of buses joined by branches ("sections") that
//! form a tree rooted at a single substation bus. Branch impedances are held
//! in per-unit on the network base; ratings stay in amperes.

mod bibc;
pub mod file;
mod validate;

pub use bibc::{build_bibc, BibcMatrix};
pub use file::{load_feeder, load_network, parse_network, Feeder, NetworkDocument};
pub use validate::{validate_radial, ValidationReport, Violation};

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::thermal::ThermalLadderSpec;

pub type BusId = u32;
pub type BranchId = u32;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("failed to read network file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse network file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("unit inconsistency: {0}")]
    Units(String),
    #[error("network is not radial: {0}")]
    Topology(ValidationReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BusKind {
    Substation,
    #[serde(alias = "load")]
    LoadNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    pub kind: BusKind,
    pub nominal_kv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConductorClass {
    Overhead,
    Underground,
    Transformer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: BranchId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// Series impedance in per-unit.
    pub impedance: Complex64,
    pub conductor_class: ConductorClass,
    /// Static (worst-case weather) rating in amperes.
    pub static_rating_a: f64,
    pub thermal: ThermalLadderSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialNetwork {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    /// Three-phase base power in MVA.
    pub base_mva: f64,
    /// Line-to-line base voltage in kV.
    pub base_kv: f64,
}

impl RadialNetwork {
    /// Base current in amperes, `S_base / (sqrt(3) V_base)`.
    pub fn base_current_a(&self) -> f64 {
        self.base_mva * 1e6 / (3f64.sqrt() * self.base_kv * 1e3)
    }

    /// Base power in kW.
    pub fn base_kw(&self) -> f64 {
        self.base_mva * 1e3
    }

    /// Base impedance in ohms, `kV^2 / MVA`.
    pub fn base_ohm(&self) -> f64 {
        self.base_kv * self.base_kv / self.base_mva
    }

    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn branch_index(&self, id: BranchId) -> Option<usize> {
        self.branches.iter().position(|b| b.id == id)
    }

    /// Index of the unique substation bus, if there is exactly one.
    pub fn substation_index(&self) -> Option<usize> {
        let mut subs = self.buses.iter().enumerate().filter(|(_, b)| b.kind == BusKind::Substation);
        match (subs.next(), subs.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    /// Bus indices of every non-substation bus, in file order. This is the
    /// column order of the BIBC matrix.
    pub fn load_node_indices(&self) -> Vec<usize> {
        self.buses.iter().enumerate().filter(|(_, b)| b.kind != BusKind::Substation).map(|(i, _)| i).collect()
    }

    /// Square 0/1 adjacency matrix over buses (index order). Unknown bus
    /// references are skipped.
    pub fn adjacency(&self) -> Vec<Vec<u8>> {
        let n = self.buses.len();
        let index: HashMap<BusId, usize> = self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
        let mut a = vec![vec![0u8; n]; n];
        for br in &self.branches {
            if let (Some(&f), Some(&t)) = (index.get(&br.from_bus), index.get(&br.to_bus)) {
                if f != t {
                    a[f][t] = 1;
                    a[t][f] = 1;
                }
            }
        }
        a
    }

    /// Hop count from the substation to each bus (index order), following
    /// branches. Unreachable buses get `usize::MAX`.
    pub fn bus_depths(&self) -> Vec<usize> {
        let n = self.buses.len();
        let mut depth = vec![usize::MAX; n];
        let Some(root) = self.substation_index() else {
            return depth;
        };
        let adj = self.adjacency();
        depth[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if adj[u][v] == 1 && depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        depth
    }

    /// Hop count of each branch: the depth of its downstream bus, so branches
    /// leaving the substation have depth 1.
    pub fn branch_depths(&self) -> Vec<usize> {
        let depth = self.bus_depths();
        self.branches
            .iter()
            .map(|br| {
                let f = self.bus_index(br.from_bus).map_or(usize::MAX, |i| depth[i]);
                let t = self.bus_index(br.to_bus).map_or(usize::MAX, |i| depth[i]);
                f.max(t)
            })
            .collect()
    }

    /// Transformer-class branches incident to the substation.
    pub fn root_transformers(&self) -> Vec<usize> {
        let Some(root) = self.substation_index() else {
            return Vec::new();
        };
        let root_id = self.buses[root].id;
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| {
                b.conductor_class == ConductorClass::Transformer
                    && (b.from_bus == root_id || b.to_bus == root_id)
            })
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Small builder used by unit tests across the crate.
    pub fn network(sub: BusId, buses: &[BusId], edges: &[(BusId, BusId)]) -> RadialNetwork {
        let mut all = vec![Bus { id: sub, kind: BusKind::Substation, nominal_kv: 20.0 }];
        all.extend(buses.iter().map(|&id| Bus { id, kind: BusKind::LoadNode, nominal_kv: 20.0 }));
        let branches = edges
            .iter()
            .enumerate()
            .map(|(i, &(f, t))| Branch {
                id: i as BranchId + 1,
                from_bus: f,
                to_bus: t,
                impedance: Complex64::new(0.01, 0.02),
                conductor_class: ConductorClass::Overhead,
                static_rating_a: 400.0,
                thermal: ThermalLadderSpec::default_for(ConductorClass::Overhead),
            })
            .collect();
        RadialNetwork { buses: all, branches, base_mva: 10.0, base_kv: 20.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::network;

    #[test]
    fn base_quantities() {
        let net = network(1, &[2], &[(1, 2)]);
        assert!((net.base_current_a() - 288.675_134_594_812_9).abs() < 1e-9);
        assert_eq!(net.base_ohm(), 40.0);
        assert_eq!(net.base_kw(), 10_000.0);
    }

    #[test]
    fn depths_follow_tree() {
        let net = network(1, &[2, 3, 4], &[(1, 2), (2, 3), (2, 4)]);
        assert_eq!(net.bus_depths(), vec![0, 1, 2, 2]);
        assert_eq!(net.branch_depths(), vec![1, 2, 2]);
    }
}
