use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{BranchId, BusId, BusKind, RadialNetwork};

/// A single reason a network fails to be a valid radial tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    MissingSubstation,
    MultipleSubstations {
        buses: Vec<BusId>,
    },
    DuplicateBus {
        bus: BusId,
    },
    DuplicateBranch {
        branch: BranchId,
    },
    UnknownBus {
        branch: BranchId,
        bus: BusId,
    },
    SelfLoop {
        branch: BranchId,
    },
    /// Adding this branch closed a loop.
    Cycle {
        branch: BranchId,
    },
    Disconnected {
        bus: BusId,
    },
    NegativeResistance {
        branch: BranchId,
    },
    NonPositiveRating {
        branch: BranchId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingSubstation => write!(f, "no substation bus"),
            Violation::MultipleSubstations { buses } => {
                write!(f, "more than one substation bus: {buses:?}")
            }
            Violation::DuplicateBus { bus } => write!(f, "duplicate bus id {bus}"),
            Violation::DuplicateBranch { branch } => write!(f, "duplicate branch id {branch}"),
            Violation::UnknownBus { branch, bus } => {
                write!(f, "branch {branch} references unknown bus {bus}")
            }
            Violation::SelfLoop { branch } => write!(f, "branch {branch} connects a bus to itself"),
            Violation::Cycle { branch } => write!(f, "branch {branch} closes a cycle"),
            Violation::Disconnected { bus } => {
                write!(f, "bus {bus} is not reachable from the substation")
            }
            Violation::NegativeResistance { branch } => {
                write!(f, "branch {branch} has negative resistance")
            }
            Violation::NonPositiveRating { branch } => {
                write!(f, "branch {branch} has a non-positive static rating")
            }
        }
    }
}

/// Outcome of [`validate_radial`]. Empty means the network is a valid tree.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_cycle(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, Violation::Cycle { .. }))
    }

    pub fn has_disconnected(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, Violation::Disconnected { .. }))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Checks that `network` is a single tree rooted at exactly one substation.
/// Every problem found is listed; nothing is raised.
pub fn validate_radial(network: &RadialNetwork) -> ValidationReport {
    let mut violations = Vec::new();

    let mut index: HashMap<BusId, usize> = HashMap::new();
    for (i, bus) in network.buses.iter().enumerate() {
        if index.insert(bus.id, i).is_some() {
            violations.push(Violation::DuplicateBus { bus: bus.id });
        }
    }

    let subs: Vec<BusId> =
        network.buses.iter().filter(|b| b.kind == BusKind::Substation).map(|b| b.id).collect();
    match subs.len() {
        0 => violations.push(Violation::MissingSubstation),
        1 => {}
        _ => violations.push(Violation::MultipleSubstations { buses: subs.clone() }),
    }

    let mut seen_branches = HashSet::new();
    let n = network.buses.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for br in &network.branches {
        if !seen_branches.insert(br.id) {
            violations.push(Violation::DuplicateBranch { branch: br.id });
        }
        if br.impedance.re < 0.0 {
            violations.push(Violation::NegativeResistance { branch: br.id });
        }
        if !(br.static_rating_a > 0.0) {
            violations.push(Violation::NonPositiveRating { branch: br.id });
        }
        let mut endpoints = [None, None];
        for (slot, bus) in endpoints.iter_mut().zip([br.from_bus, br.to_bus]) {
            match index.get(&bus) {
                Some(&i) => *slot = Some(i),
                None => violations.push(Violation::UnknownBus { branch: br.id, bus }),
            }
        }
        let (Some(f), Some(t)) = (endpoints[0], endpoints[1]) else {
            continue;
        };
        if f == t {
            violations.push(Violation::SelfLoop { branch: br.id });
            continue;
        }
        let (rf, rt) = (find(&mut parent, f), find(&mut parent, t));
        if rf == rt {
            violations.push(Violation::Cycle { branch: br.id });
        } else {
            parent[rf] = rt;
        }
        adj[f].push(t);
        adj[t].push(f);
    }

    if let [sub] = subs.as_slice() {
        let root = index[sub];
        let mut reached = vec![false; n];
        reached[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !reached[v] {
                    reached[v] = true;
                    stack.push(v);
                }
            }
        }
        for (i, bus) in network.buses.iter().enumerate() {
            if !reached[i] {
                violations.push(Violation::Disconnected { bus: bus.id });
            }
        }
    }

    ValidationReport { violations }
}
