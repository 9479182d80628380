use std::collections::HashMap;

use num_complex::Complex64;

use super::{validate_radial, GridError, RadialNetwork};

/// Bus-injection to branch-current matrix.
///
/// Rows follow branch (section) order of the network, columns follow the
/// non-substation buses in network order. Entry `(s, n)` is 1 exactly when
/// section `s` lies on the path from the substation to bus `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BibcMatrix {
    sections: usize,
    columns: usize,
    entries: Vec<u8>,
    column_buses: Vec<usize>,
    strip_order: Vec<usize>,
}

impl BibcMatrix {
    pub fn sections(&self) -> usize {
        self.sections
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn get(&self, section: usize, column: usize) -> bool {
        self.entries[section * self.columns + column] == 1
    }

    pub fn row(&self, section: usize) -> &[u8] {
        &self.entries[section * self.columns..(section + 1) * self.columns]
    }

    /// Bus index (into `network.buses`) represented by each column.
    pub fn column_buses(&self) -> &[usize] {
        &self.column_buses
    }

    /// Bus indices in the order the leaf-stripping pass removed them.
    pub fn strip_order(&self) -> &[usize] {
        &self.strip_order
    }

    /// Number of sections on the root path of the bus in `column`.
    pub fn column_depth(&self, column: usize) -> usize {
        (0..self.sections).filter(|&s| self.get(s, column)).count()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.sections).map(|s| self.row(s).to_vec()).collect()
    }

    /// Section currents from nodal injections, `I_s = sum_n Psi(s, n) I_n`.
    pub fn branch_currents(&self, injections: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(injections.len(), self.columns, "injection length mismatch");
        (0..self.sections)
            .map(|s| self.row(s).iter().zip(injections).filter(|(&e, _)| e == 1).map(|(_, &i)| i).sum())
            .collect()
    }
}

/// Builds the BIBC matrix by repeatedly stripping leaves off the adjacency
/// matrix.
///
/// Each pass collects every non-substation bus of degree one. For each such
/// leaf the accumulated downstream set (the leaf plus everything already
/// folded into it) is written into the row of the section joining the leaf
/// to its parent, the edge is removed, and the set is handed up to the
/// parent. Bus and branch labels may be in any order.
pub fn build_bibc(network: &RadialNetwork) -> Result<BibcMatrix, GridError> {
    let report = validate_radial(network);
    if !report.is_empty() {
        return Err(GridError::Topology(report));
    }
    let root = network.substation_index().expect("validated network has one substation");

    let n = network.buses.len();
    let column_buses = network.load_node_indices();
    let mut column_of = vec![usize::MAX; n];
    for (c, &b) in column_buses.iter().enumerate() {
        column_of[b] = c;
    }

    let mut section_of: HashMap<(usize, usize), usize> = HashMap::new();
    for (s, br) in network.branches.iter().enumerate() {
        let f = network.bus_index(br.from_bus).expect("validated");
        let t = network.bus_index(br.to_bus).expect("validated");
        section_of.insert((f.min(t), f.max(t)), s);
    }

    let sections = network.branches.len();
    let columns = column_buses.len();
    let mut entries = vec![0u8; sections * columns];
    let mut adjacency = network.adjacency();
    let mut downstream: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut strip_order = Vec::with_capacity(sections);

    loop {
        let leaves: Vec<usize> = (0..n)
            .filter(|&i| i != root)
            .filter(|&i| adjacency[i].iter().map(|&a| a as usize).sum::<usize>() == 1)
            .collect();
        if leaves.is_empty() {
            break;
        }
        for r in leaves {
            downstream[r].push(r);
            let Some(s) = (0..n).find(|&j| adjacency[j][r] == 1) else {
                continue;
            };
            let section = section_of[&(r.min(s), r.max(s))];
            for &bus in &downstream[r] {
                entries[section * columns + column_of[bus]] = 1;
            }
            adjacency[s][r] = 0;
            adjacency[r][s] = 0;
            let moved = std::mem::take(&mut downstream[r]);
            downstream[s].extend(moved);
            strip_order.push(r);
        }
    }
    debug_assert_eq!(strip_order.len(), sections);

    Ok(BibcMatrix { sections, columns, entries, column_buses, strip_order })
}
