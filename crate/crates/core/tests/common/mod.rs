#![allow(dead_code)]

pub mod case;
pub mod oracle;
pub mod pso;

use gridpeak::load::{ZipCoefficients, ZipLoad};
use gridpeak::{Branch, Bus, BusKind, ConductorClass, RadialNetwork, ThermalLadderSpec};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random radial feeder with `n` buses. Bus ids are distinct random labels,
/// the substation sits at a random position in the bus list, and branches
/// come in random order with random orientation.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> RadialNetwork {
    assert!(n >= 2);
    let mut ids: Vec<u32> = (1..=(10 * n as u32)).collect();
    ids.shuffle(rng);
    ids.truncate(n);
    // node 0 is the substation; node k > 0 hangs off a random earlier node
    let mut edges: Vec<(usize, usize)> = (1..n).map(|k| (rng.gen_range(0..k), k)).collect();
    edges.shuffle(rng);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let buses = order
        .iter()
        .map(|&k| Bus {
            id: ids[k],
            kind: if k == 0 { BusKind::Substation } else { BusKind::LoadNode },
            nominal_kv: 20.0,
        })
        .collect();
    let branches = edges
        .iter()
        .enumerate()
        .map(|(s, &(a, b))| {
            let (f, t) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            Branch {
                id: 100 + s as u32,
                from_bus: ids[f],
                to_bus: ids[t],
                impedance: Complex64::new(rng.gen_range(0.002..0.02), rng.gen_range(0.002..0.02)),
                conductor_class: ConductorClass::Overhead,
                static_rating_a: 400.0,
                thermal: ThermalLadderSpec::default_for(ConductorClass::Overhead),
            }
        })
        .collect();
    RadialNetwork { buses, branches, base_mva: 10.0, base_kv: 20.0 }
}

/// Random coefficient triple summing to one.
pub fn random_shares<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    let a: f64 = rng.gen();
    let b: f64 = rng.gen();
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (lo, hi - lo, 1.0 - hi)
}

/// One flat-profile ZIP load per non-substation bus.
pub fn random_loads<R: Rng>(rng: &mut R, net: &RadialNetwork, max_kw: f64) -> Vec<ZipLoad> {
    net.buses
        .iter()
        .filter(|b| b.kind == BusKind::LoadNode)
        .map(|b| {
            let p = rng.gen_range(0.0..max_kw);
            let q = p * rng.gen_range(0.0..0.5);
            let (zp, ip, pp) = random_shares(rng);
            let (zq, iq, pq) = random_shares(rng);
            ZipLoad {
                bus: b.id,
                baseline_p_kw: vec![p; 24],
                baseline_q_kvar: vec![q; 24],
                ref_voltage_pu: rng.gen_range(0.95..1.05),
                coefficients: ZipCoefficients::new(zp, ip, pp, zq, iq, pq).unwrap(),
                curtailable: false,
                penalty_usd_per_kw: 0.0,
            }
        })
        .collect()
}

/// Dense complex linear solve by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let t = a[col][k];
                a[row][k] -= f * t;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let s: Complex64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}
