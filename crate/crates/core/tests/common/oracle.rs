//! Independent references the library is checked against.

use std::collections::{BTreeMap, BTreeSet};

use gridpeak::grid::build_bibc;
use gridpeak::load::{ZipCoefficients, ZipLoad};
use gridpeak::scenario::fixtures;
use gridpeak::thermal::{parse_weather_csv, WeatherSeries};
use gridpeak::{Branch, Bus, BusKind, ConductorClass, RadialNetwork, ThermalLadderSpec, WeatherSample};
use num_complex::Complex64;

/// For every non-substation bus, the set of branch ids on its path to the
/// substation, found by walking parent links from a breadth-first search.
pub fn path_sets(net: &RadialNetwork) -> BTreeMap<u32, BTreeSet<u32>> {
    let root = net.buses.iter().find(|b| b.kind == BusKind::Substation).unwrap().id;
    let mut parent: BTreeMap<u32, (u32, u32)> = BTreeMap::new(); // bus -> (parent bus, branch id)
    let mut seen = BTreeSet::from([root]);
    let mut queue = vec![root];
    while let Some(u) = queue.pop() {
        for br in &net.branches {
            let other = if br.from_bus == u {
                br.to_bus
            } else if br.to_bus == u {
                br.from_bus
            } else {
                continue;
            };
            if seen.insert(other) {
                parent.insert(other, (u, br.id));
                queue.push(other);
            }
        }
    }
    net.buses
        .iter()
        .filter(|b| b.id != root)
        .map(|b| {
            let mut set = BTreeSet::new();
            let mut at = b.id;
            while let Some(&(p, br)) = parent.get(&at) {
                set.insert(br);
                at = p;
            }
            (b.id, set)
        })
        .collect()
}

/// The matrix rewritten as `bus id -> branch ids with a one in its column`.
pub fn label_sets(net: &RadialNetwork) -> BTreeMap<u32, BTreeSet<u32>> {
    let psi = build_bibc(net).unwrap();
    assert_eq!(psi.sections(), net.branches.len());
    assert_eq!(psi.columns(), net.buses.len() - 1);
    (0..psi.columns())
        .map(|c| {
            let bus = net.buses[psi.column_buses()[c]].id;
            let set = (0..psi.sections()).filter(|&s| psi.get(s, c)).map(|s| net.branches[s].id).collect();
            (bus, set)
        })
        .collect()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn two_bus(z: Complex64) -> RadialNetwork {
    RadialNetwork {
        buses: vec![
            Bus { id: 1, kind: BusKind::Substation, nominal_kv: 20.0 },
            Bus { id: 2, kind: BusKind::LoadNode, nominal_kv: 20.0 },
        ],
        branches: vec![Branch {
            id: 1,
            from_bus: 1,
            to_bus: 2,
            impedance: z,
            conductor_class: ConductorClass::Overhead,
            static_rating_a: 1000.0,
            thermal: ThermalLadderSpec::default_for(ConductorClass::Overhead),
        }],
        base_mva: 10.0,
        base_kv: 20.0,
    }
}

pub fn constant_power(bus: u32, p_kw: f64, q_kvar: f64) -> ZipLoad {
    ZipLoad {
        bus,
        baseline_p_kw: vec![p_kw; 24],
        baseline_q_kvar: vec![q_kvar; 24],
        ref_voltage_pu: 1.0,
        coefficients: ZipCoefficients::constant_power(),
        curtailable: false,
        penalty_usd_per_kw: 0.0,
    }
}

/// Fixed point on the nodal equations: `Y_LL V_L = I_L(V) - Y_LS V_S`, with
/// `I_L = -(S(|V|) / V)^*` from the ZIP law.
pub fn ybus_oracle(net: &RadialNetwork, loads: &[ZipLoad], v_sub: f64, hour: usize) -> Vec<Complex64> {
    let n = net.buses.len();
    let idx = |id: u32| net.buses.iter().position(|b| b.id == id).unwrap();
    let sub = net.buses.iter().position(|b| b.kind == BusKind::Substation).unwrap();
    let mut y = vec![vec![c(0.0, 0.0); n]; n];
    for br in &net.branches {
        let (f, t) = (idx(br.from_bus), idx(br.to_bus));
        let ys = 1.0 / br.impedance;
        y[f][f] += ys;
        y[t][t] += ys;
        y[f][t] -= ys;
        y[t][f] -= ys;
    }
    let others: Vec<usize> = (0..n).filter(|&i| i != sub).collect();
    let yll: Vec<Vec<Complex64>> =
        others.iter().map(|&i| others.iter().map(|&j| y[i][j]).collect()).collect();
    let base_kw = net.base_mva * 1000.0;
    let mut v = vec![c(v_sub, 0.0); n];
    for _ in 0..500 {
        let mut inj = vec![c(0.0, 0.0); n];
        for l in loads {
            let b = idx(l.bus);
            let r = v[b].norm() / l.ref_voltage_pu;
            let k = &l.coefficients;
            let p = l.baseline_p_kw[hour] * (k.cz_p * r * r + k.ci_p * r + k.cp_p);
            let q = l.baseline_q_kvar[hour] * (k.cz_q * r * r + k.ci_q * r + k.cp_q);
            inj[b] -= (c(p, q) / base_kw / v[b]).conj();
        }
        let rhs: Vec<Complex64> = others.iter().map(|&i| inj[i] - y[i][sub] * c(v_sub, 0.0)).collect();
        let sol = super::solve_dense(yll.clone(), rhs);
        let mut delta: f64 = 0.0;
        for (k, &i) in others.iter().enumerate() {
            delta = delta.max((sol[k] - v[i]).norm());
            v[i] = sol[k];
        }
        if delta < 1e-14 {
            break;
        }
    }
    v
}

pub const SIGMA: f64 = 5.670_374_419e-8;

pub fn weather(ambient_c: f64, wind_mps: f64, solar_wm2: f64) -> WeatherSample {
    WeatherSample { hour: 0, ambient_c, wind_mps, solar_wm2 }
}

/// Explicit Euler on `d rise_k / dt = (R_k W(theta) - rise_k) / tau_k` with
/// the loss and the surface film re-evaluated every step. Conductor
/// temperature is continuous when the hourly ambient changes.
pub struct Euler<'a> {
    pub spec: &'a ThermalLadderSpec,
    pub rises: Vec<f64>,
    pub ambient: f64,
}

impl Euler<'_> {
    pub fn hot_spot(&self, ambient: f64, current: f64) -> f64 {
        ambient
            + self.spec.dielectric_rise_k
            + self.rises.iter().sum::<f64>()
            + self.spec.hot_spot_gradient_k_per_a2 * current * current
    }

    /// Runs `seconds` of constant current and weather; returns the peak hot spot.
    pub fn run(&mut self, current: f64, w: &WeatherSample, seconds: usize) -> f64 {
        let sp = self.spec;
        let dt_h = 1.0 / 3600.0;
        self.rises[0] += self.ambient - w.ambient_c;
        self.ambient = w.ambient_c;
        let mut peak = self.hot_spot(w.ambient_c, current);
        for _ in 0..seconds {
            let theta = self.hot_spot(w.ambient_c, current);
            let r = &sp.resistance;
            let r_c = (r.r_ref_ohm * (1.0 + r.alpha_per_k * (theta - r.theta_ref_c))).max(0.0);
            let mut heat = current * current * r_c;
            let film = sp.surface.map(|s| {
                heat += s.absorptivity * w.solar_wm2 * s.diameter_m;
                let (t, a) = (theta + 273.15, w.ambient_c + 273.15);
                let h_rad =
                    s.emissivity * SIGMA * std::f64::consts::PI * s.diameter_m * (t * t + a * a) * (t + a);
                1.0 / (s.conv_a + s.conv_b * w.wind_mps.sqrt() + h_rad)
            });
            for k in 0..self.rises.len() {
                let res = sp.loop_resistances[k] * film.unwrap_or(1.0);
                let tau = sp.time_constants_h[k];
                self.rises[k] += dt_h * (res * heat - self.rises[k]) / tau;
            }
            peak = peak.max(self.hot_spot(w.ambient_c, current));
        }
        peak
    }
}

pub fn weather_days() -> Vec<WeatherSeries> {
    [fixtures::cool_windy_weather(), fixtures::hot_still_weather()]
        .iter()
        .map(|text| parse_weather_csv(text.as_bytes()).unwrap())
        .collect()
}
