use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate, Evaluation, HourProblem};
use super::{SwarmConfig, NOMINAL_V_SUB};
use crate::exec::map_indexed;

/// Fraction of the box width a particle may move in one iteration.
const VELOCITY_LIMIT: f64 = 0.2;
const INITIAL_VELOCITY: f64 = 0.1;

/// Per-dimension search bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DecisionBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn width(&self, d: usize) -> f64 {
        self.hi[d] - self.lo[d]
    }

    pub fn contains(&self, position: &[f64]) -> bool {
        position.len() == self.dim()
            && position.iter().enumerate().all(|(d, &x)| x >= self.lo[d] && x <= self.hi[d])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_position: Vec<f64>,
    pub pbest_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalBest {
    pub position: Vec<f64>,
    pub cost: f64,
    /// Particle that found it.
    pub particle: usize,
}

/// Independent stream for one particle at one iteration of one hour. The
/// four counters are laid out as the 256-bit ChaCha key, so streams never
/// overlap and evaluation order cannot change what a particle draws.
pub fn particle_rng(seed: u64, hour: usize, iteration: usize, particle: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([seed, hour as u64, iteration as u64, particle as u64]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// One component of the velocity update.
#[allow(clippy::too_many_arguments)]
pub fn velocity_update(
    y: f64,
    vel: f64,
    pbest: f64,
    gbest: f64,
    omega: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
) -> f64 {
    omega * vel + c1 * r1 * (pbest - y) + c2 * r2 * (gbest - y)
}

/// Clamps velocity to a fraction of the box width and position to the box.
pub fn clamp_to_box(position: &mut [f64], velocity: &mut [f64], bx: &DecisionBox) {
    for d in 0..bx.dim() {
        let vmax = VELOCITY_LIMIT * bx.width(d);
        velocity[d] = velocity[d].clamp(-vmax, vmax);
        position[d] = position[d].clamp(bx.lo[d], bx.hi[d]);
    }
}

/// Moves a particle one step with fresh uniform draws per dimension. The
/// personal best is left for the caller to update after evaluation.
pub fn pso_update<R: Rng>(
    particle: &Particle,
    gbest: &[f64],
    config: &SwarmConfig,
    omega: f64,
    bx: &DecisionBox,
    rng: &mut R,
) -> Particle {
    let dim = bx.dim();
    let mut position = particle.position.clone();
    let mut velocity = particle.velocity.clone();
    for d in 0..dim {
        let r1: f64 = rng.gen();
        let r2: f64 = rng.gen();
        let vmax = VELOCITY_LIMIT * bx.width(d);
        velocity[d] = velocity_update(
            position[d],
            velocity[d],
            particle.pbest_position[d],
            gbest[d],
            omega,
            config.cognitive,
            config.social,
            r1,
            r2,
        )
        .clamp(-vmax, vmax);
        position[d] += velocity[d];
    }
    clamp_to_box(&mut position, &mut velocity, bx);
    Particle {
        position,
        velocity,
        pbest_position: particle.pbest_position.clone(),
        pbest_cost: particle.pbest_cost,
    }
}

/// Result of one hour's search.
#[derive(Debug, Clone, PartialEq)]
pub struct HourOutcome {
    pub hour: usize,
    pub position: Vec<f64>,
    pub evaluation: Evaluation,
    /// Global-best fitness after initialization and after every iteration.
    pub trace: Vec<f64>,
    pub feasible: bool,
}

struct Scored {
    particle: Particle,
    fitness: f64,
    feasible_cost: Option<f64>,
}

fn score(particle: Particle, problem: &HourProblem<'_>) -> Scored {
    let e = evaluate(&particle.position, problem);
    let feasible_cost = if e.feasible() { e.cost.map(|c| c.total_cost_usd) } else { None };
    Scored { particle, fitness: e.fitness, feasible_cost }
}

fn initial_particle(i: usize, problem: &HourProblem<'_>, bx: &DecisionBox, config: &SwarmConfig) -> Particle {
    let mut rng = particle_rng(config.seed, problem.hour, 0, i);
    let v_nominal = NOMINAL_V_SUB.clamp(problem.event.v_sub_bounds.0, problem.event.v_sub_bounds.1);
    let position = match i {
        // nominal set-point with every participant curtailed to the limit
        0 => problem.encode(v_nominal, &vec![problem.event.mcl; problem.loads.len()]),
        // nominal set-point, no curtailment
        1 => problem.encode(v_nominal, &vec![0.0; problem.loads.len()]),
        _ => (0..bx.dim()).map(|d| rng.gen_range(bx.lo[d]..=bx.hi[d])).collect(),
    };
    let velocity = (0..bx.dim())
        .map(|d| {
            let w = INITIAL_VELOCITY * bx.width(d);
            if w > 0.0 {
                rng.gen_range(-w..=w)
            } else {
                0.0
            }
        })
        .collect();
    Particle { pbest_position: position.clone(), position, velocity, pbest_cost: f64::INFINITY }
}

/// Runs the swarm for one hour. The global best is folded in particle-index
/// order after every iteration, so results do not depend on whether
/// particles were evaluated in parallel.
///
/// The reported solution is the final global best when it meets the
/// feasibility tolerances, otherwise the cheapest feasible candidate seen
/// during the search; if none was seen the global best is returned flagged
/// infeasible.
pub fn optimize_hour(problem: &HourProblem<'_>, config: &SwarmConfig) -> HourOutcome {
    let bx = problem.decision_box();
    let n = config.particle_count;

    let mut scored =
        map_indexed(n, config.parallel, |i| score(initial_particle(i, problem, &bx, config), problem));
    let mut particles: Vec<Particle> = Vec::with_capacity(n);
    let mut gbest = GlobalBest { position: Vec::new(), cost: f64::INFINITY, particle: 0 };
    let mut best_feasible: Option<(Vec<f64>, f64)> = None;

    let absorb = |scored: Vec<Scored>,
                  particles: &mut Vec<Particle>,
                  gbest: &mut GlobalBest,
                  best_feasible: &mut Option<(Vec<f64>, f64)>| {
        let fresh = particles.is_empty();
        for (i, s) in scored.into_iter().enumerate() {
            let mut p = s.particle;
            if s.fitness < p.pbest_cost {
                p.pbest_cost = s.fitness;
                p.pbest_position = p.position.clone();
            }
            if let Some(c) = s.feasible_cost {
                if best_feasible.as_ref().is_none_or(|(_, b)| c < *b) {
                    *best_feasible = Some((p.position.clone(), c));
                }
            }
            if p.pbest_cost < gbest.cost || gbest.position.is_empty() {
                gbest.cost = p.pbest_cost;
                gbest.position = p.pbest_position.clone();
                gbest.particle = i;
            }
            if fresh {
                particles.push(p);
            } else {
                particles[i] = p;
            }
        }
    };

    absorb(scored, &mut particles, &mut gbest, &mut best_feasible);
    let mut trace = Vec::with_capacity(config.max_iterations + 1);
    trace.push(gbest.cost);

    for t in 1..=config.max_iterations {
        let omega = config.inertia(t);
        let g = &gbest.position;
        scored = map_indexed(n, config.parallel, |i| {
            let mut rng = particle_rng(config.seed, problem.hour, t, i);
            score(pso_update(&particles[i], g, config, omega, &bx, &mut rng), problem)
        });
        absorb(scored, &mut particles, &mut gbest, &mut best_feasible);
        trace.push(gbest.cost);
    }

    let final_eval = evaluate(&gbest.position, problem);
    let (position, evaluation) = if final_eval.feasible() {
        (gbest.position, final_eval)
    } else if let Some((pos, _)) = best_feasible {
        let e = evaluate(&pos, problem);
        (pos, e)
    } else {
        (gbest.position, final_eval)
    };
    HourOutcome { hour: problem.hour, feasible: evaluation.feasible(), position, evaluation, trace }
}
