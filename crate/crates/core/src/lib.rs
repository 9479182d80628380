//! Peak-load management for radial distribution feeders.
//!
//! The crate combines three levers an operator can pull during an overload
//! event:
//!
//! * conservation voltage reduction (lowering the substation set-point so
//!   voltage-dependent ZIP loads draw less),
//! * dynamic thermal rating of lines, cables and the substation transformer,
//! * paid curtailment of participating loads.
//!
//! Each event hour is solved as a penalized cost minimization with a particle
//! swarm, where every candidate is checked against a backward-forward sweep
//! power flow built on the bus-injection to branch-current (BIBC) matrix.
//!
//! Module map:
//!
//! * [`grid`] network model, radial validation, BIBC construction, file loading
//! * [`load`] ZIP voltage dependence and curtailment scaling
//! * [`flow`] backward-forward sweep power flow
//! * [`thermal`] ladder thermal model, steady and dynamic ampacity
//! * [`optimizer`] per-hour swarm search and event chaining
//! * [`scenario`] case-study runner, comparisons, sweeps and file outputs

pub mod flow;
pub mod grid;
pub mod load;
pub mod optimizer;
pub mod scenario;
pub mod thermal;

mod exec;

pub use exec::parallel_available;

pub use flow::{ImpedanceMatrix, PowerFlowResult, PreparedGrid};
pub use grid::{BibcMatrix, Branch, Bus, BusKind, ConductorClass, RadialNetwork};
pub use load::{LoadSet, ZipCoefficients, ZipLoad};
pub use optimizer::{CaseMode, EventSchedule, EventSpec, SwarmConfig};
pub use thermal::{ThermalComponentState, ThermalLadderSpec, WeatherSample};

/// Number of hourly samples in a day profile.
pub const HOURS_PER_DAY: usize = 24;
