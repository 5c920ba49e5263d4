//! Quantifies how splitting exposure to heavy-tailed errors reduces
//! expected harm, and applies that to data-center fabrics.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`harm`] | `H(x) = -k x^β`, fragmented harm, the Jensen gap, paired survival Monte Carlo |
//! | [`pareto`] | Pareto errors, fragment-harm density, tail mean `M_β(N)`, degradation ratio |
//! | [`topology`] | 3-tier and spine-leaf builders, hop histograms, failure injection, fault domains |
//! | [`growth`] | `erf`, sigmoid vs linear capacity, crossover |
//! | [`costing`] | price / power / fault-domain comparison of two fabrics |
//! | [`report`] | CSV / JSON / SVG rendering of tabular results |
//! | [`oracle`] | independent reference computations for verification |
//! | [`cli`] | the `fragrisk` command-line front end |

pub mod cli;
pub mod costing;
pub mod error;
pub mod growth;
pub mod harm;
pub mod oracle;
pub mod pareto;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
pub use harm::{FragmentWeights, HarmParams};
pub use pareto::{FragmentCount, ParetoParams};
pub use report::ScenarioReport;
pub use topology::Topology;
