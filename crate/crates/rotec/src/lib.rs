//! Constrained-control toolkit built around an anytime command governor.
//!
//! The pipeline, bottom to top:
//!
//! * [`plant`] — continuous-time LTI models, ZOH / forward-Euler
//!   discretization, the one-sample-delay augmentation used for
//!   logical-execution-time (LET) semantics, and tracking-gain design.
//! * [`admissible`] — finitely determined maximal output-admissible sets
//!   for the closed loop under a constant command, plus the 1/beta
//!   constraint tightening the governor needs, with a plain-text cache
//!   format.
//! * [`governor`] — reference solvers for the governor QP (active-set
//!   enumeration), the modified log barrier and its derivatives, KKT
//!   reporting, and the interference-bound certificate used by the
//!   feasibility argument.
//! * [`flow`] — the primal-dual gradient flow itself: explicit Euler
//!   steps with a feasibility backstop, the acceptance test that makes
//!   the scheme safe to stop at any time, dual warm-starting, and the
//!   per-sample driver [`flow::rotec_step`].
//! * [`sched`] — EDF schedulability arithmetic, stochastic execution-time
//!   models, and the per-sample processor budget left for the governor.
//! * [`sim`] — closed-loop simulation producing CSV-able traces, with
//!   constant / piecewise / fishhook steering references.
//! * [`scenario`] — the flat key-value scenario file format that wires
//!   all of the above together.
//!
//! Everything is deterministic given a scenario and a seed; randomness
//! flows only through the documented [`rng`] generator.

pub mod admissible;
pub mod error;
pub mod flow;
pub mod governor;
pub mod lp;
pub mod plant;
pub mod rng;
pub mod scenario;
pub mod sched;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
