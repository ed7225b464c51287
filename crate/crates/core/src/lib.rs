//! Incremental time-stepping schemes and numerical certificates for
//! finite-dimensional rate-independent systems `(E, Psi, x0)`.
//!
//! * [`model`] — energies, dissipation potentials, neighborhood norms,
//!   trajectory containers and a small catalog of test problems.
//! * [`minimize`] — deterministic stencil search used by every scheme.
//! * [`schemes`] — epsilon-neighborhood, energetic, viscous and arc-length
//!   schemes, plus the two-level limit driver [`schemes::refine_limit`].
//! * [`dissipation`] — `Diss_Psi`, the jump cost `Delta_new` and `Diss_new`.
//! * [`verify`] — stability residuals, Gronwall bounds, KKT identity and
//!   energy-dissipation balances.
//! * [`config`], [`io`], [`cli`] — configuration files, CSV/JSON output and
//!   the command implementations behind the `rateind` binary.
//!
//! ```
//! use rateind::model::{make_example2, Dissipation, NeighborhoodNorm};
//! use rateind::schemes::{solve_energetic, SchemeConfig};
//!
//! let model = make_example2();
//! let run = solve_energetic(&model, &Dissipation::abs(), &SchemeConfig::new(0.0, 0.05, vec![0.0])).unwrap();
//! assert_eq!(run.states[0], vec![0.0]);
//! assert!(run.states.last().unwrap()[0] > 1.5);
//! # let _ = NeighborhoodNorm::L2;
//! ```

pub mod cli;
pub mod config;
pub mod dissipation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod minimize;
pub mod model;
pub mod quadrature;
pub mod sampling;
pub mod schemes;
pub mod verify;

pub use error::{Error, Result};
