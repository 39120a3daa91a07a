//! Output shields: compile declarative requirements on a model's outputs
//! (CNF clauses or linear inequalities over `y_0..y_{n-1}`) into a correction
//! operator whose outputs satisfy every requirement for any input.
//!
//! ```
//! use reqshield::{Shield, ShieldConfig};
//!
//! let shield = Shield::from_text("y_0 - y_1 >= 0\ny_2 - y_3 >= 0", 4, &ShieldConfig::default()).unwrap();
//! let out = shield.apply(&[10.0, 12.0, 38.0, 37.0]).unwrap();
//! assert_eq!(out.values, vec![10.0, 10.0, 38.0, 37.0]);
//! ```

pub mod batch;
pub mod cli;
pub mod cnf;
pub mod grad;
pub mod lang;
pub mod linear;
pub mod oracle;
pub mod report;
pub mod shield;
pub mod vector;

pub use shield::{build_shield_layer, Engine, EngineOverride, Shield, ShieldConfig, ShieldError, ShieldPlan};
pub use vector::{Branch, CorrectedVector, InputError};
