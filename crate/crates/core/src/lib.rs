//! Margin optimal classification trees.
//!
//! Trains oblique binary classification trees by solving a mixed-integer
//! quadratic program with an SVM at every branch node, optionally with a
//! per-node feature budget (hard or soft).
//!
//! * [`dataset`]: loading, scaling, splitting and synthetic data
//! * [`tree`]: the classifier, routing and metrics
//! * [`qp`]: convex QP and SVM solves
//! * [`bnb`]: branch and bound over binary variables
//! * [`margot`]: model construction, solution checks and tree extraction
//! * [`heuristic`]: the level-by-level warm start
//! * [`runner`]: configuration, training runs, cross-validation, reports
//!
//! ```
//! use margot::dataset::{gen_partitions, GeneratorSpec};
//! use margot::margot::{build, Hyperparameters, Variant};
//!
//! let data = gen_partitions(&GeneratorSpec::four_partitions(), 2).unwrap();
//! let (problem, _) = build(&data, &Hyperparameters::uniform(2, 100.0), Variant::Margot).unwrap();
//! assert_eq!(problem.binary_vars.len(), 108 * 2);
//! ```

pub mod bnb;
pub mod dataset;
pub mod heuristic;
pub mod margot;
pub mod qp;
pub mod runner;
pub mod tree;
