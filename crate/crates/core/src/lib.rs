//! Compact weighted rule sets from gradient-boosted tree ensembles.
//!
//! An ensemble is flattened into a [`RuleSpace`] (one candidate rule per tree
//! node). Rules are then selected, at most one per root-to-leaf path of each
//! tree, and reweighted by ridge regression:
//!
//! * [`exact::solve_exact`] minimizes the loss under an attribute budget by
//!   outer approximation,
//! * [`approx::fit_path`] traces a penalized regularization path by block
//!   coordinate descent over trees,
//! * [`relax::relax_and_round`] rounds the convex relaxation tree by tree.

pub mod approx;
pub mod dataio;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod milp;
pub mod numcore;
pub mod oracle;
pub mod relax;
pub mod rulespace;
pub mod synth;

pub use approx::{
    active_set_fit, block_solve, cbcd_fit, fit_path, lambda_grid, select_k, CbcdOptions,
    CbcdState, Counters, PathConfig, PathPoint, PathResult,
};
pub use dataio::{
    load_csv, load_ensemble, load_rule_model, save_ensemble, save_path_csv, save_rule_model,
    split, Dataset, ModelMetadata, RuleModel,
};
pub use ensemble::{fit_gbt, r2, GbtParams, TreeEnsemble};
pub use error::{Error, Result};
pub use exact::{solve_exact, warm_start, ExactConfig, ExactResult};
pub use relax::{relax_and_round, solve_relaxation, RelaxConfig, RelaxResult};
pub use rulespace::{render_rules, AttributeScheme, RuleSpace, Selection};
