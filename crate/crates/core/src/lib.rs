//! Fixed points, perpetual points and their spectra for autonomous systems
//! `dX/dt = f(X)`, with numerical checks of how they behave under a change
//! of coordinates `Y = h(X)`.

pub mod conjugacy;
pub mod critical;
pub mod error;
pub mod expr;
pub mod field;
pub mod flow;
pub mod region;
pub mod spectra;
pub mod system;

pub use conjugacy::{
    detect_new_points, initial_points, verify_conjugacy, verify_flow_conjugacy, verify_point_mapping,
    verify_spectrum_preservation, ConjugacyReport, PointRecord, TheoremCheck, TheoremId, Tolerances, Verdict,
    Verifier,
};
pub use critical::{
    classify_point, find_fixed_points, find_perpetual_points, newton_root, CriticalPoint, NewtonRoot,
    PointKind, PointSearch, SolverConfig,
};
pub use error::{Error, EvalError, ParseError, Result};
pub use expr::{differentiate, parse_expression, Expr, Scope};
pub use field::{
    acceleration_field, inverse_residual, pushforward_acceleration, pushforward_velocity,
    transformed_system, JetOrder, JetValue, TransformationMap, VectorField,
};
pub use flow::{flow_map, integrate, integrate_prefix, IntegratorConfig, Method, Trajectory};
pub use num_complex::Complex64;
pub use region::AnalysisRegion;
pub use spectra::{eigenvalues, solve_linear, spectrum_distance, Spectrum, SquareMatrix};
pub use system::{ParameterSet, SystemDefinition};
