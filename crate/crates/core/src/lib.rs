//! Pseudospectral laboratory for the b-family of peakon equations
//!
//! ```text
//! u_t + (u²/2 + G(b/2 u² + (3-b)/2 u_x²))_x = 0,      G = (1 - ∂²)⁻¹
//! m_t + u m_x + b m u_x = 0,                          m = u - u_xx
//! ```
//!
//! The real line is replaced by a periodic box; `G` is applied either as the
//! Fourier multiplier `1/(1+k²)` or, as an independent check, by direct
//! quadrature against the periodized kernel `cosh(L/2 - |x|) / (2 sinh(L/2))`.
//!
//! Layout:
//! * [`grid`]: grid, fields, windows, quadrature and norms
//! * [`spectral`]: Helmholtz operators (`G`, `∂ₓG`, `1 - ∂²`, derivatives)
//! * [`dynamics`]: right-hand sides of both formulations
//! * [`integrator`]: RK4 method of lines, observers, wave-breaking detection
//! * [`initial`]: peakons, shock peakons, momentum data
//! * [`functionals`]: scale functions, weights, conserved quantities, virial functionals
//! * [`verification`]: checkers producing [`verification::CheckReport`]s

pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod initial;
pub mod integrator;
pub mod observers;
pub mod spectral;
pub mod verification;

pub use dynamics::{
    cross_check_forms, rhs_m, rhs_u, BFamilyParams, Dynamics, Form, MomentumSign, State,
};
pub use error::{Error, Result};
pub use functionals::{ExteriorFrame, FunctionalValue, ScaleParams, WeightKind};
pub use grid::{
    integrate, make_grid, norm, sample, window_restrict, Field, Grid, NormKind, Window,
};
pub use integrator::{run, SimConfig, SnapshotPolicy, StepSize, Termination, Trajectory};
pub use spectral::SpectralWorkspace;
pub use verification::{CheckReport, CheckStatus};
