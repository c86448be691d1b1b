use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix conversion is singular (condition number {condition:.3e})")]
    SingularConversion { condition: f64 },

    #[error("invalid junction parameter: {0}")]
    InvalidParams(String),

    #[error("modulation depth {0} must lie in [0, 1)")]
    InvalidModulationDepth(f64),

    #[error("frequency {freq:.6e} Hz sits on a pole of the sideband admittance")]
    PoleProximity { freq: f64 },

    #[error("junction is degenerate at this frequency: {0}")]
    DegenerateJunction(&'static str),

    #[error("terminated network is singular")]
    SingularNetwork,

    #[error("no reactance zero crossing in [{lo:.6e}, {hi:.6e}] Hz")]
    NoResonance { lo: f64, hi: f64 },

    #[error("{count} reactance zero crossings in [{lo:.6e}, {hi:.6e}] Hz, expected one")]
    MultipleResonances { lo: f64, hi: f64, count: usize },

    #[error("specifications are infeasible: {0}")]
    InfeasibleSpecs(String),

    #[error("reflection grid too narrow: |Γ| must exceed 0.99 at both ends (got {low:.4} and {high:.4})")]
    GridTooNarrow { low: f64, high: f64 },

    #[error("node admittance vanishes (|Y1 + load| < 1e-15 S)")]
    SingularNode,

    #[error("filter synthesis did not converge (best residual {residual:.3e} Ω)")]
    NoConvergence { residual: f64 },

    #[error("synthesized element values are not physical: {0:?}")]
    NonPhysical([f64; 4]),

    #[error("invalid synthesis target: {0}")]
    InvalidSynthesis(String),

    #[error("no matching offset reaches the isolation target anywhere in the search range")]
    EmptyFeasibleSet,

    #[error("signal-flow graph determinant vanishes")]
    SingularGraph,

    #[error("isolation never reaches {beta_db} dB around the center frequency")]
    NoBand { beta_db: f64 },

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("harmonic-balance truncation is singular")]
    SingularTruncation,

    #[error("no feasible cell in sweep row fm_ratio = {0}")]
    EmptyRow(f64),
}
