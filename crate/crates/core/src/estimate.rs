use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Contour,
    ClosedFormQ1,
    ClosedFormQ2,
    ClosedFormQ3,
    Determinantal,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte_carlo",
            Method::Contour => "contour",
            Method::ClosedFormQ1 => "closed_form_q1",
            Method::ClosedFormQ2 => "closed_form_q2",
            Method::ClosedFormQ3 => "closed_form_q3",
            Method::Determinantal => "determinantal",
        }
    }
}

/// A value with its error bar (standard error for Monte Carlo, quadrature
/// estimate otherwise), tagged with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    /// Half-dimension N; 0 for N → ∞ limits.
    pub n_half: usize,
    pub method: Method,
    pub samples: usize,
}
