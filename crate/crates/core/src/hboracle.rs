//! Harmonic-balance reference for a single series `L0–R0–C(t)` branch with
//! `C(t) = C0 (1 + ΔC/C0 · cos ωm t)`, used to check the closed-form
//! sideband admittance.
//!
//! With charge `q = Σ Q_k e^{j(ω + kωm)t}` and elastance
//! `1/C(t) = (1/C0) Σ_n c_n e^{jnωm t}`, each retained harmonic obeys
//!
//! ```text
//! V_k / L0 = (−ω_k² + jω_k R0/L0) Q_k + ω0² Σ_n c_n Q_{k−n}
//! ```
//!
//! and the admittance at the fundamental is `jω Q_0 / V_0`.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::junction::{sideband_admittances, JunctionParams};
use crate::netcore::Complex;
use crate::numeric::adaptive_simpson;

const QUADRATURE_TOL: f64 = 1e-13;

/// n-th cosine Fourier coefficient of `C0 / C(t)`: the mean for `n = 0`,
/// `(1/π) ∫ cos nθ / (1 + d cos θ) dθ` otherwise.
pub fn elastance_fourier(dc_ratio: f64, n: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&dc_ratio) {
        return Err(Error::InvalidModulationDepth(dc_ratio));
    }
    if dc_ratio == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let nf = f64::from(n);
    let g = |t: f64| (nf * t).cos() / (1.0 + dc_ratio * t.cos());
    // even integrand: twice the half period
    let half = adaptive_simpson(&g, 0.0, PI, QUADRATURE_TOL);
    Ok(if n == 0 { half / PI } else { 2.0 * half / PI })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sidebands {
    /// Harmonics `0..=depth` (upper sidebands).
    PlusOnly,
    /// Harmonics `−depth..=0`.
    MinusOnly,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub sidebands: Sidebands,
    pub depth: usize,
}

impl TruncationSpec {
    pub fn new(sidebands: Sidebands, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParams("truncation depth must be at least 1".into()));
        }
        Ok(Self { sidebands, depth })
    }

    /// Retained harmonic indices in ascending order.
    pub fn harmonics(&self) -> Vec<i64> {
        let d = self.depth as i64;
        match self.sidebands {
            Sidebands::PlusOnly => (0..=d).collect(),
            Sidebands::MinusOnly => (-d..=0).collect(),
            Sidebands::Both => (-d..=d).collect(),
        }
    }
}

/// Fundamental-frequency admittance of one modulated series branch.
pub fn tank_admittance(p: &JunctionParams, f: f64, trunc: TruncationSpec) -> Result<Complex> {
    if !(f > 0.0) {
        return Err(Error::InvalidParams(format!("frequency must be positive, got {f}")));
    }
    let ks = trunc.harmonics();
    let span = (ks[ks.len() - 1] - ks[0]) as u32;
    let coeffs = (0..=span)
        .map(|n| elastance_fourier(p.dc_ratio, n))
        .collect::<Result<Vec<f64>>>()?;
    let w = 2.0 * PI * f;
    let (wm, w0, loss) = (p.wm(), p.w0(), p.loss_rate());
    let w02 = w0 * w0;

    let size = ks.len();
    let mut a = DMatrix::<Complex>::zeros(size, size);
    for (i, ki) in ks.iter().enumerate() {
        let wk = w + *ki as f64 * wm;
        for (j, kj) in ks.iter().enumerate() {
            let n = (ki - kj).unsigned_abs() as usize;
            let c = if n == 0 { coeffs[0] } else { 0.5 * coeffs[n] };
            a[(i, j)] = Complex::new(w02 * c, 0.0);
        }
        a[(i, i)] += Complex::new(-wk * wk, wk * loss);
    }
    let zero = ks.iter().position(|k| *k == 0).expect("fundamental is always retained");
    let mut rhs = DVector::<Complex>::zeros(size);
    rhs[zero] = Complex::new(1.0 / p.l0, 0.0);
    let q = a.lu().solve(&rhs).ok_or(Error::SingularTruncation)?;
    if !q[zero].is_finite() || q[zero].norm() == 0.0 {
        return Err(Error::SingularTruncation);
    }
    Ok(Complex::new(0.0, w) * q[zero])
}

/// `3 I±`: the closed-form single-sideband admittance of one branch.
pub fn closed_form_branch(p: &JunctionParams, f: f64, sidebands: Sidebands) -> Result<Complex> {
    let (plus, minus) = sideband_admittances(p, f)?;
    match sidebands {
        Sidebands::PlusOnly => Ok(plus * 3.0),
        Sidebands::MinusOnly => Ok(minus * 3.0),
        Sidebands::Both => Err(Error::InvalidParams(
            "the closed form keeps a single sideband".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthStep {
    pub depth: usize,
    pub admittance: Complex,
    /// Relative change from the previous depth (`None` at depth 1).
    pub change: Option<f64>,
}

/// Admittances for depths `1..=max_depth` and their successive changes.
pub fn truncation_study(p: &JunctionParams, f: f64, sidebands: Sidebands, max_depth: usize) -> Result<Vec<DepthStep>> {
    let mut out: Vec<DepthStep> = Vec::with_capacity(max_depth);
    for depth in 1..=max_depth {
        let y = tank_admittance(p, f, TruncationSpec::new(sidebands, depth)?)?;
        let change = out.last().map(|prev| (y - prev.admittance).norm() / y.norm());
        out.push(DepthStep {
            depth,
            admittance: y,
            change,
        });
    }
    Ok(out)
}

/// Depths at which the successive change grew instead of shrinking.
pub fn monotonicity_violations(study: &[DepthStep]) -> Vec<usize> {
    study
        .windows(2)
        .filter_map(|w| match (w[0].change, w[1].change) {
            (Some(a), Some(b)) if b > a => Some(w[1].depth),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::junction::sideband_coefficients;

    #[test]
    fn coefficients_match_closed_forms() {
        for d in [0.1, 0.3, 0.544, 0.7, 0.9] {
            let c = sideband_coefficients(d).unwrap();
            assert!((elastance_fourier(d, 0).unwrap() - c.sigma).abs() < 1e-9);
            assert!((elastance_fourier(d, 1).unwrap() - c.gamma).abs() < 1e-9);
        }
    }

    #[test]
    fn higher_orders_follow_geometric_series() {
        // C0/C = σ (1 + 2 Σ (−ρ)^n cos nθ), ρ = (1 − √(1 − d²)) / d
        let d: f64 = 0.544;
        let rho = (1.0 - (1.0 - d * d).sqrt()) / d;
        let sigma = 1.0 / (1.0 - d * d).sqrt();
        for n in 2..6 {
            let expect = 2.0 * sigma * (-rho).powi(n as i32);
            assert!((elastance_fourier(d, n).unwrap() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn unmodulated_has_no_harmonics() {
        assert_eq!(elastance_fourier(0.0, 3).unwrap(), 0.0);
        assert_eq!(elastance_fourier(0.0, 0).unwrap(), 1.0);
    }

    #[test]
    fn depth_one_is_the_closed_form() {
        let p = JunctionParams::reference();
        for sb in [Sidebands::PlusOnly, Sidebands::MinusOnly] {
            for f in [0.9e9, 1.0e9, 1.05e9] {
                let hb = tank_admittance(&p, f, TruncationSpec::new(sb, 1).unwrap()).unwrap();
                let cf = closed_form_branch(&p, f, sb).unwrap();
                assert!((hb - cf).norm() / cf.norm() < 1e-12, "{sb:?} {f}: {hb} vs {cf}");
            }
        }
    }

    #[test]
    fn truncation_converges_monotonically() {
        let p = JunctionParams::reference();
        for sb in [Sidebands::PlusOnly, Sidebands::Both] {
            let study = truncation_study(&p, 1.0e9, sb, 12).unwrap();
            assert!(monotonicity_violations(&study).is_empty(), "{sb:?}");
            assert!(study.last().unwrap().change.unwrap() < 1e-6);
        }
    }

    #[test]
    fn deep_modulation_does_not_settle() {
        let p = JunctionParams::reference().with_dc_ratio(0.99).unwrap();
        let study = truncation_study(&p, 1.0e9, Sidebands::PlusOnly, 10).unwrap();
        assert!(!monotonicity_violations(&study).is_empty());
    }

    #[test]
    fn depth_validation() {
        assert!(TruncationSpec::new(Sidebands::Both, 0).is_err());
        assert!(matches!(elastance_fourier(1.0, 0), Err(Error::InvalidModulationDepth(_))));
        assert_eq!(TruncationSpec::new(Sidebands::MinusOnly, 2).unwrap().harmonics(), vec![-2, -1, 0]);
    }
}
