//! Bandwidth limits: first-order RLC model of `Yc*`, the Bode-Fano integral
//! criterion, and the global bound combining it with the `2 fm` causality
//! limit.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::junction::{center_frequency, characteristic_admittance, junction_y, JunctionParams};
use crate::netcore::Complex;
use crate::numeric::single_crossing;

/// Series RLC approximation of the conjugate characteristic admittance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlcModel {
    /// Ω
    pub rc: f64,
    /// H
    pub lc: f64,
    /// F
    pub cc: f64,
    /// Resonant frequency, Hz.
    pub fc: f64,
    pub qc: f64,
}

impl RlcModel {
    pub fn from_elements(rc: f64, lc: f64, fc: f64) -> Self {
        let wc = 2.0 * PI * fc;
        Self {
            rc,
            lc,
            cc: 1.0 / (wc * wc * lc),
            fc,
            qc: wc * lc / rc,
        }
    }

    /// Right-hand side of the Bode-Fano criterion, `π Rc / Lc` in rad/s.
    pub fn bode_fano_integral_limit(&self) -> f64 {
        PI * self.rc / self.lc
    }
}

/// In-band reflection budget implied by an insertion-loss ceiling `alpha_db`
/// and an isolation floor `beta_db`, dissipation neglected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecBudget {
    pub alpha_db: f64,
    pub beta_db: f64,
    /// Minimum return loss, dB.
    pub rho_db: f64,
    /// Maximum in-band |Γ|.
    pub gamma_lin: f64,
}

pub fn reflection_budget(alpha_db: f64, beta_db: f64) -> Result<SpecBudget> {
    if !(alpha_db > 0.0) || !(beta_db > 0.0) {
        return Err(Error::InfeasibleSpecs(format!(
            "alpha and beta must be positive (got {alpha_db} dB, {beta_db} dB)"
        )));
    }
    let arg = 1.0 - 10f64.powf(-beta_db / 20.0) - 10f64.powf(-alpha_db / 20.0);
    if arg <= 0.0 {
        return Err(Error::InfeasibleSpecs(format!(
            "IL < {alpha_db} dB and IX > {beta_db} dB violate power conservation"
        )));
    }
    let rho_db = -20.0 * arg.log10();
    Ok(SpecBudget {
        alpha_db,
        beta_db,
        rho_db,
        gamma_lin: 10f64.powf(-rho_db / 20.0),
    })
}

/// Relative frequency step used for the reactance slope.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
const RLC_SCAN_POINTS: usize = 401;

/// Fits a series RLC to `1/Y` around its unique reactance zero in `band`.
pub fn extract_rlc<F>(admittance: &F, band: (f64, f64)) -> Result<RlcModel>
where
    F: Fn(f64) -> Result<Complex>,
{
    extract_rlc_with_step(admittance, band, DEFAULT_FD_STEP)
}

pub fn extract_rlc_with_step<F>(admittance: &F, band: (f64, f64), rel_step: f64) -> Result<RlcModel>
where
    F: Fn(f64) -> Result<Complex>,
{
    let z = |f: f64| -> Result<Complex> {
        let y = admittance(f)?;
        if y.norm() == 0.0 {
            return Err(Error::DegenerateJunction("admittance vanishes"));
        }
        Ok(y.inv())
    };
    let x = |f: f64| z(f).map(|v| v.im);
    let fc = single_crossing(&x, band.0, band.1, RLC_SCAN_POINTS, 1.0)?;
    let rc = z(fc)?.norm();

    // dZ/dω by central differences, one Richardson step
    let h = fc * rel_step;
    let central = |h: f64| -> Result<Complex> { Ok((z(fc + h)? - z(fc - h)?) / (2.0 * h * 2.0 * PI)) };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    let slope = (fine * 4.0 - coarse) / 3.0;
    let lc = 0.5 * slope.norm();
    if !(rc > 0.0 && lc > 0.0) {
        return Err(Error::InfeasibleSpecs("degenerate RLC fit".into()));
    }
    Ok(RlcModel::from_elements(rc, lc, fc))
}

/// Brickwall Bode-Fano fractional bandwidth `π / (ln(1/|Γ|) Qc)`.
pub fn bode_fano_bw(model: &RlcModel, budget: &SpecBudget) -> f64 {
    let ln = (1.0 / budget.gamma_lin).ln();
    if ln <= 0.0 {
        return f64::INFINITY;
    }
    PI / ln / model.qc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalBound {
    pub model: RlcModel,
    /// Bode-Fano branch, fraction of fc.
    pub bode_fano: f64,
    /// `2 fm / fc`.
    pub modulation_limit: f64,
}

impl GlobalBound {
    pub fn value(&self) -> f64 {
        self.bode_fano.min(self.modulation_limit)
    }
}

/// Global fractional bandwidth bound for the junction described by `p`.
pub fn global_bound(p: &JunctionParams, budget: &SpecBudget) -> Result<GlobalBound> {
    if p.dc_ratio == 0.0 {
        return Err(Error::InfeasibleSpecs("an unmodulated junction does not circulate".into()));
    }
    let fc = center_frequency(p)?;
    let yc_conj = |f: f64| -> Result<Complex> {
        Ok(characteristic_admittance(&junction_y(p, f)?)?.value().conj())
    };
    if yc_conj(fc)?.re <= 0.0 {
        return Err(Error::InfeasibleSpecs(
            "characteristic conductance is not positive at the center".into(),
        ));
    }
    let half = 0.5 * p.fm;
    let model = extract_rlc(&yc_conj, (fc - half, fc + half))?;
    Ok(GlobalBound {
        model,
        bode_fano: bode_fano_bw(&model, budget),
        modulation_limit: 2.0 * p.fm / model.fc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralReport {
    /// `∫ ln(1/|Γ|) dω`, rad/s.
    pub integral: f64,
    /// `π Rc / Lc`, rad/s.
    pub bound: f64,
    /// Integral exceeds the bound by more than 1 %.
    pub violated: bool,
}

/// Trapezoidal evaluation of the Bode-Fano integral over sampled `|Γ(f)|`.
pub fn verify_bode_fano_integral(freqs: &[f64], gamma: &[f64], model: &RlcModel) -> Result<IntegralReport> {
    if freqs.len() != gamma.len() || freqs.len() < 2 {
        return Err(Error::InvalidGrid("need matching frequency and |Γ| samples".into()));
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("frequencies must increase strictly".into()));
    }
    let (low, high) = (gamma[0], gamma[gamma.len() - 1]);
    if !(low > 0.99 && high > 0.99) {
        return Err(Error::GridTooNarrow { low, high });
    }
    let integrand: Vec<f64> = gamma.iter().map(|g| (1.0 / g).ln()).collect();
    let integral: f64 = freqs
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(f, v)| 0.5 * (v[0] + v[1]) * 2.0 * PI * (f[1] - f[0]))
        .sum();
    let bound = model.bode_fano_integral_limit();
    Ok(IntegralReport {
        integral,
        bound,
        violated: integral > 1.01 * bound,
    })
}
