//! Closed-form model of the modulated differential current-mode junction.
//!
//! Each of the six tanks has capacitance `C0 ± ΔC cos(ωm t + φn)` with the
//! three-phase pattern `φn = (n-1)2π/3`. Coupling to the first upper and lower
//! sidebands gives the sideband admittances `I±(ω)`, from which the circulant
//! Y-matrix follows as
//!
//! ```text
//! Y11 = 2(I+ + I-)
//! Y21 = 2(e^{+j2π/3} I+ + e^{-j2π/3} I-)
//! Y31 = 2(e^{-j2π/3} I+ + e^{+j2π/3} I-)
//! ```

use log::warn;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::netcore::{y_to_s, Complex, CyclicThreePort};
use crate::numeric::single_crossing;

/// Relative threshold below which a sideband denominator counts as a pole.
const POLE_REL_TOL: f64 = 1e-9;
/// Entries below this magnitude (siemens) make the circulator and Yc formulas degenerate.
const DEGENERATE_Y: f64 = 1e-15;

/// Unloaded quality factor of each tank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quality {
    /// 1/Q0 = 0 exactly.
    Lossless,
    Finite(f64),
}

impl Quality {
    pub fn inverse(self) -> f64 {
        match self {
            Quality::Lossless => 0.0,
            Quality::Finite(q) => 1.0 / q,
        }
    }
}

/// Frequency at which `Q0` is quoted, i.e. where `R0 = ω L0 / Q0` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QReference {
    /// Static tank resonance `1/√(L0 C0)`.
    Static,
    /// Modulated tank resonance `√σ / √(L0 C0)`, which is where the junction
    /// actually operates.
    #[default]
    Modulated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    /// Tank inductance, H.
    pub l0: f64,
    /// Static capacitance, F.
    pub c0: f64,
    /// ΔC / C0.
    pub dc_ratio: f64,
    /// Modulation frequency, Hz.
    pub fm: f64,
    pub q0: Quality,
    /// Port reference impedance, Ω.
    pub z0: f64,
    pub q_reference: QReference,
    /// Reverses the modulation rotation (equivalent to ωm → −ωm).
    pub reversed: bool,
}

impl JunctionParams {
    pub fn new(l0: f64, c0: f64, dc_ratio: f64, fm: f64, q0: Quality, z0: f64) -> Result<Self> {
        let p = Self {
            l0,
            c0,
            dc_ratio,
            fm,
            q0,
            z0,
            q_reference: QReference::default(),
            reversed: false,
        };
        p.validate()?;
        Ok(p)
    }

    /// Reference junction: L0 = 25 nH, C0 = 1.2 pF, ΔC/C0 = 0.544, fm = 110 MHz,
    /// Q0 = 50, 50 Ω ports.
    pub fn reference() -> Self {
        Self::new(25e-9, 1.2e-12, 0.544, 110e6, Quality::Finite(50.0), 50.0)
            .expect("reference parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return bad("l0 must be positive");
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return bad("c0 must be positive");
        }
        if !(0.0..1.0).contains(&self.dc_ratio) {
            return Err(Error::InvalidModulationDepth(self.dc_ratio));
        }
        if !(self.fm > 0.0 && self.fm.is_finite()) {
            return bad("fm must be positive");
        }
        if let Quality::Finite(q) = self.q0 {
            if !(q > 0.0 && q.is_finite()) {
                return bad("q0 must be positive");
            }
        }
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return bad("z0 must be positive");
        }
        let f0 = self.f0();
        if self.fm >= f0 {
            return bad("fm must stay below the tank resonance f0 (parametric regime)");
        }
        if self.fm > 0.5 * f0 {
            warn!(
                "fm = {:.4e} Hz exceeds half of f0 = {:.4e} Hz; the sideband model approaches parametric gain",
                self.fm, f0
            );
        }
        Ok(())
    }

    pub fn with_q_reference(mut self, r: QReference) -> Self {
        self.q_reference = r;
        self
    }

    pub fn with_dc_ratio(mut self, dc_ratio: f64) -> Result<Self> {
        self.dc_ratio = dc_ratio;
        self.validate()?;
        Ok(self)
    }

    pub fn with_fm(mut self, fm: f64) -> Result<Self> {
        self.fm = fm;
        self.validate()?;
        Ok(self)
    }

    pub fn with_quality(mut self, q0: Quality) -> Result<Self> {
        self.q0 = q0;
        self.validate()?;
        Ok(self)
    }

    /// Same junction with the modulation rotating the other way.
    pub fn reversed(mut self) -> Self {
        self.reversed = !self.reversed;
        self
    }

    pub fn y0(&self) -> f64 {
        1.0 / self.z0
    }

    pub fn w0(&self) -> f64 {
        1.0 / (self.l0 * self.c0).sqrt()
    }

    /// Static resonance `1/(2π√(L0 C0))`.
    pub fn f0(&self) -> f64 {
        self.w0() / (2.0 * PI)
    }

    /// Modulated tank resonance `√σ · f0`.
    pub fn f_resonance(&self) -> f64 {
        let s = sideband_coefficients(self.dc_ratio).map(|c| c.sigma).unwrap_or(1.0);
        s.sqrt() * self.f0()
    }

    /// Loss rate `R0 / L0` in rad/s.
    pub fn loss_rate(&self) -> f64 {
        let w = match self.q_reference {
            QReference::Static => self.w0(),
            QReference::Modulated => 2.0 * PI * self.f_resonance(),
        };
        w * self.q0.inverse()
    }

    /// Signed modulation angular frequency.
    pub fn wm(&self) -> f64 {
        let w = 2.0 * PI * self.fm;
        if self.reversed {
            -w
        } else {
            w
        }
    }
}

/// Mean and first cosine coefficient of the normalized elastance `C0 / C(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandCoefficients {
    pub sigma: f64,
    pub gamma: f64,
}

pub fn sideband_coefficients(dc_ratio: f64) -> Result<SidebandCoefficients> {
    if !(0.0..1.0).contains(&dc_ratio) {
        return Err(Error::InvalidModulationDepth(dc_ratio));
    }
    let root = (1.0 - dc_ratio * dc_ratio).sqrt();
    let sigma = 1.0 / root;
    // (2/d)(1 - 1/√(1-d²)) = -2d / (√(1-d²)(1 + √(1-d²))), stable as d → 0
    let gamma = -2.0 * dc_ratio / (root * (1.0 + root));
    Ok(SidebandCoefficients { sigma, gamma })
}

/// Normalized admittance bracket of `I±`, with the sideband at `ω + wm_signed`.
///
/// Returns the bracket
/// `ω² − jlω − σω0² − (ω0⁴γ²/4) / ((ω+ωs)² − σω0² − jl(ω+ωs))`.
pub fn sideband_bracket(p: &JunctionParams, w: f64, wm_signed: f64) -> Result<Complex> {
    let c = sideband_coefficients(p.dc_ratio)?;
    let w0sq = p.w0() * p.w0();
    let loss = p.loss_rate();
    let ws = w + wm_signed;
    let side = Complex::new(ws * ws - c.sigma * w0sq, -loss * ws);
    let side_scale = (ws * ws).max(c.sigma * w0sq);
    if side.norm() < POLE_REL_TOL * side_scale {
        return Err(Error::PoleProximity { freq: w / (2.0 * PI) });
    }
    let coupling = w0sq * w0sq * c.gamma * c.gamma / 4.0;
    let bracket = Complex::new(w * w - c.sigma * w0sq, -loss * w) - coupling / side;
    let scale = (w * w).max(c.sigma * w0sq);
    if bracket.norm() < POLE_REL_TOL * scale {
        return Err(Error::PoleProximity { freq: w / (2.0 * PI) });
    }
    Ok(bracket)
}

/// Sideband admittances `(I+, I-)` at frequency `f`.
pub fn sideband_admittances(p: &JunctionParams, f: f64) -> Result<(Complex, Complex)> {
    if !(f > 0.0) {
        return Err(Error::InvalidParams(format!("frequency must be positive, got {f}")));
    }
    let w = 2.0 * PI * f;
    let pre = Complex::new(0.0, -w / (3.0 * p.l0));
    let wm = p.wm();
    let plus = pre / sideband_bracket(p, w, wm)?;
    let minus = pre / sideband_bracket(p, w, -wm)?;
    Ok((plus, minus))
}

/// Circulant Y-matrix of the junction at frequency `f`.
pub fn junction_y(p: &JunctionParams, f: f64) -> Result<CyclicThreePort> {
    let (ip, im) = sideband_admittances(p, f)?;
    let a = Complex::from_polar(1.0, 2.0 * PI / 3.0);
    let ac = a.conj();
    Ok(CyclicThreePort::admittance(
        (ip + im) * 2.0,
        (a * ip + ac * im) * 2.0,
        (ac * ip + a * im) * 2.0,
    ))
}

/// Junction S-parameters referenced to the port impedance `z0`.
pub fn junction_s(p: &JunctionParams, f: f64) -> Result<CyclicThreePort> {
    y_to_s(&junction_y(p, f)?, p.y0())
}

/// Complex immittance `G + jB` (or `R + jX`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Immittance(pub Complex);

impl Immittance {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex::new(re, im))
    }
    pub fn g(&self) -> f64 {
        self.0.re
    }
    pub fn b(&self) -> f64 {
        self.0.im
    }
    pub fn value(&self) -> Complex {
        self.0
    }
    /// `1/Y`, or `None` for a zero immittance.
    pub fn inverse(&self) -> Option<Immittance> {
        if self.0.norm() > 0.0 {
            Some(Immittance(self.0.inv()))
        } else {
            None
        }
    }
    pub fn conj(&self) -> Immittance {
        Immittance(self.0.conj())
    }
}

/// Termination admittance that nulls the isolated-port voltage:
/// `Yc = Y21²/Y31 − Y11`.
pub fn characteristic_admittance(y: &CyclicThreePort) -> Result<Immittance> {
    if y.bwd.norm() < DEGENERATE_Y {
        return Err(Error::DegenerateJunction("|Y31| vanishes"));
    }
    Ok(Immittance(y.fwd * y.fwd / y.bwd - y.diag))
}

/// Port-1 input admittance with ports 2 and 3 terminated in `Yc`:
/// `Yin = Y11 − Y31²/Y21`.
pub fn input_admittance(y: &CyclicThreePort) -> Result<Immittance> {
    if y.fwd.norm() < DEGENERATE_Y {
        return Err(Error::DegenerateJunction("|Y21| vanishes"));
    }
    Ok(Immittance(y.diag - y.bwd * y.bwd / y.fwd))
}

/// `V3 / Vs` for a unit source at port 1 with every port terminated in `yc`.
pub fn driven_transmission(y: &CyclicThreePort, yc: Complex) -> Result<Complex> {
    let (y11, y21, y31) = (y.diag, y.fwd, y.bwd);
    let norm = y11 * y11 * y11 + y21 * y21 * y21 + y31 * y31 * y31 - y11 * y21 * y31 * 3.0;
    let den = norm + yc * yc * yc + y11 * yc * yc * 3.0 + (y11 * y11 - y21 * y31) * yc * 3.0;
    if den.norm() < 1e-18 {
        return Err(Error::SingularNetwork);
    }
    Ok(yc * (y21 * y21 - (yc + y11) * y31) / den)
}

/// Port voltages `(V1, V2, V3)` for a unit source at port 1 and every port
/// terminated in the admittance `yt`, i.e. `(U + Zt Y)^{-1} e1`.
pub fn terminated_voltages(y: &CyclicThreePort, yt: Complex) -> Result<[Complex; 3]> {
    if yt.norm() == 0.0 {
        return Err(Error::SingularNetwork);
    }
    let zt = yt.inv();
    let lambda = y.eigenvalues().map(|l| Complex::new(1.0, 0.0) + zt * l);
    if lambda.iter().any(|l| l.norm() < 1e-15) {
        return Err(Error::SingularNetwork);
    }
    let inv = CyclicThreePort::from_eigenvalues(lambda.map(|l| l.inv()), y.kind);
    // first column of the circulant inverse
    Ok([inv.diag, inv.fwd, inv.bwd])
}

/// Transducer loss (dB) from port 1 to port 2 when all ports are terminated in
/// the characteristic admittance evaluated at the same frequency.
pub fn yc_terminated_insertion_loss(p: &JunctionParams, f: f64) -> Result<f64> {
    let y = junction_y(p, f)?;
    let yc = characteristic_admittance(&y)?.value();
    if yc.re <= 0.0 {
        return Err(Error::InfeasibleSpecs("characteristic conductance is not positive".into()));
    }
    let v = terminated_voltages(&y, yc)?;
    let zc = yc.inv();
    let gain = 4.0 * zc.re * yc.re * v[1].norm_sqr();
    Ok(-10.0 * gain.log10())
}

/// Half-width of the band searched for the `B = 0` center, as a fraction of fm.
pub const CENTER_SEARCH_HALF_WIDTH: f64 = 0.5;
const CENTER_SCAN_POINTS: usize = 401;

/// Center frequency: the unique zero crossing of `Im{Yc}` within
/// `f_r ± fm/2`, resolved to 1 Hz.
pub fn center_frequency(p: &JunctionParams) -> Result<f64> {
    let fr = p.f_resonance();
    let half = CENTER_SEARCH_HALF_WIDTH * p.fm;
    let b = |f: f64| -> Result<f64> {
        let y = junction_y(p, f)?;
        Ok(characteristic_admittance(&y)?.b())
    };
    single_crossing(&b, fr - half, fr + half, CENTER_SCAN_POINTS, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{check_passivity, PassivityVerdict};

    #[test]
    fn unmodulated_coefficients() {
        let c = sideband_coefficients(0.0).unwrap();
        assert_eq!(c.sigma, 1.0);
        assert_eq!(c.gamma, 0.0);
    }

    #[test]
    fn coefficients_reject_full_depth() {
        assert!(matches!(sideband_coefficients(1.0), Err(Error::InvalidModulationDepth(_))));
        assert!(matches!(sideband_coefficients(-0.1), Err(Error::InvalidModulationDepth(_))));
    }

    #[test]
    fn gamma_matches_expanded_form() {
        for d in [0.1, 0.544, 0.9] {
            let c = sideband_coefficients(d).unwrap();
            let printed = 2.0 / d * (1.0 - 1.0 / (1.0 - d * d).sqrt());
            assert!((c.gamma - printed).abs() < 1e-14);
        }
    }

    #[test]
    fn unmodulated_junction_is_reciprocal() {
        let p = JunctionParams::reference().with_dc_ratio(0.0).unwrap();
        for f in [0.8e9, 0.95e9, 1.0e9, 1.2e9] {
            let y = junction_y(&p, f).unwrap();
            assert!((y.fwd - y.bwd).norm() <= 1e-14 * y.fwd.norm());
        }
    }

    #[test]
    fn reciprocal_reductions() {
        let p = JunctionParams::reference().with_dc_ratio(0.0).unwrap();
        let y = junction_y(&p, 0.97e9).unwrap();
        let yc = characteristic_admittance(&y).unwrap().value();
        let yin = input_admittance(&y).unwrap().value();
        let tol = 1e-12 * y.diag.norm();
        assert!((yc - (y.fwd - y.diag)).norm() < tol);
        assert!((yin - (y.diag - y.fwd)).norm() < tol);
    }

    #[test]
    fn lossless_junction_is_lossless() {
        let p = JunctionParams::reference().with_quality(Quality::Lossless).unwrap();
        for i in 0..=20 {
            let f = 0.9e9 + 0.01e9 * i as f64;
            let y = junction_y(&p, f).unwrap();
            assert_eq!(check_passivity(&y, 1e-12), PassivityVerdict::Lossless, "f = {f}");
        }
    }

    #[test]
    fn isolation_by_construction() {
        let p = JunctionParams::reference();
        let y = junction_y(&p, 1.01e9).unwrap();
        let yc = characteristic_admittance(&y).unwrap().value();
        assert!(driven_transmission(&y, yc).unwrap().norm() < 1e-12);
    }

    #[test]
    fn degenerate_entries_are_reported() {
        let zero = Complex::new(0.0, 0.0);
        let y = CyclicThreePort::admittance(Complex::new(0.01, 0.0), zero, zero);
        assert!(matches!(characteristic_admittance(&y), Err(Error::DegenerateJunction(_))));
        assert!(matches!(input_admittance(&y), Err(Error::DegenerateJunction(_))));
    }

    #[test]
    fn lossless_pole_is_detected() {
        // With 1/Q0 = 0 the sideband denominator vanishes exactly where
        // (ω + ωm)² = σ ω0².
        let p = JunctionParams::reference().with_quality(Quality::Lossless).unwrap();
        let c = sideband_coefficients(p.dc_ratio).unwrap();
        let w_pole = c.sigma.sqrt() * p.w0() - p.wm();
        let f_pole = w_pole / (2.0 * PI);
        assert!(matches!(junction_y(&p, f_pole), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn constructor_guards() {
        assert!(JunctionParams::new(25e-9, 1.2e-12, 0.544, 2e9, Quality::Finite(50.0), 50.0).is_err());
        assert!(JunctionParams::new(-1.0, 1.2e-12, 0.544, 1e8, Quality::Finite(50.0), 50.0).is_err());
        assert!(matches!(
            JunctionParams::new(25e-9, 1.2e-12, 1.0, 1e8, Quality::Finite(50.0), 50.0),
            Err(Error::InvalidModulationDepth(_))
        ));
    }

    #[test]
    fn reference_center_is_near_one_ghz() {
        let fc = center_frequency(&JunctionParams::reference()).unwrap();
        assert!((fc - 1.0e9).abs() < 2e6, "fc = {fc}");
    }
}
