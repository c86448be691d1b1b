//! Second-order LC ladder matching filters.
//!
//! Branch `k = 1` is the shunt tank on the junction side, branch `k = 2` the
//! series tank on the 50 Ω side:
//!
//! ```text
//! port (Z0) ──[ L2 ── C2 ]──┬── junction (Yc*)
//!                           │
//!                       [ L1 ‖ C1 ]
//!                           │
//!                          gnd
//! ```

use nalgebra::{Matrix4, Vector4};
use std::f64::consts::PI;

use crate::bound::SpecBudget;
use crate::error::{Error, Result};
use crate::junction::Immittance;
use crate::netcore::{Complex, TwoPortS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderFilter {
    /// Shunt tank inductance, H.
    pub l1: f64,
    /// Shunt tank capacitance, F.
    pub c1: f64,
    /// Series tank inductance, H.
    pub l2: f64,
    /// Series tank capacitance, F.
    pub c2: f64,
}

impl LadderFilter {
    pub fn new(l1: f64, c1: f64, l2: f64, c2: f64) -> Result<Self> {
        let f = Self { l1, c1, l2, c2 };
        if f.elements().iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(f)
        } else {
            Err(Error::NonPhysical(f.elements()))
        }
    }

    /// Reference filter values, with the units of C1 and L2 taken as nH/pF in the natural order.
    pub fn reference() -> Self {
        Self {
            l1: 1.76e-9,
            c1: 15.6e-12,
            l2: 10.4e-9,
            c2: 3.90e-12,
        }
    }

    pub fn elements(&self) -> [f64; 4] {
        [self.l1, self.c1, self.l2, self.c2]
    }

    fn from_scaled(x: &Vector4<f64>) -> Self {
        Self {
            l1: x[0] * SCALE[0],
            c1: x[1] * SCALE[1],
            l2: x[2] * SCALE[2],
            c2: x[3] * SCALE[3],
        }
    }

    fn scaled(&self) -> Vector4<f64> {
        Vector4::new(
            self.l1 / SCALE[0],
            self.c1 / SCALE[1],
            self.l2 / SCALE[2],
            self.c2 / SCALE[3],
        )
    }

    pub fn shunt_resonance(&self) -> f64 {
        1.0 / (2.0 * PI * (self.l1 * self.c1).sqrt())
    }

    pub fn series_resonance(&self) -> f64 {
        1.0 / (2.0 * PI * (self.l2 * self.c2).sqrt())
    }
}

const SCALE: [f64; 4] = [1e-9, 1e-12, 1e-9, 1e-12];

/// `Y1 = j(ωC1 − 1/(ωL1))` and `Z2 = j(ωL2 − 1/(ωC2))`.
pub fn filter_branch_immittances(f: &LadderFilter, freq: f64) -> (Immittance, Immittance) {
    let w = 2.0 * PI * freq;
    (
        Immittance::new(0.0, w * f.c1 - 1.0 / (w * f.l1)),
        Immittance::new(0.0, w * f.l2 - 1.0 / (w * f.c2)),
    )
}

/// Branch immittances with every element given a finite quality factor `q`
/// (series resistance `ωL/q` per inductor and `1/(ωCq)` per capacitor).
pub fn lossy_branch_immittances(f: &LadderFilter, freq: f64, q: f64) -> (Complex, Complex) {
    let w = 2.0 * PI * freq;
    let zl = |l: f64| Complex::new(w * l / q, w * l);
    let zc = |c: f64| Complex::new(1.0 / (w * c * q), -1.0 / (w * c));
    let y1 = zl(f.l1).inv() + zc(f.c1).inv();
    let z2 = zl(f.l2) + zc(f.c2);
    (y1, z2)
}

/// Impedance seen from the 50 Ω side with `load` admittance on the junction
/// side: `Zm = Z2 + 1/(Y1 + load)`.
pub fn filter_input_impedance(f: &LadderFilter, load: Complex, freq: f64) -> Result<Complex> {
    let (y1, z2) = filter_branch_immittances(f, freq);
    let node = y1.value() + load;
    if node.norm() < 1e-15 {
        return Err(Error::SingularNode);
    }
    Ok(z2.value() + node.inv())
}

/// Two-port S-parameters from the branch immittances; `r` on the port side,
/// `t` on the junction side.
pub fn sparams_from_branches(y1: Complex, z2: Complex, z0: f64) -> TwoPortS {
    let y0 = 1.0 / z0;
    let den = (y1 + y0) * (z2 + z0) + 1.0;
    let cross = z2 * y0 - y1 * z0;
    TwoPortS {
        r: (cross + z2 * y1) / den,
        t: (cross - z2 * y1) / den,
        m: Complex::new(2.0, 0.0) / den,
    }
}

pub fn filter_sparams(f: &LadderFilter, z0: f64, freq: f64) -> TwoPortS {
    let (y1, z2) = filter_branch_immittances(f, freq);
    sparams_from_branches(y1.value(), z2.value(), z0)
}

/// Filter S-parameters, lossless when `q` is `None`.
pub fn filter_sparams_with_loss(f: &LadderFilter, z0: f64, freq: f64, q: Option<f64>) -> TwoPortS {
    match q {
        None => filter_sparams(f, z0, freq),
        Some(q) => {
            let (y1, z2) = lossy_branch_immittances(f, freq, q);
            sparams_from_branches(y1, z2, z0)
        }
    }
}

/// The two frequencies at which the filter must present `Z0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisSpec {
    pub f_low: f64,
    pub f_high: f64,
    pub z0: f64,
}

impl SynthesisSpec {
    pub fn new(f_low: f64, f_high: f64, z0: f64) -> Result<Self> {
        if !(f_low > 0.0 && f_high > f_low) {
            return Err(Error::InvalidSynthesis(format!(
                "matching frequencies must satisfy 0 < f_low < f_high (got {f_low}, {f_high})"
            )));
        }
        if !(z0 > 0.0) {
            return Err(Error::InvalidSynthesis("z0 must be positive".into()));
        }
        Ok(Self { f_low, f_high, z0 })
    }

    /// Targets `fc ± df/2`.
    pub fn centered(fc: f64, df: f64, z0: f64) -> Result<Self> {
        if !(df > 0.0) {
            return Err(Error::InvalidSynthesis(format!("df must be positive, got {df}")));
        }
        Self::new(fc - 0.5 * df, fc + 0.5 * df, z0)
    }

    pub fn fc(&self) -> f64 {
        0.5 * (self.f_low + self.f_high)
    }

    pub fn df(&self) -> f64 {
        self.f_high - self.f_low
    }
}

/// Ripple of the two-element Chebyshev prototype used as the initial guess.
pub const PROTOTYPE_RIPPLE_DB: f64 = 0.5;
pub const MAX_NEWTON_ITERATIONS: usize = 200;
/// Required |Zm − Z0| at both targets, Ω.
pub const RESIDUAL_TOL: f64 = 1e-6;

/// Chebyshev lowpass prototype values `g1, g2` for a two-element ladder.
pub fn chebyshev_g2(ripple_db: f64) -> (f64, f64) {
    let n = 2.0;
    let beta = (1.0 / (ripple_db / 17.37).tanh()).ln();
    let gam = (beta / (2.0 * n)).sinh();
    let a = |k: f64| ((2.0 * k - 1.0) * PI / (2.0 * n)).sin();
    let b = |k: f64| gam * gam + (k * PI / n).sin().powi(2);
    let g1 = 2.0 * a(1.0) / gam;
    let g2 = 4.0 * a(1.0) * a(2.0) / (b(1.0) * g1);
    (g1, g2)
}

/// Both tanks resonant at the geometric center of the targets, impedance
/// levels from the Chebyshev prototype scaled to the target spacing and the
/// load resistance `rc`.
pub fn prototype_guess(spec: &SynthesisSpec, rc: f64) -> LadderFilter {
    let f0 = (spec.f_low * spec.f_high).sqrt();
    let w0 = 2.0 * PI * f0;
    let frac = spec.df() / f0;
    let (g1, g2) = chebyshev_g2(PROTOTYPE_RIPPLE_DB);
    LadderFilter {
        l1: frac * rc / (g1 * w0),
        c1: g1 / (frac * w0 * rc),
        l2: g2 * rc / (frac * w0),
        c2: frac / (g2 * rc * w0),
    }
}

/// Exact solutions of the matching conditions: at each target the real part
/// fixes `|X2| = √(Z0/G − Z0²)` and the imaginary part then fixes `B1`, so
/// the system splits into two 2×2 linear solves per sign choice.
pub fn closed_form_branches(spec: &SynthesisSpec, loads: [Complex; 2]) -> Vec<([i8; 2], [f64; 4])> {
    let z0 = spec.z0;
    let freqs = [spec.f_low, spec.f_high];
    let mut out = Vec::new();
    for signs in [[1i8, 1], [1, -1], [-1, 1], [-1, -1]] {
        let mut x2 = [0.0; 2];
        let mut b1 = [0.0; 2];
        let mut ok = true;
        for k in 0..2 {
            let g = loads[k].re;
            let radicand = z0 / g - z0 * z0;
            if !(g > 0.0) || radicand < 0.0 {
                ok = false;
                break;
            }
            x2[k] = f64::from(signs[k]) * radicand.sqrt();
            b1[k] = x2[k] * g / z0 - loads[k].im;
        }
        if !ok {
            continue;
        }
        let (wa, wb) = (2.0 * PI * freqs[0], 2.0 * PI * freqs[1]);
        // v(ω) = ω·p − q/ω at both targets; eliminate q
        let solve = |va: f64, vb: f64| -> (f64, f64) {
            let p = (vb * wb - va * wa) / (wb * wb - wa * wa);
            (p, wa * wa * p - va * wa)
        };
        let (l2, inv_c2) = solve(x2[0], x2[1]);
        let (c1, inv_l1) = solve(b1[0], b1[1]);
        out.push((signs, [1.0 / inv_l1, c1, l2, 1.0 / inv_c2]));
    }
    out
}

fn residual(f: &LadderFilter, spec: &SynthesisSpec, loads: &[Complex; 2]) -> Result<Vector4<f64>> {
    let za = filter_input_impedance(f, loads[0], spec.f_low)? - spec.z0;
    let zb = filter_input_impedance(f, loads[1], spec.f_high)? - spec.z0;
    Ok(Vector4::new(za.re, za.im, zb.re, zb.im))
}

fn jacobian(f: &LadderFilter, spec: &SynthesisSpec, loads: &[Complex; 2]) -> Result<Matrix4<f64>> {
    let mut jac = Matrix4::zeros();
    for (k, (freq, load)) in [(spec.f_low, loads[0]), (spec.f_high, loads[1])].into_iter().enumerate() {
        let w = 2.0 * PI * freq;
        let (y1, _) = filter_branch_immittances(f, freq);
        let node = y1.value() + load;
        if node.norm() < 1e-15 {
            return Err(Error::SingularNode);
        }
        let inv2 = (node * node).inv();
        // derivatives of Zm with respect to L1, C1, L2, C2 (scaled units)
        let d = [
            -Complex::new(0.0, 1.0 / (w * f.l1 * f.l1)) * inv2 * SCALE[0],
            -Complex::new(0.0, w) * inv2 * SCALE[1],
            Complex::new(0.0, w) * SCALE[2],
            Complex::new(0.0, 1.0 / (w * f.c2 * f.c2)) * SCALE[3],
        ];
        for (j, dz) in d.iter().enumerate() {
            jac[(2 * k, j)] = dz.re;
            jac[(2 * k + 1, j)] = dz.im;
        }
    }
    Ok(jac)
}

/// Outcome of one damped Newton run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonResult {
    pub filter: LadderFilter,
    /// Max |Zm − Z0| over both targets, Ω.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn max_abs(v: &Vector4<f64>) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Damped Newton iteration on the four real matching equations, halving the
/// step until the residual norm decreases.
pub fn newton_polish(start: &LadderFilter, spec: &SynthesisSpec, loads: &[Complex; 2]) -> NewtonResult {
    let mut x = start.scaled();
    let mut f = LadderFilter::from_scaled(&x);
    let mut r = match residual(&f, spec, loads) {
        Ok(r) => r,
        Err(_) => {
            return NewtonResult {
                filter: f,
                residual: f64::INFINITY,
                iterations: 0,
                converged: false,
            }
        }
    };
    let mut norm = r.norm();
    for it in 0..MAX_NEWTON_ITERATIONS {
        if max_abs(&r) < 1e-3 * RESIDUAL_TOL {
            return NewtonResult {
                filter: f,
                residual: max_abs(&r),
                iterations: it,
                converged: true,
            };
        }
        let Ok(jac) = jacobian(&f, spec, loads) else { break };
        let Some(step) = jac.lu().solve(&(-r)) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = x + step * lambda;
            let tf = LadderFilter::from_scaled(&trial);
            if let Ok(tr) = residual(&tf, spec, loads) {
                if tr.norm() < norm {
                    x = trial;
                    f = tf;
                    r = tr;
                    norm = tr.norm();
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let res = max_abs(&r);
    NewtonResult {
        filter: f,
        residual: res,
        iterations: MAX_NEWTON_ITERATIONS,
        converged: res < RESIDUAL_TOL,
    }
}

/// A converged, physical solution of the matching conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub filter: LadderFilter,
    pub residual: f64,
    /// Log-space distance to the Chebyshev prototype guess.
    pub prototype_distance: f64,
}

fn log_distance(a: &LadderFilter, b: &LadderFilter) -> f64 {
    a.elements()
        .iter()
        .zip(b.elements())
        .map(|(x, y)| (x / y).ln().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// All distinct physical solutions, sorted by closeness to the prototype.
pub fn synthesis_candidates<F>(yc: &F, spec: &SynthesisSpec) -> Result<Vec<Candidate>>
where
    F: Fn(f64) -> Result<Complex>,
{
    let loads = [yc(spec.f_low)?.conj(), yc(spec.f_high)?.conj()];
    let center_load = yc(spec.fc())?.conj();
    let rc = if center_load.norm() > 0.0 {
        center_load.inv().norm()
    } else {
        spec.z0
    };
    let proto = prototype_guess(spec, rc);

    let mut seeds = vec![proto];
    for (_, v) in closed_form_branches(spec, loads) {
        if v.iter().all(|e| *e > 0.0 && e.is_finite()) {
            seeds.push(LadderFilter {
                l1: v[0],
                c1: v[1],
                l2: v[2],
                c2: v[3],
            });
        }
    }

    let mut found: Vec<Candidate> = Vec::new();
    let mut best_residual = f64::INFINITY;
    let mut non_physical = None;
    for seed in &seeds {
        let n = newton_polish(seed, spec, &loads);
        best_residual = best_residual.min(n.residual);
        if !n.converged {
            continue;
        }
        if n.filter.elements().iter().any(|e| *e <= 0.0) {
            non_physical = Some(n.filter.elements());
            continue;
        }
        if found.iter().any(|c| log_distance(&c.filter, &n.filter) < 1e-6) {
            continue;
        }
        found.push(Candidate {
            filter: n.filter,
            residual: n.residual,
            prototype_distance: log_distance(&n.filter, &proto),
        });
    }
    if found.is_empty() {
        return Err(match non_physical {
            Some(v) => Error::NonPhysical(v),
            None => Error::NoConvergence {
                residual: best_residual,
            },
        });
    }
    found.sort_by(|a, b| a.prototype_distance.total_cmp(&b.prototype_distance));
    Ok(found)
}

/// Element values placing `Zm = Z0` at both targets with the junction side
/// loaded by `conj(Yc)`. `yc` returns the characteristic admittance.
pub fn synthesize_filter<F>(yc: &F, spec: &SynthesisSpec) -> Result<LadderFilter>
where
    F: Fn(f64) -> Result<Complex>,
{
    Ok(synthesis_candidates(yc, spec)?[0].filter)
}

/// Points of the coarse df scan preceding golden-section refinement.
pub const DF_SCAN_POINTS: usize = 33;
pub const DF_GOLDEN_ITERATIONS: usize = 40;

/// Default df search range `[0.01 fm, 1.99 fm]`, inside the open `(0, 2fm)`.
pub fn default_df_range(fm: f64) -> (f64, f64) {
    (0.01 * fm, 1.99 * fm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfOptimum {
    pub df: f64,
    pub bw: f64,
    pub filter: LadderFilter,
}

/// Chooses the matching offset that maximizes the usable bandwidth (IX ≥ β
/// and IL ≤ α) of the composed circulator, with targets `fc ± df/2`.
pub fn optimize_df(
    p: &crate::junction::JunctionParams,
    budget: &SpecBudget,
    df_range: (f64, f64),
) -> Result<DfOptimum> {
    use crate::compose::{best_candidate, DesignContext};

    let (lo, hi) = df_range;
    if !(lo > 0.0 && hi > lo && hi < 2.0 * p.fm) {
        return Err(Error::InvalidSynthesis(format!(
            "df range must lie within (0, 2fm), got [{lo}, {hi}]"
        )));
    }
    let ctx = DesignContext::new(p)?;
    let eval = |df: f64| -> Result<Option<(f64, LadderFilter)>> {
        let spec = SynthesisSpec::centered(ctx.center, df, p.z0)?;
        match best_candidate(&ctx, &spec, budget) {
            Ok(b) => Ok(Some(b)),
            Err(Error::NoConvergence { .. } | Error::NonPhysical(_) | Error::SingularNode) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let objective = |df: f64| -> Result<f64> { Ok(eval(df)?.map_or(0.0, |b| b.0)) };

    let step = (hi - lo) / (DF_SCAN_POINTS - 1) as f64;
    let scan: Vec<f64> = (0..DF_SCAN_POINTS).map(|i| lo + step * i as f64).collect();
    let values = scan.iter().map(|df| objective(*df)).collect::<Result<Vec<f64>>>()?;
    let (imax, vmax) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let a = scan[imax.saturating_sub(1)];
    let b = scan[(imax + 1).min(scan.len() - 1)];
    let (mut df, mut bw) = (scan[imax], vmax);
    if b > a {
        let (x, v) = crate::numeric::golden_section_max(objective, a, b, DF_GOLDEN_ITERATIONS)?;
        if v > bw {
            df = x;
            bw = v;
        }
    }
    if bw <= 0.0 {
        return Err(Error::EmptyFeasibleSet);
    }
    let (bw, filter) = eval(df)?.ok_or(Error::EmptyFeasibleSet)?;
    Ok(DfOptimum { df, bw, filter })
}
