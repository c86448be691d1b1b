//! Junction plus three identical matching filters: closed-form composition,
//! a direct wave-amplitude solve, grid responses and band metrics.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::bound::SpecBudget;
use crate::error::{Error, Result};
use crate::filters::{filter_sparams_with_loss, synthesis_candidates, LadderFilter, SynthesisSpec};
use crate::junction::{center_frequency, characteristic_admittance, junction_s, junction_y, JunctionParams};
use crate::netcore::{Complex, CyclicThreePort, NetworkKind, TwoPortS};

const SINGULAR_DELTA: f64 = 1e-15;

fn port_y0(s: &CyclicThreePort) -> f64 {
    match s.kind {
        NetworkKind::Scattering { y0 } => y0,
        NetworkKind::Admittance => 0.0,
    }
}

/// Combined S-parameters from the loop expansion of the signal-flow graph.
/// The filter's `r` faces the external port, `t` the junction.
///
/// Both three-interface loops are kept: the co-rotating one (`s21³t³`) and
/// the counter-rotating one (`s31³t³`), so the result is exact for any
/// circulant junction, not only near perfect circulation.
pub fn compose_mason(js: &CyclicThreePort, fs: &TwoPortS) -> Result<CyclicThreePort> {
    let (s11, s21, s31) = (js.diag, js.fwd, js.bwd);
    let (r, t, m) = (fs.r, fs.t, fs.m);
    let one = Complex::new(1.0, 0.0);
    let (t2, t3) = (t * t, t * t * t);
    let ring = s21 * s21 * s21 + s31 * s31 * s31;
    let delta1 = one + s11 * s11 * t2 - (s11 * t * 2.0 + s21 * s31 * t2);
    let delta = one - s11 * s11 * s11 * t3 + (s11 * s11 * t2 * 3.0 + s11 * s21 * s31 * t3 * 3.0)
        - (s11 * t * 3.0 + s21 * s31 * t2 * 3.0 + ring * t3);
    if delta.norm() < SINGULAR_DELTA {
        return Err(Error::SingularGraph);
    }
    let m2 = m * m;
    let open = one - s11 * t;
    let d11 = r + m2 * (delta1 * s11 + s21 * s31 * t * open * 2.0 + ring * t2) / delta;
    let d21 = m2 * (s21 * open + s31 * s31 * t) / delta;
    let d31 = m2 * (s31 * open + s21 * s21 * t) / delta;
    Ok(CyclicThreePort::scattering(d11, d21, d31, port_y0(js)))
}

/// Brute-force connection: solves for the six wave amplitudes at the
/// junction–filter interfaces with port 1 excited.
pub fn compose_direct(js: &CyclicThreePort, fs: &TwoPortS) -> Result<CyclicThreePort> {
    let s = js.expand();
    let one = Complex::new(1.0, 0.0);
    // unknowns [a_J (3), b_J (3)]
    let mut a = DMatrix::<Complex>::zeros(6, 6);
    let mut rhs = DVector::<Complex>::zeros(6);
    for i in 0..3 {
        // b_J = S a_J
        a[(i, 3 + i)] = one;
        for j in 0..3 {
            a[(i, j)] = -s[i][j];
        }
        // a_J = t b_J + m a_ext
        a[(3 + i, i)] = one;
        a[(3 + i, 3 + i)] = -fs.t;
    }
    rhs[3] = fs.m;
    let lu = a.lu();
    let x = lu.solve(&rhs).ok_or(Error::SingularGraph)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularGraph);
    }
    let b = |i: usize| fs.m * x[3 + i];
    Ok(CyclicThreePort::scattering(fs.r + b(0), b(1), b(2), port_y0(js)))
}

/// Scattering response of a network over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculatorResponse {
    pub freq_grid: Vec<f64>,
    pub s: Vec<CyclicThreePort>,
    /// The junction's `B = 0` center frequency, Hz.
    pub center: f64,
}

impl CirculatorResponse {
    pub fn new(freq_grid: Vec<f64>, s: Vec<CyclicThreePort>, center: f64) -> Result<Self> {
        validate_grid(&freq_grid)?;
        if s.len() != freq_grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} frequencies but {} S-matrices",
                freq_grid.len(),
                s.len()
            )));
        }
        if !(center >= freq_grid[0] && center <= freq_grid[freq_grid.len() - 1]) {
            return Err(Error::InvalidGrid(format!("center {center} Hz lies outside the grid")));
        }
        Ok(Self { freq_grid, s, center })
    }

    pub fn il_db(&self) -> Vec<f64> {
        self.s.iter().map(|s| to_db(s.fwd)).collect()
    }

    pub fn ix_db(&self) -> Vec<f64> {
        self.s.iter().map(|s| to_db(s.bwd)).collect()
    }

    pub fn rl_db(&self) -> Vec<f64> {
        self.s.iter().map(|s| to_db(s.diag)).collect()
    }
}

/// `−20 log10 |x|`.
pub fn to_db(x: Complex) -> f64 {
    -20.0 * x.norm().log10()
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("need at least two frequencies".into()));
    }
    if grid.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(Error::InvalidGrid("frequencies must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("frequencies must increase strictly".into()));
    }
    Ok(())
}

pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) {
        return Err(Error::InvalidGrid(format!("bad grid [{lo}, {hi}] with {points} points")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let g: Vec<f64> = (0..points)
        .map(|i| if i == points - 1 { hi } else { lo + step * i as f64 })
        .collect();
    validate_grid(&g)?;
    Ok(g)
}

pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Default grid half-width in units of fm.
pub const DEFAULT_GRID_SPAN: f64 = 1.5;

pub fn default_grid(center: f64, fm: f64) -> Result<Vec<f64>> {
    let half = DEFAULT_GRID_SPAN * fm;
    linear_grid(center - half, center + half, DEFAULT_GRID_POINTS)
}

/// Bare-junction response with 50 Ω (i.e. `z0`) terminations.
pub fn junction_response(p: &JunctionParams, grid: Vec<f64>, center: f64) -> Result<CirculatorResponse> {
    let s = grid
        .par_iter()
        .map(|f| junction_s(p, *f))
        .collect::<Result<Vec<_>>>()?;
    CirculatorResponse::new(grid, s, center)
}

/// Junction response with every port behind `filter` (optionally lossy).
pub fn compose_response(
    junction: &CirculatorResponse,
    filter: &LadderFilter,
    filter_q: Option<f64>,
) -> Result<CirculatorResponse> {
    let z0 = match junction.s.first().map(|s| s.kind) {
        Some(NetworkKind::Scattering { y0 }) => 1.0 / y0,
        _ => return Err(Error::InvalidGrid("junction response must hold S-parameters".into())),
    };
    let s = junction
        .freq_grid
        .par_iter()
        .zip(junction.s.par_iter())
        .map(|(f, js)| compose_mason(js, &filter_sparams_with_loss(filter, z0, *f, filter_q)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CirculatorResponse {
        freq_grid: junction.freq_grid.clone(),
        s,
        center: junction.center,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandMetrics {
    /// Band width over the center frequency.
    pub bw_frac: f64,
    pub band: (f64, f64),
    /// Min / max IL over the band, dB.
    pub il_range_db: (f64, f64),
    /// Worst isolation in the band, dB.
    pub ix_min_db: f64,
    /// Worst return loss in the band, dB.
    pub rl_min_db: f64,
    pub center: f64,
    pub il_center_db: f64,
    pub ix_center_db: f64,
    pub rl_center_db: f64,
    /// Band also restricted to IL ≤ α.
    pub il_limited: bool,
}

fn interp_at(grid: &[f64], v: &[f64], x: f64) -> f64 {
    let k = grid.partition_point(|f| *f <= x).clamp(1, grid.len() - 1);
    let (f0, f1) = (grid[k - 1], grid[k]);
    v[k - 1] + (v[k] - v[k - 1]) * (x - f0) / (f1 - f0)
}

/// Contiguous interval around `center` where `margin ≥ 0`, with edges
/// interpolated linearly between grid points. `None` if the center fails.
fn band_around(grid: &[f64], margin: &[f64], center: f64) -> Option<(f64, f64)> {
    let mc = interp_at(grid, margin, center);
    if mc < 0.0 {
        return None;
    }
    let k = grid.partition_point(|f| *f <= center);
    let edge = |good: (f64, f64), bad: (f64, f64)| good.0 + (bad.0 - good.0) * good.1 / (good.1 - bad.1);

    let mut lo = grid[0];
    let mut good = (center, mc);
    for i in (0..k).rev() {
        if margin[i] < 0.0 {
            lo = edge(good, (grid[i], margin[i]));
            break;
        }
        good = (grid[i], margin[i]);
    }
    let mut hi = grid[grid.len() - 1];
    let mut good = (center, mc);
    for i in k..grid.len() {
        if margin[i] < 0.0 {
            hi = edge(good, (grid[i], margin[i]));
            break;
        }
        good = (grid[i], margin[i]);
    }
    Some((lo, hi))
}

/// β-isolation band around the center and the metrics within it.
pub fn extract_metrics(resp: &CirculatorResponse, alpha_db: f64, beta_db: f64) -> Result<BandMetrics> {
    extract_metrics_with(resp, alpha_db, beta_db, false)
}

/// As [`extract_metrics`], optionally intersecting the band with IL ≤ α.
pub fn extract_metrics_with(
    resp: &CirculatorResponse,
    alpha_db: f64,
    beta_db: f64,
    il_limited: bool,
) -> Result<BandMetrics> {
    let grid = &resp.freq_grid;
    let (il, ix, rl) = (resp.il_db(), resp.ix_db(), resp.rl_db());
    let ix_margin: Vec<f64> = ix.iter().map(|v| v - beta_db).collect();
    let (mut lo, mut hi) = band_around(grid, &ix_margin, resp.center).ok_or(Error::NoBand { beta_db })?;
    if il_limited {
        let il_margin: Vec<f64> = il.iter().map(|v| alpha_db - v).collect();
        let (a, b) = band_around(grid, &il_margin, resp.center).ok_or(Error::NoBand { beta_db })?;
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let c = resp.center;
    let (il_c, ix_c, rl_c) = (interp_at(grid, &il, c), interp_at(grid, &ix, c), interp_at(grid, &rl, c));
    let mut il_range = (il_c, il_c);
    let (mut ix_min, mut rl_min) = (ix_c, rl_c);
    for i in 0..grid.len() {
        if grid[i] > lo && grid[i] < hi {
            il_range = (il_range.0.min(il[i]), il_range.1.max(il[i]));
            ix_min = ix_min.min(ix[i]);
            rl_min = rl_min.min(rl[i]);
        }
    }
    Ok(BandMetrics {
        bw_frac: (hi - lo) / c,
        band: (lo, hi),
        il_range_db: il_range,
        ix_min_db: ix_min,
        rl_min_db: rl_min,
        center: c,
        il_center_db: il_c,
        ix_center_db: ix_c,
        rl_center_db: rl_c,
        il_limited,
    })
}

/// Local isolation maxima above `min_ix_db`, refined by a parabola through
/// the three neighbouring dB samples.
pub fn find_notches(resp: &CirculatorResponse, min_ix_db: f64) -> Vec<f64> {
    let ix = resp.ix_db();
    let g = &resp.freq_grid;
    let mut out = Vec::new();
    for i in 1..g.len().saturating_sub(1) {
        if ix[i] > min_ix_db && ix[i] > ix[i - 1] && ix[i] >= ix[i + 1] {
            let (y0, y1, y2) = (ix[i - 1], ix[i], ix[i + 1]);
            let curv = y0 - 2.0 * y1 + y2;
            let shift = if curv < 0.0 { 0.5 * (y0 - y2) / curv } else { 0.0 };
            let h = if shift >= 0.0 { g[i + 1] - g[i] } else { g[i] - g[i - 1] };
            out.push(g[i] + shift.clamp(-0.5, 0.5) * h);
        }
    }
    out
}

/// Junction data shared by every synthesis/composition trial.
#[derive(Debug, Clone)]
pub struct DesignContext {
    pub params: JunctionParams,
    /// `B = 0` center, Hz.
    pub center: f64,
    pub junction: CirculatorResponse,
}

impl DesignContext {
    /// Default 2001-point grid over `center ± 1.5 fm`.
    pub fn new(p: &JunctionParams) -> Result<Self> {
        let center = center_frequency(p)?;
        Self::with_grid(p, default_grid(center, p.fm)?)
    }

    pub fn with_grid(p: &JunctionParams, grid: Vec<f64>) -> Result<Self> {
        let center = center_frequency(p)?;
        Ok(Self {
            params: *p,
            center,
            junction: junction_response(p, grid, center)?,
        })
    }

    pub fn yc(&self, f: f64) -> Result<Complex> {
        Ok(characteristic_admittance(&junction_y(&self.params, f)?)?.value())
    }
}

/// A synthesized, composed and measured design.
#[derive(Debug, Clone)]
pub struct Design {
    pub spec: SynthesisSpec,
    pub filter: LadderFilter,
    pub response: CirculatorResponse,
    /// `None` when isolation never reaches β around the center.
    pub metrics: Option<BandMetrics>,
    /// Width of the band that also keeps IL ≤ α, over the center; what
    /// candidate selection and the df optimizer maximize.
    pub usable_bw: f64,
}

impl Design {
    pub fn bw(&self) -> f64 {
        self.metrics.map_or(0.0, |m| m.bw_frac)
    }
}

/// Synthesizes every candidate filter for `spec` and keeps the one with the
/// widest band meeting both IX ≥ β and IL ≤ α (first candidate on ties). The
/// IX-only band alone would reward candidates that isolate by reflecting.
pub fn design_for_spec(
    ctx: &DesignContext,
    spec: &SynthesisSpec,
    budget: &SpecBudget,
    filter_q: Option<f64>,
) -> Result<Design> {
    let yc = |f: f64| ctx.yc(f);
    let mut best: Option<Design> = None;
    for cand in synthesis_candidates(&yc, spec)? {
        let response = compose_response(&ctx.junction, &cand.filter, filter_q)?;
        let metrics = match extract_metrics(&response, budget.alpha_db, budget.beta_db) {
            Ok(m) => Some(m),
            Err(Error::NoBand { .. }) => None,
            Err(e) => return Err(e),
        };
        let usable_bw = match extract_metrics_with(&response, budget.alpha_db, budget.beta_db, true) {
            Ok(m) => m.bw_frac,
            Err(Error::NoBand { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        let d = Design {
            spec: *spec,
            filter: cand.filter,
            response,
            metrics,
            usable_bw,
        };
        if best.as_ref().is_none_or(|b| d.usable_bw > b.usable_bw) {
            best = Some(d);
        }
    }
    best.ok_or(Error::EmptyFeasibleSet)
}

/// Usable bandwidth and filter of the best lossless candidate for `spec`.
pub fn best_candidate(ctx: &DesignContext, spec: &SynthesisSpec, budget: &SpecBudget) -> Result<(f64, LadderFilter)> {
    let d = design_for_spec(ctx, spec, budget, None)?;
    Ok((d.usable_bw, d.filter))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn through_filter_is_transparent() {
        let js = CyclicThreePort::scattering(c(0.1, 0.2), c(0.7, -0.1), c(0.05, 0.3), 0.02);
        for out in [
            compose_mason(&js, &TwoPortS::through()).unwrap(),
            compose_direct(&js, &TwoPortS::through()).unwrap(),
        ] {
            assert!((out.diag - js.diag).norm() < 1e-15);
            assert!((out.fwd - js.fwd).norm() < 1e-15);
            assert!((out.bwd - js.bwd).norm() < 1e-15);
        }
    }

    #[test]
    fn reflecting_filter_isolates_ports() {
        let js = CyclicThreePort::scattering(c(0.1, 0.2), c(0.7, -0.1), c(0.05, 0.3), 0.02);
        let fs = TwoPortS {
            r: c(0.6, 0.8),
            t: c(-0.8, 0.6),
            m: c(0.0, 0.0),
        };
        for out in [compose_mason(&js, &fs).unwrap(), compose_direct(&js, &fs).unwrap()] {
            assert!((out.diag - fs.r).norm() < 1e-15);
            assert_eq!(out.fwd.norm(), 0.0);
            assert_eq!(out.bwd.norm(), 0.0);
        }
    }

    #[test]
    fn mason_matches_direct_on_a_lossy_case() {
        let js = CyclicThreePort::scattering(c(0.2, -0.1), c(0.5, 0.4), c(-0.2, 0.1), 0.02);
        let fs = TwoPortS {
            r: c(0.3, 0.1),
            t: c(-0.2, 0.4),
            m: c(0.6, -0.5),
        };
        let a = compose_mason(&js, &fs).unwrap();
        let b = compose_direct(&js, &fs).unwrap();
        assert!((a.diag - b.diag).norm() < 1e-13, "{a:?} {b:?}");
        assert!((a.fwd - b.fwd).norm() < 1e-13);
        assert!((a.bwd - b.bwd).norm() < 1e-13);
    }

    #[test]
    fn ideal_circulator_needs_no_counter_loop() {
        // with s31 = 0 the counter-rotating loop vanishes and the shorter
        // co-rotating-only expansion is exact
        let js = CyclicThreePort::scattering(c(0.1, 0.05), c(0.8, 0.3), c(0.0, 0.0), 0.02);
        let fs = TwoPortS {
            r: c(0.3, 0.1),
            t: c(-0.2, 0.4),
            m: c(0.6, -0.5),
        };
        let (s11, s21, t, m) = (js.diag, js.fwd, fs.t, fs.m);
        let one = c(1.0, 0.0);
        let d = one - s11 * t * 3.0 + s11 * s11 * t * t * 3.0 - s11 * s11 * s11 * t * t * t - s21 * s21 * s21 * t * t * t;
        let s11_short = fs.r + ((one - s11 * t).powi(2) * s11 + s21 * s21 * s21 * t * t) * m * m / d;
        let out = compose_mason(&js, &fs).unwrap();
        assert!((out.diag - s11_short).norm() < 1e-14);
    }

    #[test]
    fn brickwall_band() {
        let grid = linear_grid(0.8e9, 1.2e9, 400_001).unwrap();
        let s = grid
            .iter()
            .map(|f| {
                let s31 = if (0.95e9..=1.05e9).contains(f) { 10f64.powf(-1.5) } else { 1.0 };
                CyclicThreePort::scattering(c(0.0, 0.0), c(0.0, 0.0), c(s31, 0.0), 0.02)
            })
            .collect();
        let resp = CirculatorResponse::new(grid, s, 1e9).unwrap();
        let m = extract_metrics(&resp, 3.0, 20.0).unwrap();
        assert!((m.bw_frac - 0.1).abs() < 1e-6, "{}", m.bw_frac);
        assert!(m.ix_min_db >= 20.0);
    }

    #[test]
    fn no_band_when_isolation_is_poor() {
        let grid = linear_grid(0.9e9, 1.1e9, 11).unwrap();
        let s = grid
            .iter()
            .map(|_| CyclicThreePort::scattering(c(0.0, 0.0), c(0.9, 0.0), c(0.3, 0.0), 0.02))
            .collect();
        let resp = CirculatorResponse::new(grid, s, 1e9).unwrap();
        assert!(matches!(extract_metrics(&resp, 3.0, 20.0), Err(Error::NoBand { .. })));
    }

    #[test]
    fn grid_validation() {
        assert!(CirculatorResponse::new(vec![1.0, 1.0], vec![], 1.0).is_err());
        assert!(linear_grid(2.0, 1.0, 10).is_err());
    }
}
