//! Bandwidth-bound map over modulation frequency and depth.
//!
//! `fm_ratio` is normalized to the modulated tank resonance `√σ · f0`, which
//! is (to within a fraction of a percent) the circulator center.

use rayon::prelude::*;

use crate::bound::{global_bound, SpecBudget};
use crate::error::{Error, Result};
use crate::junction::{
    center_frequency, characteristic_admittance, junction_y, yc_terminated_insertion_loss, JunctionParams,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub fm_ratios: Vec<f64>,
    pub dc_ratios: Vec<f64>,
    pub budget: SpecBudget,
    /// Supplies L0, C0, Q0 and Z0; its modulation settings are ignored.
    pub base: JunctionParams,
}

pub const DEFAULT_AXIS_POINTS: usize = 60;
pub const DEFAULT_FM_RANGE: (f64, f64) = (0.01, 0.30);
pub const DEFAULT_DC_RANGE: (f64, f64) = (0.02, 0.95);

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

impl SweepGrid {
    pub fn new(fm_ratios: Vec<f64>, dc_ratios: Vec<f64>, budget: SpecBudget, base: JunctionParams) -> Result<Self> {
        let check = |v: &[f64], hi: f64, name: &str| -> Result<()> {
            if v.is_empty() {
                return Err(Error::InvalidGrid(format!("{name} axis is empty")));
            }
            if v.iter().any(|x| !(*x > 0.0 && *x < hi)) {
                return Err(Error::InvalidGrid(format!("{name} values must lie in (0, {hi})")));
            }
            if v.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidGrid(format!("{name} values must increase strictly")));
            }
            Ok(())
        };
        check(&fm_ratios, 0.5, "fm_ratio")?;
        check(&dc_ratios, 1.0, "dc_ratio")?;
        Ok(Self {
            fm_ratios,
            dc_ratios,
            budget,
            base,
        })
    }

    /// Uniform axes with `fm_points × dc_points` cells.
    pub fn uniform(
        fm_range: (f64, f64),
        fm_points: usize,
        dc_range: (f64, f64),
        dc_points: usize,
        budget: SpecBudget,
        base: JunctionParams,
    ) -> Result<Self> {
        if fm_points == 0 || dc_points == 0 {
            return Err(Error::InvalidGrid("axes need at least one point".into()));
        }
        Self::new(
            linspace(fm_range.0, fm_range.1, fm_points),
            linspace(dc_range.0, dc_range.1, dc_points),
            budget,
            base,
        )
    }

    /// 60 × 60 cells over fm/f0 ∈ [0.01, 0.30], ΔC/C0 ∈ [0.02, 0.95].
    pub fn default_for(base: JunctionParams, budget: SpecBudget) -> Self {
        Self::uniform(
            DEFAULT_FM_RANGE,
            DEFAULT_AXIS_POINTS,
            DEFAULT_DC_RANGE,
            DEFAULT_AXIS_POINTS,
            budget,
            base,
        )
        .expect("default axes are valid")
    }

    /// Junction for one cell.
    pub fn params(&self, fm_ratio: f64, dc_ratio: f64) -> Result<JunctionParams> {
        let p = self.base.with_dc_ratio(dc_ratio)?;
        let fm = fm_ratio * p.f_resonance();
        p.with_fm(fm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub fm_ratio: f64,
    pub dc_ratio: f64,
    pub feasible: bool,
    /// Global bound, present iff feasible.
    pub bound_frac: Option<f64>,
    pub bode_fano: Option<f64>,
    pub modulation_limit: Option<f64>,
    /// `B = 0` center, Hz.
    pub center: Option<f64>,
    /// Center IL of the `Yc`-terminated junction, dB.
    pub il_db: Option<f64>,
    /// Why the cell is infeasible.
    pub reason: Option<String>,
}

impl SweepCell {
    fn empty(fm_ratio: f64, dc_ratio: f64) -> Self {
        Self {
            fm_ratio,
            dc_ratio,
            feasible: false,
            bound_frac: None,
            bode_fano: None,
            modulation_limit: None,
            center: None,
            il_db: None,
            reason: None,
        }
    }
}

/// Feasible iff the characteristic admittance has a single `B = 0` crossing
/// with `G > 0`, the `Yc`-terminated junction meets the IL ceiling there, and
/// the bound itself can be evaluated.
pub fn evaluate_cell(grid: &SweepGrid, fm_ratio: f64, dc_ratio: f64) -> SweepCell {
    let mut cell = SweepCell::empty(fm_ratio, dc_ratio);
    let fail = |mut c: SweepCell, why: String| {
        c.reason = Some(why);
        c
    };
    let p = match grid.params(fm_ratio, dc_ratio) {
        Ok(p) => p,
        Err(e) => return fail(cell, e.to_string()),
    };
    let fc = match center_frequency(&p) {
        Ok(f) => f,
        Err(e) => return fail(cell, e.to_string()),
    };
    cell.center = Some(fc);
    let g = junction_y(&p, fc).and_then(|y| characteristic_admittance(&y));
    match g {
        Ok(y) if y.g() > 0.0 => {}
        Ok(_) => return fail(cell, "characteristic conductance is not positive at the center".into()),
        Err(e) => return fail(cell, e.to_string()),
    }
    let il = match yc_terminated_insertion_loss(&p, fc) {
        Ok(v) => v,
        Err(e) => return fail(cell, e.to_string()),
    };
    cell.il_db = Some(il);
    if il > grid.budget.alpha_db {
        return fail(cell, format!("center IL {il:.3} dB exceeds {} dB", grid.budget.alpha_db));
    }
    match global_bound(&p, &grid.budget) {
        Ok(b) => {
            cell.feasible = true;
            cell.bound_frac = Some(b.value());
            cell.bode_fano = Some(b.bode_fano);
            cell.modulation_limit = Some(b.modulation_limit);
            cell
        }
        Err(e) => fail(cell, e.to_string()),
    }
}

/// Cells indexed `[fm row][dc column]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMap {
    pub fm_ratios: Vec<f64>,
    pub dc_ratios: Vec<f64>,
    pub cells: Vec<Vec<SweepCell>>,
}

impl SweepMap {
    pub fn iter(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().flatten()
    }

    /// Cell closest to `(fm_ratio, dc_ratio)` on the grid.
    pub fn nearest(&self, fm_ratio: f64, dc_ratio: f64) -> &SweepCell {
        let idx = |axis: &[f64], x: f64| {
            axis.iter()
                .enumerate()
                .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0)
        };
        &self.cells[idx(&self.fm_ratios, fm_ratio)][idx(&self.dc_ratios, dc_ratio)]
    }
}

/// Evaluates every cell in parallel; ordering follows the grid indices.
pub fn run_sweep(grid: &SweepGrid) -> SweepMap {
    let n_dc = grid.dc_ratios.len();
    let flat: Vec<SweepCell> = (0..grid.fm_ratios.len() * n_dc)
        .into_par_iter()
        .map(|i| evaluate_cell(grid, grid.fm_ratios[i / n_dc], grid.dc_ratios[i % n_dc]))
        .collect();
    let cells = flat.chunks(n_dc).map(|row| row.to_vec()).collect();
    SweepMap {
        fm_ratios: grid.fm_ratios.clone(),
        dc_ratios: grid.dc_ratios.clone(),
        cells,
    }
}

/// Bounds within this relative distance of the row maximum count as ties,
/// resolved toward the smallest modulation depth.
pub const TIE_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusPoint {
    pub fm_ratio: f64,
    pub dc_ratio: f64,
    pub bound: f64,
}

fn clamped(c: &SweepCell) -> bool {
    matches!((c.bode_fano, c.modulation_limit), (Some(bf), Some(ml)) if bf >= ml)
}

/// Smallest depth reaching the best bound of a row. Cells limited by `2fm`
/// all tie with a `2fm`-limited maximum: their bounds differ only through the
/// small drift of the center frequency with depth.
pub fn row_optimum(map: &SweepMap, row: usize) -> Result<LocusPoint> {
    let cells = &map.cells[row];
    let best = cells
        .iter()
        .filter(|c| c.bound_frac.is_some())
        .max_by(|a, b| a.bound_frac.unwrap_or(0.0).total_cmp(&b.bound_frac.unwrap_or(0.0)))
        .ok_or(Error::EmptyRow(map.fm_ratios[row]))?;
    let best_bound = best.bound_frac.unwrap_or(0.0);
    let best_clamped = clamped(best);
    let c = cells
        .iter()
        .find(|c| match c.bound_frac {
            Some(b) => b >= best_bound * (1.0 - TIE_REL_TOL) || (best_clamped && clamped(c)),
            None => false,
        })
        .unwrap_or(best);
    Ok(LocusPoint {
        fm_ratio: c.fm_ratio,
        dc_ratio: c.dc_ratio,
        bound: c.bound_frac.unwrap_or(best_bound),
    })
}

/// Optimal depth for every row that has a feasible cell; empty rows are
/// logged and skipped.
pub fn optimal_locus(map: &SweepMap) -> Vec<LocusPoint> {
    (0..map.cells.len())
        .filter_map(|row| match row_optimum(map, row) {
            Ok(p) => Some(p),
            Err(e) => {
                log::info!("{e}");
                None
            }
        })
        .collect()
}

/// Rows whose feasible cells do not form one contiguous depth interval.
pub fn contiguity_violations(map: &SweepMap) -> Vec<f64> {
    let mut out = Vec::new();
    for (row, cells) in map.cells.iter().enumerate() {
        let runs = cells
            .windows(2)
            .filter(|w| w[1].feasible && !w[0].feasible)
            .count()
            + usize::from(cells.first().is_some_and(|c| c.feasible));
        if runs > 1 {
            log::warn!("fm_ratio {}: feasible depths split into {runs} intervals", map.fm_ratios[row]);
            out.push(map.fm_ratios[row]);
        }
    }
    out
}
