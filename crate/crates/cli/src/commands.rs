use std::fmt::Write as _;

use stmcirc_core::bound::{global_bound, reflection_budget, SpecBudget};
use stmcirc_core::compose::{
    default_grid, design_for_spec, extract_metrics, find_notches, junction_response, linear_grid, BandMetrics,
    CirculatorResponse, Design, DesignContext,
};
use stmcirc_core::filters::{default_df_range, optimize_df, SynthesisSpec};
use stmcirc_core::junction::{center_frequency, characteristic_admittance, junction_y};
use stmcirc_core::netcore::Complex;
use stmcirc_core::sweep::{contiguity_violations, optimal_locus, run_sweep, SweepGrid};

use crate::config::DesignConfig;
use crate::svg::{LineChart, Series};
use crate::table::{locus_to_csv, map_to_csv, to_csv};
use crate::touchstone::S3p;
use crate::verify::{run_checks, Status};
use crate::{CliError, Format, Outputs};

/// Notches deeper than this are listed in design reports, dB.
pub const NOTCH_FLOOR_DB: f64 = 40.0;

fn analysis_grid(cfg: &DesignConfig, center: f64) -> Result<Vec<f64>, CliError> {
    match cfg.grid {
        Some(g) => linear_grid(g.f_start, g.f_stop, g.points),
        None => default_grid(center, cfg.junction.fm),
    }
    .map_err(CliError::numeric("analysis grid"))
}

fn budget(cfg: &DesignConfig) -> Result<SpecBudget, CliError> {
    reflection_budget(cfg.alpha_db, cfg.beta_db).map_err(CliError::numeric("specifications"))
}

fn db(z: Complex) -> f64 {
    20.0 * z.norm().log10()
}

fn deg(z: Complex) -> f64 {
    z.arg().to_degrees()
}

fn sparam_csv(resp: &CirculatorResponse) -> String {
    let rows: Vec<Vec<String>> = resp
        .freq_grid
        .iter()
        .zip(&resp.s)
        .map(|(f, s)| {
            let mut r = vec![f.to_string()];
            for z in [s.diag, s.fwd, s.bwd] {
                r.extend([z.re.to_string(), z.im.to_string(), db(z).to_string(), deg(z).to_string()]);
            }
            r
        })
        .collect();
    to_csv(
        &[
            "f_Hz", "s11_re", "s11_im", "s11_dB", "s11_deg", "s21_re", "s21_im", "s21_dB", "s21_deg", "s31_re",
            "s31_im", "s31_dB", "s31_deg",
        ],
        &rows,
    )
}

fn curves(resp: &CirculatorResponse, pick: fn(Complex) -> f64) -> Vec<Series> {
    ["s11", "s21", "s31"]
        .iter()
        .enumerate()
        .map(|(k, name)| Series {
            name: (*name).to_string(),
            points: resp
                .freq_grid
                .iter()
                .zip(&resp.s)
                .map(|(f, s)| (f / 1e9, pick([s.diag, s.fwd, s.bwd][k])))
                .collect(),
        })
        .collect()
}

fn magnitude_chart(title: &str, resp: &CirculatorResponse) -> String {
    LineChart {
        title: title.into(),
        x_label: "frequency (GHz)".into(),
        y_label: "|S| (dB)".into(),
        y_range: Some((-40.0, 0.0)),
        series: curves(resp, db),
    }
    .render()
}

fn write_response(out: &mut Outputs, stem: &str, title: &str, resp: &CirculatorResponse, z0: f64) -> Result<(), CliError> {
    let s3p = S3p::from_cyclic(&resp.freq_grid, &resp.s, z0);
    out.write(Some(Format::S3p), &format!("{stem}.s3p"), &s3p.render(&[title]))?;
    out.write(Some(Format::Csv), &format!("{stem}_sparams.csv"), &sparam_csv(resp))?;
    out.write(Some(Format::Svg), &format!("{stem}_mag.svg"), &magnitude_chart(title, resp))?;
    Ok(())
}

fn metrics_lines(m: &BandMetrics) -> Vec<(&'static str, f64)> {
    vec![
        ("center_Hz", m.center),
        ("bw_frac", m.bw_frac),
        ("band_low_Hz", m.band.0),
        ("band_high_Hz", m.band.1),
        ("il_min_dB", m.il_range_db.0),
        ("il_max_dB", m.il_range_db.1),
        ("ix_min_dB", m.ix_min_db),
        ("rl_min_dB", m.rl_min_db),
        ("il_center_dB", m.il_center_db),
        ("ix_center_dB", m.ix_center_db),
        ("rl_center_dB", m.rl_center_db),
    ]
}

fn kv_csv(pairs: &[(&str, f64)]) -> String {
    let rows: Vec<Vec<String>> = pairs.iter().map(|(k, v)| vec![k.to_string(), v.to_string()]).collect();
    to_csv(&["quantity", "value"], &rows)
}

/// `junction`: bare junction S-parameters and characteristic admittance.
pub fn cmd_junction(cfg: &DesignConfig, out: &mut Outputs) -> Result<String, CliError> {
    let p = cfg.junction;
    let center = match center_frequency(&p) {
        Ok(f) => Some(f),
        Err(e) => {
            log::warn!("no B = 0 center ({e}); using the modulated tank resonance");
            None
        }
    };
    let reference = center.unwrap_or_else(|| p.f_resonance());
    let grid = analysis_grid(cfg, reference)?;
    let reference = reference.clamp(grid[0], grid[grid.len() - 1]);
    let resp = junction_response(&p, grid, reference).map_err(CliError::numeric("junction response"))?;
    write_response(out, "junction", "junction S-parameters", &resp, p.z0)?;

    let yc = resp
        .freq_grid
        .iter()
        .map(|f| Ok(characteristic_admittance(&junction_y(&p, *f)?)?.value()))
        .collect::<stmcirc_core::Result<Vec<Complex>>>()
        .map_err(CliError::numeric("characteristic admittance"))?;
    let rows: Vec<Vec<String>> = resp
        .freq_grid
        .iter()
        .zip(&yc)
        .map(|(f, y)| vec![f.to_string(), y.re.to_string(), y.im.to_string()])
        .collect();
    out.write(Some(Format::Csv), "yc.csv", &to_csv(&["f_Hz", "G_S", "B_S"], &rows))?;
    let y0 = p.y0();
    let norm = |pick: fn(&Complex) -> f64| -> Vec<(f64, f64)> {
        resp.freq_grid.iter().zip(&yc).map(|(f, y)| (f / 1e9, pick(y) / y0)).collect()
    };
    let chart = LineChart {
        title: "characteristic admittance".into(),
        x_label: "frequency (GHz)".into(),
        y_label: "Yc / Y0".into(),
        y_range: Some((-3.0, 3.0)),
        series: vec![
            Series {
                name: "G/Y0".into(),
                points: norm(|y| y.re),
            },
            Series {
                name: "B/Y0".into(),
                points: norm(|y| y.im),
            },
        ],
    };
    out.write(Some(Format::Svg), "yc.svg", &chart.render())?;

    let mut r = String::new();
    match center {
        Some(fc) => {
            let y = characteristic_admittance(&junction_y(&p, fc).map_err(CliError::numeric("junction"))?)
                .map_err(CliError::numeric("characteristic admittance"))?;
            let _ = writeln!(r, "center (B = 0)      {:.6} MHz", fc / 1e6);
            let _ = writeln!(r, "G/Y0, B/Y0          {:.4}, {:.2e}", y.g() / y0, y.b() / y0);
            match extract_metrics(&resp, cfg.alpha_db, cfg.beta_db) {
                Ok(m) => {
                    let _ = writeln!(r, "IL / IX / RL        {:.3} / {:.2} / {:.2} dB", m.il_center_db, m.ix_center_db, m.rl_center_db);
                    let _ = writeln!(r, "{} dB-IX bandwidth   {:.3} %", cfg.beta_db, 100.0 * m.bw_frac);
                    out.write(Some(Format::Csv), "junction_metrics.csv", &kv_csv(&metrics_lines(&m)))?;
                }
                Err(e) => {
                    let _ = writeln!(r, "metrics unavailable: {e}");
                }
            }
        }
        None => {
            let _ = writeln!(r, "no B = 0 center within f_r +- fm/2");
        }
    }
    Ok(r)
}

/// Synthesis context, chosen design and the optimized offset (if any).
pub fn build_design(cfg: &DesignConfig) -> Result<(DesignContext, Design, Option<f64>), CliError> {
    let p = cfg.junction;
    let b = budget(cfg)?;
    let center = center_frequency(&p).map_err(CliError::numeric("center frequency"))?;
    let ctx = DesignContext::with_grid(&p, analysis_grid(cfg, center)?).map_err(CliError::numeric("junction"))?;
    let (spec, optimized) = match cfg.df {
        Some(df) => (
            SynthesisSpec::centered(cfg.f_center.unwrap_or(ctx.center), df, p.z0),
            None,
        ),
        None => {
            let o = optimize_df(&p, &b, default_df_range(p.fm)).map_err(CliError::numeric("df optimization"))?;
            (SynthesisSpec::centered(ctx.center, o.df, p.z0), Some(o.df))
        }
    };
    let spec = spec.map_err(CliError::numeric("synthesis targets"))?;
    let design = design_for_spec(&ctx, &spec, &b, cfg.filter_q).map_err(CliError::numeric("synthesis"))?;
    Ok((ctx, design, optimized))
}

/// `design`: matching synthesis, composition and band metrics.
pub fn cmd_design(cfg: &DesignConfig, out: &mut Outputs) -> Result<String, CliError> {
    let (_, design, optimized) = build_design(cfg)?;
    let m = design.metrics.ok_or(CliError::Numeric {
        context: "metrics",
        source: stmcirc_core::Error::NoBand { beta_db: cfg.beta_db },
    })?;
    let notches = find_notches(&design.response, NOTCH_FLOOR_DB);
    write_response(out, "design", "matched circulator S-parameters", &design.response, cfg.junction.z0)?;
    let phase = LineChart {
        title: "matched circulator phase".into(),
        x_label: "frequency (GHz)".into(),
        y_label: "phase (deg)".into(),
        y_range: Some((-180.0, 180.0)),
        series: curves(&design.response, deg),
    };
    out.write(Some(Format::Svg), "design_phase.svg", &phase.render())?;

    let f = design.filter;
    let elements = [("L1_H", f.l1), ("C1_F", f.c1), ("L2_H", f.l2), ("C2_F", f.c2)];
    out.write(Some(Format::Csv), "elements.csv", &kv_csv(&elements))?;
    let mut pairs = metrics_lines(&m);
    pairs.push(("usable_bw_frac", design.usable_bw));
    pairs.push(("df_Hz", design.spec.df()));
    pairs.push(("f_low_Hz", design.spec.f_low));
    pairs.push(("f_high_Hz", design.spec.f_high));
    out.write(Some(Format::Csv), "metrics.csv", &kv_csv(&pairs))?;

    let mut r = String::new();
    let _ = writeln!(r, "matching filter (k = 1 shunt tank at the junction, k = 2 series tank at the port)");
    let _ = writeln!(r, "  L1 = {:.4} nH   C1 = {:.4} pF", f.l1 * 1e9, f.c1 * 1e12);
    let _ = writeln!(r, "  L2 = {:.4} nH   C2 = {:.4} pF", f.l2 * 1e9, f.c2 * 1e12);
    let _ = writeln!(
        r,
        "matched at {:.3} / {:.3} MHz (df = {:.3} MHz{})",
        design.spec.f_low / 1e6,
        design.spec.f_high / 1e6,
        design.spec.df() / 1e6,
        if optimized.is_some() { ", optimized" } else { "" }
    );
    let _ = writeln!(r, "center              {:.6} MHz", m.center / 1e6);
    let _ = writeln!(
        r,
        "{} dB-IX band        {:.3} - {:.3} MHz ({:.3} %)",
        cfg.beta_db,
        m.band.0 / 1e6,
        m.band.1 / 1e6,
        100.0 * m.bw_frac
    );
    let _ = writeln!(r, "in-band IL          {:.3} - {:.3} dB", m.il_range_db.0, m.il_range_db.1);
    let _ = writeln!(r, "band with IL <= {} dB {:.3} %", cfg.alpha_db, 100.0 * design.usable_bw);
    let _ = writeln!(r, "in-band IX, RL min  {:.2} dB, {:.2} dB", m.ix_min_db, m.rl_min_db);
    let list: Vec<String> = notches.iter().map(|n| format!("{:.3}", n / 1e6)).collect();
    let _ = writeln!(r, "isolation notches   {} MHz", list.join(", "));
    out.write(None, "metrics.txt", &r)?;
    Ok(r)
}

/// `sweep`: bound map over modulation frequency and depth.
pub fn cmd_sweep(cfg: &DesignConfig, out: &mut Outputs) -> Result<String, CliError> {
    let s = cfg.sweep;
    let grid = SweepGrid::uniform(s.fm_range, s.fm_points, s.dc_range, s.dc_points, budget(cfg)?, cfg.junction)
        .map_err(CliError::numeric("sweep grid"))?;
    let map = run_sweep(&grid);
    let locus = optimal_locus(&map);
    let split = contiguity_violations(&map);
    out.write(Some(Format::Csv), "sweep_map.csv", &map_to_csv(&map))?;
    out.write(Some(Format::Csv), "sweep_locus.csv", &locus_to_csv(&locus))?;
    let chart = LineChart {
        title: "optimal modulation locus".into(),
        x_label: "fm / f0".into(),
        y_label: "value".into(),
        y_range: None,
        series: vec![
            Series {
                name: "dC/C0".into(),
                points: locus.iter().map(|l| (l.fm_ratio, l.dc_ratio)).collect(),
            },
            Series {
                name: "bound".into(),
                points: locus.iter().map(|l| (l.fm_ratio, l.bound)).collect(),
            },
        ],
    };
    out.write(Some(Format::Svg), "sweep_locus.svg", &chart.render())?;

    let feasible = map.iter().filter(|c| c.feasible).count();
    if feasible == 0 {
        return Err(CliError::EmptySweep);
    }
    let mut r = String::new();
    let total = map.fm_ratios.len() * map.dc_ratios.len();
    let _ = writeln!(r, "feasible cells      {feasible} / {total}");
    if let Some(best) = map.iter().filter_map(|c| c.bound_frac.map(|b| (b, c))).max_by(|a, b| a.0.total_cmp(&b.0)) {
        let _ = writeln!(
            r,
            "largest bound       {:.3} % at fm/f0 = {:.4}, dC/C0 = {:.4}",
            100.0 * best.0,
            best.1.fm_ratio,
            best.1.dc_ratio
        );
    }
    let _ = writeln!(r, "locus rows          {}", locus.len());
    if !split.is_empty() {
        let _ = writeln!(r, "rows with split feasibility: {split:?}");
    }
    Ok(r)
}

/// `bound`: reflection budget and the global bandwidth bound.
pub fn cmd_bound(cfg: &DesignConfig, out: &mut Outputs) -> Result<String, CliError> {
    let b = budget(cfg)?;
    let g = global_bound(&cfg.junction, &b).map_err(CliError::numeric("bound"))?;
    let m = g.model;
    let pairs = [
        ("rho_dB", b.rho_db),
        ("gamma", b.gamma_lin),
        ("fc_Hz", m.fc),
        ("Rc_ohm", m.rc),
        ("Lc_H", m.lc),
        ("Cc_F", m.cc),
        ("Qc", m.qc),
        ("bode_fano_frac", g.bode_fano),
        ("modulation_limit_frac", g.modulation_limit),
        ("bound_frac", g.value()),
    ];
    out.write(Some(Format::Csv), "bound.csv", &kv_csv(&pairs))?;
    let mut r = String::new();
    let _ = writeln!(r, "return-loss budget  {:.3} dB (|G| <= {:.4})", b.rho_db, b.gamma_lin);
    let _ = writeln!(
        r,
        "RLC model           Rc = {:.3} ohm, Lc = {:.3} nH, Cc = {:.4} pF, Qc = {:.3}",
        m.rc,
        m.lc * 1e9,
        m.cc * 1e12,
        m.qc
    );
    let _ = writeln!(r, "Bode-Fano branch    {:.3} %", 100.0 * g.bode_fano);
    let _ = writeln!(r, "2 fm / fc           {:.3} %", 100.0 * g.modulation_limit);
    let _ = writeln!(r, "global bound        {:.3} %", 100.0 * g.value());
    let _ = writeln!(r, "model center        {:.3} MHz (Qc = 2 pi fc Lc / Rc)", m.fc / 1e6);
    Ok(r)
}

/// `verify`: oracle and property checks; fails if any check fails.
pub fn cmd_verify(cfg: &DesignConfig, out: &mut Outputs) -> Result<String, CliError> {
    let checks = run_checks(cfg)?;
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.name.to_string(),
                format!("{:?}", c.status).to_lowercase(),
                c.worst.to_string(),
                c.tol.to_string(),
                c.note.clone(),
            ]
        })
        .collect();
    out.write(Some(Format::Csv), "verify.csv", &to_csv(&["check", "status", "worst", "tol", "note"], &rows))?;
    let mut r = String::new();
    for c in &checks {
        let _ = writeln!(r, "{c}");
    }
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    if failed > 0 {
        print!("{r}");
        return Err(CliError::Verification(failed));
    }
    Ok(r)
}
