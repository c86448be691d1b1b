use proptest::prelude::*;
use stmcirc_core::bound::reflection_budget;
use stmcirc_core::compose::{compose_response, design_for_spec, extract_metrics_with, find_notches, to_db, DesignContext};
use stmcirc_core::filters::{
    filter_branch_immittances, filter_input_impedance, filter_sparams, filter_sparams_with_loss, synthesis_candidates,
    LadderFilter, SynthesisSpec, RESIDUAL_TOL,
};
use stmcirc_core::junction::JunctionParams;
use stmcirc_core::netcore::{Complex, TwoPortS};

const Z0: f64 = 50.0;

fn abcd(y1: Complex, z2: Complex) -> TwoPortS {
    let one = Complex::new(1.0, 0.0);
    let (a, b, c, d) = (one + z2 * y1, z2, y1, one);
    let den = a + b / Z0 + c * Z0 + d;
    TwoPortS {
        r: (a + b / Z0 - c * Z0 - d) / den,
        t: (-a + b / Z0 - c * Z0 + d) / den,
        m: (a * d - b * c) * 2.0 / den,
    }
}

prop_compose! {
    fn ladder()(l1 in 0.1..100.0f64, c1 in 0.1..100.0f64, l2 in 0.1..100.0f64, c2 in 0.1..100.0f64) -> LadderFilter {
        LadderFilter::new(l1 * 1e-9, c1 * 1e-12, l2 * 1e-9, c2 * 1e-12).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn lossless_filter_is_unitary(f in ladder(), freq in 0.3e9..3.0e9f64) {
        let s = filter_sparams(&f, Z0, freq);
        prop_assert!((s.r.norm_sqr() + s.m.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((s.t.norm_sqr() + s.m.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((s.r * s.m.conj() + s.m * s.t.conj()).norm() < 1e-12);
    }

    #[test]
    fn closed_form_matches_abcd_cascade(f in ladder(), freq in 0.3e9..3.0e9f64) {
        let s = filter_sparams(&f, Z0, freq);
        let (y1, z2) = filter_branch_immittances(&f, freq);
        let o = abcd(y1.value(), z2.value());
        prop_assert!((s.r - o.r).norm() < 1e-12);
        prop_assert!((s.t - o.t).norm() < 1e-12);
        prop_assert!((s.m - o.m).norm() < 1e-12);
    }

    #[test]
    fn element_loss_is_passive(f in ladder(), freq in 0.3e9..3.0e9f64, q in 5.0..500.0f64) {
        let s = filter_sparams_with_loss(&f, Z0, freq, Some(q));
        prop_assert!(s.r.norm_sqr() + s.m.norm_sqr() <= 1.0 + 1e-12);
        prop_assert!(s.t.norm_sqr() + s.m.norm_sqr() <= 1.0 + 1e-12);
    }
}

#[test]
fn synthesized_filters_match_at_both_targets() {
    let p = JunctionParams::reference();
    let ctx = DesignContext::new(&p).unwrap();
    let yc = |f: f64| ctx.yc(f);
    for df in [40e6, 73e6, 97.2e6, 150e6] {
        let spec = SynthesisSpec::centered(ctx.center, df, Z0).unwrap();
        let cands = synthesis_candidates(&yc, &spec).unwrap();
        assert!(!cands.is_empty());
        for c in cands {
            for f in [spec.f_low, spec.f_high] {
                let zm = filter_input_impedance(&c.filter, yc(f).unwrap().conj(), f).unwrap();
                assert!((zm - Complex::new(Z0, 0.0)).norm() < RESIDUAL_TOL, "df {df}: |Zm - Z0| at {f}");
            }
        }
    }
}

#[test]
fn composed_design_isolates_deeply_at_the_targets() {
    let p = JunctionParams::reference();
    let ctx = DesignContext::new(&p).unwrap();
    let budget = reflection_budget(3.0, 20.0).unwrap();
    for df in [60e6, 73e6, 97.2e6] {
        let spec = SynthesisSpec::centered(ctx.center, df, Z0).unwrap();
        let d = design_for_spec(&ctx, &spec, &budget, None).unwrap();
        let notches = find_notches(&d.response, 40.0);
        for target in [spec.f_low, spec.f_high] {
            let hit = notches.iter().any(|n| (n - target).abs() < 1e6);
            assert!(hit, "df {df}: no >40 dB notch near {target} (notches {notches:?})");
        }
        // the grid point nearest each target is already below -40 dB
        for target in [spec.f_low, spec.f_high] {
            let k = d
                .response
                .freq_grid
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
                .unwrap()
                .0;
            assert!(to_db(d.response.s[k].bwd) > 40.0);
        }
    }
}

#[test]
fn reference_element_values_are_recovered() {
    let p = JunctionParams::reference();
    let ctx = DesignContext::new(&p).unwrap();
    let yc = |f: f64| ctx.yc(f);
    // the notches the reference filter produces on this junction
    let spec = SynthesisSpec::new(972.95e6, 1045.1e6, Z0).unwrap();
    let reference = LadderFilter::reference();
    let cands = synthesis_candidates(&yc, &spec).unwrap();
    let close = cands.iter().any(|c| {
        c.filter
            .elements()
            .iter()
            .zip(reference.elements())
            .all(|(a, b)| (a / b - 1.0).abs() < 0.03)
    });
    assert!(close, "candidates {cands:?}");
}

#[test]
fn widest_candidate_is_kept() {
    let p = JunctionParams::reference();
    let ctx = DesignContext::new(&p).unwrap();
    let budget = reflection_budget(3.0, 20.0).unwrap();
    let spec = SynthesisSpec::centered(ctx.center, 73e6, Z0).unwrap();
    let d = design_for_spec(&ctx, &spec, &budget, None).unwrap();
    let yc = |f: f64| ctx.yc(f);
    let cands = synthesis_candidates(&yc, &spec).unwrap();
    assert!(cands.iter().any(|c| c.filter == d.filter));
    for c in cands {
        let r = compose_response(&ctx.junction, &c.filter, None).unwrap();
        let bw = extract_metrics_with(&r, 3.0, 20.0, true).map_or(0.0, |m| m.bw_frac);
        assert!(bw <= d.usable_bw);
    }
}
