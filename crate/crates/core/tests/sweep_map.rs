use stmcirc_core::bound::reflection_budget;
use stmcirc_core::junction::JunctionParams;
use stmcirc_core::sweep::{contiguity_violations, optimal_locus, row_optimum, run_sweep, SweepGrid};

fn reference_map() -> stmcirc_core::sweep::SweepMap {
    let grid = SweepGrid::default_for(JunctionParams::reference(), reflection_budget(3.0, 20.0).unwrap());
    run_sweep(&grid)
}

#[test]
fn default_map_shape() {
    let map = reference_map();
    assert_eq!(map.fm_ratios.len(), 60);
    assert_eq!(map.dc_ratios.len(), 60);
    assert_eq!(map.iter().filter(|c| c.feasible).count(), 2611);
    assert!(contiguity_violations(&map).is_empty());
    for c in map.iter() {
        assert_eq!(c.feasible, c.bound_frac.is_some());
        assert_eq!(c.feasible, c.reason.is_none());
        if let (Some(b), Some(ml)) = (c.bound_frac, c.modulation_limit) {
            assert!(b <= ml);
        }
    }
}

#[test]
fn reference_cell() {
    let map = reference_map();
    let c = map.nearest(0.11, 0.544);
    assert!((c.fm_ratio - 0.1083).abs() < 1e-3 && (c.dc_ratio - 0.5402).abs() < 1e-3);
    assert!((c.bound_frac.unwrap() - 0.217).abs() < 1e-3);
}

#[test]
fn locus_prefers_shallow_modulation_on_ties() {
    let map = reference_map();
    let locus = optimal_locus(&map);
    let row = map.fm_ratios.iter().position(|f| (f - 0.1083).abs() < 1e-3).unwrap();
    let pt = row_optimum(&map, row).unwrap();
    assert!(pt.dc_ratio < 0.544, "depth {}", pt.dc_ratio);
    assert!(locus.contains(&pt));
    for w in locus.windows(2) {
        assert!(w[0].fm_ratio < w[1].fm_ratio);
    }
}

#[test]
fn sweep_is_reproducible() {
    assert_eq!(reference_map(), reference_map());
}
