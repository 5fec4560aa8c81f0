use hetextremes::testing::{
    bridge_cvm_quantile, empirical_quantile, selfnorm_reference_quantiles, selfnorm_reference_samples,
    SelfNormQuantiles, DEFAULT_ALPHAS, DEFAULT_GRID, DEFAULT_PATHS, DEFAULT_SEED, EDHZ_QUANTILE_095,
};

/// Median of S_2 under the shipped simulation settings.
const S2_MEDIAN: f64 = 0.706_124_233_987_106_3;

/// Between-seed relative standard deviation of q_T(0.95) at 10^5 paths, measured over 8 seeds.
const QT_REL_SD_1E5: f64 = 0.0072;

#[test]
fn shipped_table_regenerates_exactly() {
    let (s2, t2) = selfnorm_reference_samples(DEFAULT_PATHS, DEFAULT_GRID, DEFAULT_SEED).unwrap();
    assert!((empirical_quantile(&s2, 0.5).unwrap() - S2_MEDIAN).abs() < 1e-12);
    let shipped = SelfNormQuantiles::builtin();
    for &a in &DEFAULT_ALPHAS {
        assert_eq!(shipped.q_s(a).unwrap(), empirical_quantile(&s2, a).unwrap());
        assert_eq!(shipped.q_t(a).unwrap(), empirical_quantile(&t2, a).unwrap());
    }
}

#[test]
fn quantiles_stable_across_seeds() {
    let a = selfnorm_reference_quantiles(&[0.05], 100_000, 2000, 1).unwrap().q_t(0.05).unwrap();
    let b = selfnorm_reference_quantiles(&[0.05], 100_000, 2000, 2).unwrap().q_t(0.05).unwrap();
    let rel = (a - b).abs() / (0.5 * (a + b));
    // four standard deviations of a difference of two independent estimates
    assert!(rel < 4.0 * 2f64.sqrt() * QT_REL_SD_1E5, "relative gap {rel}");
}

#[test]
fn quantiles_are_ordered() {
    let t = SelfNormQuantiles::builtin();
    assert!(t.q_t(0.01).unwrap() > t.q_t(0.05).unwrap());
    assert!(t.q_t(0.05).unwrap() > t.q_t(0.1).unwrap());
    assert!(t.q_s(0.01).unwrap() > t.q_s(0.05).unwrap());
    assert!(t.q_s(0.05).unwrap() > t.q_s(0.1).unwrap());
}

#[test]
fn pinned_bridge_cvm_quantile_matches_simulation() {
    let q = bridge_cvm_quantile(0.05, 100_000, 2000, 3).unwrap();
    assert!((q - EDHZ_QUANTILE_095).abs() / EDHZ_QUANTILE_095 < 0.01, "{q}");
}
