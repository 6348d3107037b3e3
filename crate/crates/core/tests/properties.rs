mod common;

macro_rules! property {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = common::$name() {
                    panic!("{e}");
                }
            }
        )*
    };
}

property!(
    coverage_monotonicity,
    reliability_residual,
    rho_monotonicity,
    myopic_not_above_non_myopic,
    seeded_determinism,
    instance_round_trip,
    mps_round_trip,
    lp_residuals,
    tiny_seeds_stay_tiny,
);
