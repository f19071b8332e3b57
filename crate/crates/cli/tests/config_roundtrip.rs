use cpm_schwarz::experiment::Forcing;
use cpm_schwarz::schwarz::Interface;
use cpm_schwarz_cli::config::{Length, LinearSolver, RunConfig};
use proptest::prelude::*;
use std::path::PathBuf;

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), 1e-6..10.0f64]
}

fn length() -> impl Strategy<Value = Length> {
    prop_oneof![real().prop_map(Length::Absolute), real().prop_map(Length::Relative)]
}

prop_compose! {
    fn config()(
        curve in prop_oneof![Just("circle".to_string()), Just("mobius-boundary".to_string()), "circle:R=[0-9]\\.[0-9]{1,3}"],
        h in real(), degree in 0usize..9, c in real(),
        forcing in prop_oneof![(1u32..5).prop_map(Forcing::SinMode), Just(Forcing::Zero), Just(Forcing::One)],
        split in (real(), real()), overlap in (length(), length()),
        inner_tol in real(), tol in real(), max_iter in 0usize..100_000,
        out in "[a-z_][a-z0-9_/.]{0,20}",
        hs in prop::collection::vec(real(), 0..5),
        deltas in prop::collection::vec(length(), 0..12),
        interface in prop_oneof![Just(Interface::Algebraic), Just(Interface::Iterate)],
        solver in prop_oneof![Just(LinearSolver::Direct), Just(LinearSolver::Gmres)],
        samples in 1usize..5000,
    ) -> RunConfig {
        RunConfig {
            curve, h, degree, c, forcing, split: [split.0, split.1], overlap: [overlap.0, overlap.1],
            inner_tol, tol, max_iter, out: PathBuf::from(out), hs, deltas, interface, solver, samples,
        }
    }
}

proptest! {
    #[test]
    fn text_round_trip_is_lossless(cfg in config()) {
        let text = cfg.to_text();
        prop_assert_eq!(RunConfig::from_text(&text).unwrap(), cfg.clone());
        let commented = format!("# header\n\n{}", text.replace('\n', "\n# note\n"));
        prop_assert_eq!(RunConfig::from_text(&commented).unwrap(), cfg);
    }
}
