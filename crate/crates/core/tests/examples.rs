macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            include!($file);
            #[test]
            fn runs() {
                main().unwrap();
            }
        }
    };
}

example!(pulse_window, "../examples/pulse_window.rs");
example!(channel_fixture, "../examples/channel_fixture.rs");
example!(solve_single, "../examples/solve_single.rs");
example!(discrete_phases, "../examples/discrete_phases.rs");
example!(monte_carlo, "../examples/monte_carlo.rs");
example!(snr_sweep, "../examples/snr_sweep.rs");
example!(k_sweep, "../examples/k_sweep.rs");
example!(validate_suite, "../examples/validate_suite.rs");
