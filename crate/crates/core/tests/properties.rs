//! Structural invariants checked on randomized inputs.

use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;

use heliflow::assembly::{FourierSeries, HelicalBC, PerturbationState};
use heliflow::background::{
    coefficient_table, critical_step, reference_inflow, solve_background, BackgroundFlow, CoefficientTable, GasInflow,
};
use heliflow::config::RunConfig;
use heliflow::elliptic::{solve_poisson, solve_potential};
use heliflow::fields::spline::UniformSpline;
use heliflow::fields::{AnnulusGrid, Field2D};
use heliflow::io::fmt_g17;
use heliflow::transport::{exit_map, solve_transport, CharacteristicField};

const N_R: usize = 33;
const N_ETA: usize = 16;

struct Setup {
    grid: AnnulusGrid,
    bg: BackgroundFlow,
    table: CoefficientTable,
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let inflow = reference_inflow();
        let fine = solve_background(inflow, 1024).unwrap();
        let sigma = 0.5 * critical_step(&fine).unwrap().sigma_star;
        let bg = solve_background(inflow, N_R).unwrap();
        let table = coefficient_table(&bg, sigma).unwrap();
        let grid = AnnulusGrid::new(inflow.r0, inflow.r1, N_R, sigma, N_ETA).unwrap();
        Setup { grid, bg, table }
    })
}

/// Field with modes `0..c.len()` whose radial profile is a quadratic set by `c[k]`.
fn modal_field(grid: AnnulusGrid, c: &[(f64, f64, f64)]) -> Field2D {
    let w = grid.omega1();
    Field2D::from_fn(grid, |r, e| {
        let x = (r - grid.r0) / (grid.r1 - grid.r0);
        c.iter()
            .enumerate()
            .map(|(k, &(a, b, p))| (a + b * x * x) * (k as f64 * w * e + p).cos())
            .sum()
    })
}

fn modes(max: usize) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.0..2.0 * PI), 1..=max)
}

fn series(max: usize) -> impl Strategy<Value = FourierSeries> {
    (prop::collection::vec(-1.0..1.0f64, 1..=max), prop::collection::vec(-1.0..1.0f64, 1..=max))
        .prop_map(|(cos, sin)| FourierSeries { cos, sin })
}

fn close(a: &Field2D, b: &Field2D, tol: f64) -> bool {
    (a - b).max_abs() <= tol * (1.0 + a.max_abs().max(b.max_abs()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn poisson_is_linear(f in modes(5), g in modes(5), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let grid = setup().grid;
        let (f, g) = (modal_field(grid, &f), modal_field(grid, &g));
        let combined = solve_poisson(&(&f.scale(a) + &g.scale(b))).unwrap();
        let separate = &solve_poisson(&f).unwrap().scale(a) + &solve_poisson(&g).unwrap().scale(b);
        prop_assert!(close(&combined, &separate, 1e-11));
    }

    #[test]
    fn potential_is_homogeneous_in_source_and_data(f in modes(5), s in 0.05..1.0f64) {
        let st = setup();
        let bc = HelicalBC::single_mode(st.grid.sigma, 1e-2);
        let g3 = modal_field(st.grid, &f);
        let base = solve_potential(&g3, &st.table, &bc).unwrap().phi;
        let scaled = solve_potential(&g3.scale(s), &st.table, &bc.with_eps(s * 1e-2)).unwrap().phi;
        prop_assert!(close(&scaled, &base.scale(s), 1e-11));
    }

    #[test]
    fn exit_map_is_monotone_in_eta(f in modes(3), amp in 0.0..5e-3f64) {
        let st = setup();
        let w = modal_field(st.grid, &f).scale(amp);
        let z = Field2D::zeros(st.grid);
        let wbar = PerturbationState { w: [w.clone(), w.scale(0.5), w, z.clone(), z] };
        let exit = exit_map(&CharacteristicField::new(&wbar, &st.bg, 2).unwrap()).unwrap();
        for i in 0..N_R {
            let row: Vec<f64> = (0..N_ETA).map(|j| exit.get(i, j)).collect();
            prop_assert!(row.windows(2).all(|p| p[1] > p[0]));
            prop_assert!(row[N_ETA - 1] < row[0] + st.grid.sigma);
        }
    }

    #[test]
    fn transported_entropy_is_bounded_by_its_data(a_tilde in series(4), eps in 0.0..1e-2f64) {
        let st = setup();
        let bound = eps * a_tilde.cos.iter().chain(&a_tilde.sin).map(|c| c.abs()).sum::<f64>();
        let bc = HelicalBC { a_tilde, ..HelicalBC::single_mode(st.grid.sigma, eps) };
        let tr = solve_transport(&PerturbationState::zeros(st.grid), &bc, &st.bg).unwrap();
        prop_assert!(tr.w4.max_abs() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn spline_reproduces_cubics(c in prop::array::uniform4(-3.0..3.0f64), x in 0.0..1.0f64) {
        let p = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let h = 1.0 / 20.0;
        let s = UniformSpline::new(0.0, h, (0..=20).map(|i| p(i as f64 * h)).collect());
        prop_assert!((s.eval(x) - p(x)).abs() < 1e-12);
    }

    #[test]
    fn config_survives_json(sigma in 0.5..10.0f64, eps in 0.0..1e-2f64, n_r in 17usize..300, n_eta in 4usize..64) {
        let c = RunConfig::reference(sigma, eps, n_r, 2 * n_eta);
        prop_assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn g17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_g17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn row_shift_is_invertible(f in modes(7), shift in prop::collection::vec(-10.0..10.0f64, N_R)) {
        let g = modal_field(setup().grid, &f);
        let back: Vec<f64> = shift.iter().map(|s| -s).collect();
        prop_assert!(close(&g.shift_rows(&shift).shift_rows(&back), &g, 1e-13));
    }

    #[test]
    fn spectral_derivative_is_exact_below_nyquist(f in modes(7)) {
        let grid = setup().grid;
        let w = grid.omega1();
        let exact = Field2D::from_fn(grid, |r, e| {
            let x = (r - grid.r0) / (grid.r1 - grid.r0);
            f.iter()
                .enumerate()
                .map(|(k, &(a, b, p))| -(a + b * x * x) * k as f64 * w * (k as f64 * w * e + p).sin())
                .sum()
        });
        prop_assert!(close(&modal_field(grid, &f).d_eta(), &exact, 1e-12));
    }

    #[test]
    fn background_keeps_its_invariants(u10 in -0.3..-0.05f64, u20 in 0.1..0.5f64) {
        let inflow = GasInflow { u10, u20, r0: 1.5, ..reference_inflow() };
        let d = solve_background(inflow, 256).unwrap().invariant_defects();
        prop_assert!(d.mass_flux.max(d.bernoulli).max(d.entropy).max(d.swirl) <= 1e-9, "{:?}", d);
    }

    #[test]
    fn steps_below_critical_are_elliptic(frac in 0.01..0.99f64) {
        let st = setup();
        let star = st.table.sigma_star().unwrap();
        let t = coefficient_table(&st.bg, frac * star).unwrap();
        prop_assert!(t.min_k22().0 > 0.0);
    }
}
