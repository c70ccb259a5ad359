mod common;

use rand::Rng;
use vortexlab::energy::{
    bbm_linear_reference, energy, energy_pairwise_oracle, jensen_check, pairwise_sums, upper_bound_report, CutoffRule,
    EnergySpec, GridOptions, Scaling,
};
use vortexlab::fields::{Atom, Domain, Field};
use vortexlab::kernels::Kernel;

fn unit_ball() -> Domain {
    Domain::ball([0.0, 0.0], 1.0).unwrap()
}

fn unit_square() -> Domain {
    Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap()
}

#[test]
fn nonnegative_and_monotone_in_the_kernel() {
    let mut rng = common::rng(3);
    for _ in 0..6 {
        let atoms = (0..3)
            .map(|_| {
                let p = common::point_in_disc(&mut rng, 0.7);
                Atom::new(p[0], p[1], rng.random_range(-2..=2))
            })
            .filter(|a| a.degree != 0)
            .collect();
        let f = Field::vortices(atoms, rng.random_range(0.0..6.0)).unwrap();
        let big = Kernel::indicator(1.0).unwrap();
        let small = Kernel::triangle(1.0).unwrap();
        let e = |k: Kernel| {
            let spec = EnergySpec::new(k, unit_ball(), 0.1, Scaling::Vortex)
                .unwrap()
                .with_polar(16, 16)
                .unwrap();
            energy(&spec, &f).unwrap()
        };
        let (eb, es) = (e(big), e(small));
        assert!(es >= 0.0);
        assert!(es <= eb);
    }
}

#[test]
fn quadrature_agrees_with_the_direct_double_sum() {
    // 64 x 64 grid on the unit square.
    let spec = EnergySpec::new(Kernel::indicator(1.0).unwrap(), unit_square(), 0.0625, Scaling::Vortex)
        .unwrap()
        .with_grid_h(1.0 / 64.0)
        .unwrap();
    let f = Field::single_vortex([0.37, 0.52], 1);
    let a = energy(&spec, &f).unwrap();
    let b = energy_pairwise_oracle(&spec, &f, 4).unwrap();
    assert!((a / b - 1.0).abs() < 1e-2, "{a} vs {b}");
}

#[test]
fn ordered_pairs_double_the_unordered_sum() {
    let spec = EnergySpec::new(Kernel::triangle(1.0).unwrap(), unit_ball(), 0.1, Scaling::Vortex).unwrap();
    let f = Field::vortices(vec![Atom::new(0.2, 0.1, 1), Atom::new(-0.3, 0.0, -1)], 0.3).unwrap();
    let s = pairwise_sums(&spec, &f).unwrap();
    assert!(s.pairs > 0);
    assert!((s.ordered - 2.0 * s.unordered).abs() <= 1e-12 * s.ordered);
}

#[test]
fn linear_field_matches_the_closed_form() {
    let k = Kernel::indicator(1.0).unwrap();
    for eps in [0.1, 0.05] {
        let spec = EnergySpec::new(k.clone(), unit_square(), eps, Scaling::Bbm).unwrap();
        let e = energy(&spec, &Field::linear([[1.0, 0.0], [0.0, 1.0]])).unwrap();
        let exact = common::bbm_identity_square(eps);
        assert!((e / exact - 1.0).abs() < 1e-3, "eps={eps}: {e} vs {exact}");
        let r = bbm_linear_reference(&k, [[1.0, 0.0], [0.0, 1.0]], &unit_square(), eps).unwrap();
        assert!((r / exact - 1.0).abs() < 1e-9);
    }
}

#[test]
fn centered_vortex_matches_the_radial_oracle() {
    for eps in [0.1, 0.05] {
        let spec = EnergySpec::new(Kernel::indicator(1.0).unwrap(), unit_ball(), eps, Scaling::Vortex).unwrap();
        let e = energy(&spec, &Field::single_vortex([0.0, 0.0], 1)).unwrap();
        let exact = common::disc_vortex_energy(eps);
        assert!((e / exact - 1.0).abs() < 1e-3, "eps={eps}: {e} vs {exact}");
    }
}

#[test]
fn cylinder_vortex_matches_the_spherical_oracle() {
    let eps = 0.1;
    let dom = Domain::product(
        vortexlab::fields::Shape2::Ball {
            center: [0.0, 0.0],
            radius: 1.0,
        },
        [0.0, 1.0],
    )
    .unwrap();
    let spec = EnergySpec::new(Kernel::indicator(1.0).unwrap(), dom, eps, Scaling::Vortex)
        .unwrap()
        .with_polar(256, 64)
        .unwrap();
    let e = energy(&spec, &Field::single_vortex([0.0, 0.0], 1)).unwrap();
    let exact = common::cylinder_vortex_energy(eps, 1.0);
    assert!((e / exact - 1.0).abs() < 1e-3, "{e} vs {exact}");
}

#[test]
fn bitwise_deterministic_across_thread_counts() {
    let spec = EnergySpec::new(Kernel::gauss(0.5, 1.0).unwrap(), unit_ball(), 0.05, Scaling::Vortex)
        .unwrap()
        .with_polar(16, 32)
        .unwrap();
    let f = Field::vortices(vec![Atom::new(0.1, 0.2, 2), Atom::new(-0.4, -0.1, -1)], 1.0).unwrap();
    let run = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| energy(&spec, &f).unwrap())
    };
    let one = run(1);
    for n in [2, 4] {
        assert_eq!(run(n).to_bits(), one.to_bits());
    }
}

#[test]
fn cell_averages_satisfy_jensen() {
    let mut rng = common::rng(4);
    for _ in 0..4 {
        let p = common::point_in_disc(&mut rng, 0.5);
        let q = common::point_in_disc(&mut rng, 0.5);
        let f = Field::vortices(vec![Atom::new(p[0], p[1], 1), Atom::new(q[0], q[1], -1)], 0.0).unwrap();
        let eps = rng.random_range(0.05..0.15);
        let r = jensen_check(&f, &unit_ball(), eps, 4, 1e-13).unwrap();
        assert!(r.checked > 0);
        assert_eq!(r.violations, 0, "max excess {}", r.max_excess);
    }
}

#[test]
fn core_radius_of_the_upper_bound() {
    let r = CutoffRule::EpsLogLog.radius(0.01);
    assert!((r - 0.01527).abs() < 1e-5);
    let opts = GridOptions {
        grid_ratio: 4.0,
        radial: 16,
        angular: 16,
    };
    let rows = upper_bound_report(
        &Kernel::indicator(1.0).unwrap(),
        &unit_ball(),
        &[0.1, 0.05],
        CutoffRule::EpsLogLog,
        &opts,
    )
    .unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert!(row.ratio > 0.5 && row.ratio < 2.0);
    }
    assert!(rows[1].log_ratio < rows[0].log_ratio && rows[1].log_ratio < 1.0);
    assert!(upper_bound_report(
        &Kernel::indicator(1.0).unwrap(),
        &unit_ball(),
        &[0.05, 0.1],
        CutoffRule::EpsLogLog,
        &opts
    )
    .is_err());
}
