mod common;

use std::f64::consts::PI;

use rand::{Rng, RngCore};
use vortexlab::currents::{
    convergence_check, flat_norm, jacobian_measure, plaquette_degrees, winding_oracle, AtomicCurrent,
    ConvergenceOptions,
};
use vortexlab::fields::{Atom, Domain, Field};
use vortexlab::lattice::{sample, LatticeField, IDENTITY};

type Sampler = fn(&mut dyn RngCore) -> [f64; 2];

fn ball_point(rng: &mut dyn RngCore) -> [f64; 2] {
    common::point_in_disc(rng, 0.95)
}

fn rect_point(rng: &mut dyn RngCore) -> [f64; 2] {
    [rng.random_range(0.02..1.98), rng.random_range(0.02..0.98)]
}

#[test]
fn flat_norm_is_a_metric() {
    let mut rng = common::rng(8);
    let dom = Domain::ball([0.0, 0.0], 1.0).unwrap();
    for _ in 0..100 {
        let cur: Vec<AtomicCurrent> = (0..3)
            .map(|_| AtomicCurrent::new(common::random_unit_atoms(&mut rng, 3, ball_point)).unwrap())
            .collect();
        let d = |i: usize, j: usize| flat_norm(&cur[i], &cur[j], &dom).unwrap().value;
        assert_eq!(d(0, 0), 0.0);
        assert!((d(0, 1) - d(1, 0)).abs() <= 1e-9);
        assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        let bound: f64 = cur[0]
            .atoms()
            .iter()
            .map(|a| PI * a.degree.unsigned_abs() as f64 * dom.boundary_distance(&a.position).unwrap())
            .sum();
        assert!(flat_norm(&cur[0], &AtomicCurrent::empty(), &dom).unwrap().value <= bound + 1e-9);
    }
}

#[test]
fn matching_equals_exhaustive_enumeration() {
    let mut rng = common::rng(9);
    let cases: [(Domain, Sampler); 2] = [
        (Domain::ball([0.0, 0.0], 1.0).unwrap(), ball_point),
        (Domain::rectangle([0.0, 0.0], [2.0, 1.0]).unwrap(), rect_point),
    ];
    for (dom, point) in &cases {
        for _ in 0..100 {
            let a = common::random_unit_atoms(&mut rng, 2, point);
            let b = common::random_unit_atoms(&mut rng, 2, point);
            let (pos, neg) = common::charges_of_difference(&a, &b);
            let bd = |p: [f64; 2]| dom.boundary_distance(&p).unwrap();
            let want = common::exhaustive_flat(&pos, &neg, &bd);
            let got = flat_norm(&AtomicCurrent::new(a).unwrap(), &AtomicCurrent::new(b).unwrap(), dom).unwrap();
            assert!((got.value - want).abs() <= 1e-9, "{} vs {want}", got.value);
            let plan: f64 = got.plan.iter().map(|e| e.mass * e.length).sum();
            assert!((plan - got.value).abs() <= 1e-9);
        }
    }
}

#[test]
fn higher_degrees_expand_into_unit_charges() {
    let dom = Domain::ball([0.0, 0.0], 1.0).unwrap();
    let a = AtomicCurrent::new(vec![Atom::new(0.0, 0.0, 2)]).unwrap();
    let b = AtomicCurrent::new(vec![Atom::new(0.3, 0.0, 1)]).unwrap();
    // One unit travels 0.3, the other exits through the boundary at distance 1.
    assert!((flat_norm(&a, &b, &dom).unwrap().value - 1.3 * PI).abs() < 1e-12);
}

#[test]
fn winding_and_jacobian_agree_on_the_vortex_catalog() {
    let dom = Domain::rectangle([-1.0, -1.0], [1.0, 1.0]).unwrap();
    let catalog = [
        vec![Atom::new(0.0, 0.0, 1)],
        vec![Atom::new(-0.2, 0.0, 1), Atom::new(0.2, 0.0, -1)],
        vec![Atom::new(0.1, 0.3, 2), Atom::new(-0.4, -0.3, 1)],
        vec![Atom::new(0.33, -0.21, -3)],
    ];
    for atoms in catalog {
        let f = Field::vortices(atoms.clone(), 0.4).unwrap();
        for eps in [1.0 / 32.0, 1.0 / 64.0] {
            let lf = sample(&f, &dom, eps, [0.5, 0.5, 0.0]).unwrap();
            let degrees = plaquette_degrees(&lf).unwrap();
            let jm = jacobian_measure(&lf).unwrap();
            for (lo, hi) in [(-0.7, 0.7), (-0.1, 0.6), (-0.8, 0.05)] {
                let inside = |c: [f64; 2]| c[0] > lo && c[0] < hi && c[1] > lo && c[1] < hi;
                let center = |k: [i64; 3]| [(k[0] as f64 + 1.0) * eps, (k[1] as f64 + 1.0) * eps];
                let wind: i32 = degrees.iter().filter(|(k, _)| inside(center(*k))).map(|(_, d)| d).sum();
                let jac: f64 = jm.cells.iter().filter(|c| inside(c.center)).map(|c| c.mass).sum();
                let true_deg: i32 = atoms.iter().filter(|a| inside(a.position)).map(|a| a.degree).sum();
                assert_eq!(wind, true_deg);
                assert!(
                    (wind as f64 - jac / PI).abs() < 0.5,
                    "eps={eps} box=({lo},{hi}): {wind} vs {}",
                    jac / PI
                );
            }
            assert_eq!(
                winding_oracle(&lf).unwrap().total_degree(),
                atoms.iter().map(|a| a.degree as i64).sum::<i64>()
            );
        }
    }
}

#[test]
fn jacobian_total_is_a_boundary_integral() {
    let mut rng = common::rng(10);
    for _ in 0..20 {
        let (n0, n1) = (rng.random_range(2..12usize), rng.random_range(2..12usize));
        let lf = LatticeField::from_fn(
            2,
            0.1,
            IDENTITY,
            [0.0; 3],
            [0, 0, 0],
            [n0 + 1, n1 + 1, 1],
            false,
            |_| Some([rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]),
        )
        .unwrap();
        let jm = jacobian_measure(&lf).unwrap();
        let mut ring = Vec::new();
        ring.extend((0..n0).map(|i| [i as i64, 0, 0]));
        ring.extend((0..n1).map(|j| [n0 as i64, j as i64, 0]));
        ring.extend((0..n0).map(|i| [(n0 - i) as i64, n1 as i64, 0]));
        ring.extend((0..n1).map(|j| [0, (n1 - j) as i64, 0]));
        let values: Vec<[f64; 2]> = ring.iter().map(|&k| lf.get(k).unwrap()).collect();
        let stokes = common::loop_area(&values);
        assert!((jm.total() - stokes).abs() <= 1e-9, "{} vs {stokes}", jm.total());
    }
}

#[test]
fn single_vortex_converges_at_the_lattice_rate() {
    let dom = Domain::ball([0.0, 0.0], 1.0).unwrap();
    let f = Field::single_vortex([0.0, 0.0], 1);
    let seq: Vec<(f64, Field)> = [32.0, 64.0, 128.0, 256.0]
        .iter()
        .map(|n| (1.0 / n, f.clone()))
        .collect();
    let target = AtomicCurrent::new(vec![Atom::new(0.0, 0.0, 1)]).unwrap();
    let report = convergence_check(&seq, &target, &dom, &[0.1, 0.2], &ConvergenceOptions::default()).unwrap();
    assert_eq!(report.rows.len(), 8);
    for row in &report.rows {
        assert!(row.flat_distance <= 10.0 * row.eps * PI, "{row:?}");
    }
    assert!(report.converged);
}
