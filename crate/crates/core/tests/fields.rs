mod common;

use std::f64::consts::PI;

use rand::Rng;
use vortexlab::fields::{Atom, Domain, Field};

#[test]
fn unit_fields_have_unit_norm() {
    let mut rng = common::rng(1);
    let f = Field::vortices(
        vec![
            Atom::new(-0.3, 0.1, 1),
            Atom::new(0.4, -0.2, -2),
            Atom::new(0.0, 0.5, 3),
        ],
        0.7,
    )
    .unwrap();
    let ulp = f64::EPSILON;
    for _ in 0..100_000 {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let v = f.evaluate(&p).unwrap();
        assert!((v[0].hypot(v[1]) - 1.0).abs() <= 4.0 * ulp, "{p:?}");
    }
}

#[test]
fn winding_along_circles_counts_enclosed_degrees() {
    let atoms = vec![Atom::new(-0.4, 0.0, 1), Atom::new(0.4, 0.0, -2), Atom::new(0.0, 0.6, 3)];
    let f = Field::vortices(atoms.clone(), 0.0).unwrap();
    let circles = [
        ([-0.4, 0.0], 0.2),
        ([0.4, 0.0], 0.2),
        ([0.0, 0.0], 0.5),
        ([0.0, 0.1], 1.2),
        ([0.0, -0.6], 0.3),
    ];
    for (c, r) in circles {
        let pts: Vec<[f64; 2]> = (0..360)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 360.0;
                f.evaluate(&[c[0] + r * t.cos(), c[1] + r * t.sin()]).unwrap()
            })
            .collect();
        let mut total = 0.0;
        for k in 0..360 {
            let (a, b) = (pts[k], pts[(k + 1) % 360]);
            total += (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        }
        let expect: i32 = atoms
            .iter()
            .filter(|a| (a.position[0] - c[0]).hypot(a.position[1] - c[1]) < r)
            .map(|a| a.degree)
            .sum();
        assert_eq!((total / (2.0 * PI)).round() as i32, expect, "circle {c:?} r={r}");
    }
}

#[test]
fn dipole_midpoint_value() {
    let f = Field::vortices(vec![Atom::new(-0.2, 0.0, 1), Atom::new(0.2, 0.0, -1)], 0.0).unwrap();
    let v = f.evaluate(&[0.0, 0.0]).unwrap();
    assert!((v[0] + 1.0).abs() < 1e-15 && v[1].abs() < 1e-15);
}

fn analytic_distance(dom: &Domain, p: [f64; 2]) -> f64 {
    match dom.to_owned() {
        Domain::Planar(vortexlab::fields::Shape2::Ball { center, radius }) => {
            radius - (p[0] - center[0]).hypot(p[1] - center[1])
        }
        Domain::Planar(vortexlab::fields::Shape2::Rectangle { lo, hi }) => {
            [p[0] - lo[0], hi[0] - p[0], p[1] - lo[1], hi[1] - p[1]]
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        }
        Domain::Planar(vortexlab::fields::Shape2::Annulus { center, inner, outer }) => {
            let r = (p[0] - center[0]).hypot(p[1] - center[1]);
            (r - inner).min(outer - r)
        }
        _ => unreachable!(),
    }
}

#[test]
fn boundary_distance_and_shrink_by_sampling() {
    let mut rng = common::rng(2);
    let doms = [
        Domain::ball([0.1, -0.2], 1.0).unwrap(),
        Domain::rectangle([0.0, 0.0], [2.0, 1.0]).unwrap(),
        Domain::annulus([0.0, 0.0], 0.25, 1.0).unwrap(),
    ];
    for dom in &doms {
        let (lo, hi) = dom.bounding_box();
        for delta in [0.05, 0.1] {
            let u = dom.shrink(delta).unwrap();
            for _ in 0..20_000 {
                let p = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
                if !dom.contains(&p) {
                    assert!(!u.contains(&p));
                    continue;
                }
                let d = dom.boundary_distance(&p).unwrap();
                assert!((d - analytic_distance(dom, p)).abs() < 1e-12);
                if u.contains(&p) {
                    assert!(d >= delta - 1e-12, "{dom:?} {p:?}");
                }
            }
        }
    }
}

#[test]
fn catalog_examples() {
    assert_eq!(
        Domain::ball([0.0, 0.0], 1.0)
            .unwrap()
            .boundary_distance(&[0.0, 0.0])
            .unwrap(),
        1.0
    );
    let r = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
    assert!((r.boundary_distance(&[0.1, 0.5]).unwrap() - 0.1).abs() < 1e-15);
    let a = Domain::annulus([0.0, 0.0], 0.25, 1.0).unwrap();
    assert_eq!(a.boundary_distance(&[0.5, 0.0]).unwrap(), 0.25);
    assert_eq!(
        Domain::ball([0.0, 0.0], 1.0).unwrap().shrink(0.1).unwrap(),
        Domain::ball([0.0, 0.0], 0.9).unwrap()
    );
    assert_eq!(
        r.shrink(0.25).unwrap(),
        Domain::rectangle([0.25, 0.25], [0.75, 0.75]).unwrap()
    );
    assert_eq!(
        Domain::annulus([0.0, 0.0], 0.2, 1.0).unwrap().shrink(0.05).unwrap(),
        Domain::annulus([0.0, 0.0], 0.25, 0.95).unwrap()
    );
}
