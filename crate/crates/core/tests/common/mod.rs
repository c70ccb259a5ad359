//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `int_a^b f` by `panels` Gauss-Legendre panels of `n` points.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let gl = gauss_legendre(n);
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let (lo, hi) = (a + p as f64 * w, a + (p + 1) as f64 * w);
        let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        total += gl.iter().map(|(x, wx)| wx * f(m + h * x)).sum::<f64>() * h;
    }
    total
}

/// BBM energy of the identity map on the unit square with the unit indicator kernel.
pub fn bbm_identity_square(eps: f64) -> f64 {
    FRAC_PI_2 - 8.0 * eps / 5.0 + eps * eps / 3.0
}

/// `int_0^{2 pi} [|y + eps s e| < 1] |w(y + eps s e) - w(y)|^2 dphi` for `w = y/|y|`,
/// `|y| = r`, `phi` the angle between `y` and `e`.
fn angular_gap(r: f64, step: f64) -> f64 {
    let c0 = (1.0 - r * r - step * step) / (2.0 * r * step);
    if c0 <= -1.0 {
        return 0.0;
    }
    let phi0 = if c0 >= 1.0 { 0.0 } else { c0.acos() };
    let g = |phi: f64| {
        let c = phi.cos();
        let rho = (r * r + 2.0 * r * step * c + step * step).sqrt();
        if rho == 0.0 {
            2.0
        } else {
            2.0 - 2.0 * (r + step * c) / rho
        }
    };
    2.0 * integrate(g, phi0, PI, 24, 4)
}

/// `int_{B_1} [|y + eps s e| < 1] |w(y + eps s e) - w(y)|^2 dy` for the unit vortex `w`.
pub fn planar_gap(step: f64) -> f64 {
    let inner = integrate(|r| r * angular_gap(r, step), 0.0, step.min(1.0), 24, 2);
    let mid = if step < 1.0 - step {
        integrate(
            |s| {
                let r = s.exp();
                r * r * angular_gap(r, step)
            },
            step.ln(),
            (1.0 - step).ln(),
            24,
            6,
        )
    } else {
        0.0
    };
    let outer = integrate(|r| r * angular_gap(r, step), (1.0 - step).max(step), 1.0, 24, 2);
    inner + mid + outer
}

/// Vortex-scaled energy of `x/|x|` on the unit disc with the unit indicator kernel,
/// reduced by rotational symmetry to three nested one-dimensional integrals.
pub fn disc_vortex_energy(eps: f64) -> f64 {
    let total = integrate(|t| t * planar_gap(eps * t), 0.0, 1.0, 24, 2);
    2.0 * PI * total / (eps * eps * eps.ln().abs())
}

/// Vortex-scaled energy of the product vortex on the unit disc times `(0, len)`.
pub fn cylinder_vortex_energy(eps: f64, len: f64) -> f64 {
    let inner = |t: f64| {
        integrate(
            |a: f64| a.sin() * (len - eps * t * a.cos().abs()).max(0.0) * planar_gap(eps * t * a.sin()),
            0.0,
            PI,
            16,
            2,
        )
    };
    2.0 * PI * integrate(|t| t * t * inner(t), 0.0, 1.0, 16, 2) / (eps * eps * eps.ln().abs())
}

/// Exhaustive minimum over pairings and boundary assignments of unit charges.
pub fn exhaustive_flat(pos: &[[f64; 2]], neg: &[[f64; 2]], bd: &dyn Fn([f64; 2]) -> f64) -> f64 {
    fn go(i: usize, pos: &[[f64; 2]], neg: &[[f64; 2]], used: &mut Vec<bool>, bd: &dyn Fn([f64; 2]) -> f64) -> f64 {
        if i == pos.len() {
            return neg
                .iter()
                .zip(used.iter())
                .filter(|(_, u)| !**u)
                .map(|(p, _)| bd(*p))
                .sum();
        }
        let mut best = bd(pos[i]) + go(i + 1, pos, neg, used, bd);
        for j in 0..neg.len() {
            if !used[j] {
                used[j] = true;
                let d = (pos[i][0] - neg[j][0]).hypot(pos[i][1] - neg[j][1]);
                best = best.min(d + go(i + 1, pos, neg, used, bd));
                used[j] = false;
            }
        }
        best
    }
    PI * go(0, pos, neg, &mut vec![false; neg.len()], bd)
}

/// Uniform point in the disc of radius `r` around the origin.
pub fn point_in_disc<R: Rng + ?Sized>(rng: &mut R, r: f64) -> [f64; 2] {
    loop {
        let p = [rng.random_range(-r..r), rng.random_range(-r..r)];
        if p[0].hypot(p[1]) < r {
            return p;
        }
    }
}

/// `1/2 sum cross(v_k, v_{k+1})` around a closed loop of values.
pub fn loop_area(values: &[[f64; 2]]) -> f64 {
    let n = values.len();
    0.5 * (0..n)
        .map(|k| {
            let (a, b) = (values[k], values[(k + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Up to `max` unit charges, sign chosen at random, at points drawn by `point`.
pub fn random_unit_atoms(
    rng: &mut impl Rng,
    max: usize,
    mut point: impl FnMut(&mut dyn rand::RngCore) -> [f64; 2],
) -> Vec<vortexlab::fields::Atom> {
    let n = rng.random_range(0..=max);
    (0..n)
        .map(|_| {
            let p = point(&mut *rng);
            let d = if rng.random_bool(0.5) { 1 } else { -1 };
            vortexlab::fields::Atom::new(p[0], p[1], d)
        })
        .collect()
}

/// Positive and negative unit charges of `a - b`.
pub fn charges_of_difference(
    a: &[vortexlab::fields::Atom],
    b: &[vortexlab::fields::Atom],
) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (atoms, sign) in [(a, 1), (b, -1)] {
        for at in atoms {
            let s = at.degree.signum() * sign;
            for _ in 0..at.degree.unsigned_abs() {
                if s > 0 {
                    pos.push(at.position)
                } else {
                    neg.push(at.position)
                }
            }
        }
    }
    (pos, neg)
}
