//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use gptkit::channels::{measure_and_prepare, measurement_from_effects, Channel, Measurement};
use gptkit::effects::effect_algebra;
use gptkit::geometry::{vector, Matrix, Vector};
use gptkit::models::{square_reflection, square_rotation};
use gptkit::state_space::{boxworld_square, StateSpace};
use rand::Rng;

pub const TOL: f64 = 1e-9;

/// Dirichlet(1, …, 1) weights.
pub fn simplex_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn mix(points: &[Vector], w: &[f64]) -> Vector {
    points
        .iter()
        .zip(w)
        .fold(Vector::zeros(points[0].len()), |acc, (p, &t)| acc + p * t)
}

pub fn random_state(rng: &mut impl Rng, k: &StateSpace) -> Vector {
    let w = simplex_weights(rng, k.num_vertices());
    mix(k.vertices(), &w)
}

pub fn random_effect(rng: &mut impl Rng, k: &StateSpace) -> Vector {
    let alg = effect_algebra(k).unwrap();
    let w = simplex_weights(rng, alg.effect_vertices.len());
    mix(&alg.effect_vertices, &w)
}

pub fn random_functional(rng: &mut impl Rng, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn two_outcome(k: &StateSpace, f: Vector) -> Measurement {
    let g = k.unit() - &f;
    measurement_from_effects(k, &[f, g], TOL).unwrap()
}

/// `{f, 1 − f}` with `f` a random effect on `k`.
pub fn random_dichotomic(rng: &mut impl Rng, k: &StateSpace) -> Measurement {
    two_outcome(k, random_effect(rng, k))
}

/// A pair of two-outcome square measurements, incompatible about half the time.
pub fn random_square_pair(rng: &mut impl Rng) -> (Measurement, Measurement) {
    let k = boxworld_square();
    if rng.gen_bool(0.5) {
        let (a, b) = random_compatible_square_pair(rng);
        (a, b)
    } else {
        // noisy f_x / f_y with random visibility around the threshold
        let t: f64 = rng.gen_range(0.3..1.0);
        let u = k.unit();
        let fx = vector(&[1.0, 0.0, 0.0]) * t + &u * ((1.0 - t) / 2.0);
        let fy = vector(&[0.0, 1.0, 0.0]) * t + &u * ((1.0 - t) / 2.0);
        let (fx, fy) = if rng.gen_bool(0.5) { (fx, fy) } else { (&u - fx, fy) };
        (two_outcome(&k, fx), two_outcome(&k, fy))
    }
}

/// Two coarse-grainings of one four-outcome measurement, hence compatible.
pub fn random_compatible_square_pair(rng: &mut impl Rng) -> (Measurement, Measurement) {
    let k = boxworld_square();
    let u = k.unit();
    let a: f64 = rng.gen_range(0.0..1.0);
    let fx = vector(&[1.0, 0.0, 0.0]);
    let fy = vector(&[0.0, 1.0, 0.0]);
    let fine = [&fx * a, (&u - &fx) * a, &fy * (1.0 - a), (&u - &fy) * (1.0 - a)];
    let coarse = |rng: &mut dyn rand::RngCore| -> Vector {
        let p: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
        mix(&fine, &p)
    };
    let f = coarse(rng);
    let g = coarse(rng);
    (two_outcome(&k, f), two_outcome(&k, g))
}

/// The eight symmetries of the square.
pub fn dihedral() -> Vec<Matrix> {
    let r = square_rotation().matrix;
    let m = square_reflection().matrix;
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..2 {
            out.push(r.pow(a) * m.pow(b));
        }
    }
    out
}

/// Random channel on the square: a convex mixture of symmetries, constant
/// channels and measure-and-prepare channels.
pub fn random_square_channel(rng: &mut impl Rng) -> Channel {
    let k = boxworld_square();
    let mut pieces: Vec<Matrix> = Vec::new();
    for g in dihedral() {
        if rng.gen_bool(0.4) {
            pieces.push(g);
        }
    }
    for _ in 0..rng.gen_range(0..3) {
        let z = random_state(rng, &k);
        pieces.push(Channel::constant(&k, &k, &z, TOL).unwrap().matrix);
    }
    for _ in 0..rng.gen_range(0..3) {
        let m = random_dichotomic(rng, &k);
        let states = [random_state(rng, &k), random_state(rng, &k)];
        pieces.push(measure_and_prepare(&m, &states, &k, TOL).unwrap().matrix);
    }
    if pieces.is_empty() {
        pieces.push(Matrix::identity(3, 3));
    }
    let w = simplex_weights(rng, pieces.len());
    let mut matrix = pieces.iter().zip(&w).fold(Matrix::zeros(3, 3), |acc, (p, &t)| acc + p * t);
    matrix.set_row(2, &vector(&[0.0, 0.0, 1.0]).transpose());
    Channel { domain: k.clone(), codomain: k, matrix }
}

/// Random classical channel `S_n → S_m` in the lifted simplex coordinates:
/// column-stochastic on the vertices.
pub fn random_classical_channel(rng: &mut impl Rng, a: &StateSpace, b: &StateSpace) -> Channel {
    let images: Vec<Vector> = a.vertices().iter().map(|_| random_state(rng, b)).collect();
    let src = a.vertex_matrix();
    let dst = Matrix::from_columns(&images);
    let matrix = dst * src.try_inverse().unwrap();
    gptkit::channels::validate_channel(&matrix, a, b, 1e-9).unwrap()
}
