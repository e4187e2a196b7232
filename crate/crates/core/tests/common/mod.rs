#![allow(dead_code)]

use std::f64::consts::PI;

use choreoqep::model::{construct_j4, j4_for_spectrum, LagrangianSpec};
use choreoqep::numkernel::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `d = 1`, `J1 = 1`, `J2 = −1`: `ẍ + x = 0`.
pub fn oscillator(n: usize) -> LagrangianSpec {
    LagrangianSpec::uncoupled(n, DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, -1.0)).unwrap()
}

pub fn planar_j123() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    (m2(7.0, 2.0, 2.0, 7.0), m2(5.0, -1.0, -1.0, 5.0), m2(8.0, 1.0, 1.0, 8.0))
}

/// Planar matrices with `J4` placing the particle roots at `±iω1, ±iω2`.
pub fn planar_with(n: usize, omega: (f64, f64), j4_free: f64, j7: [f64; 2]) -> LagrangianSpec {
    let (j1, j2, j3) = planar_j123();
    let j4 = construct_j4(&j1, &j2, &j3, omega.0, omega.1, j4_free).unwrap();
    LagrangianSpec::new(n, j1, j2, j3, j4, DMatrix::zeros(2, 2), DVector::zeros(2), DVector::from_vec(j7.to_vec())).unwrap()
}

/// Particle roots `±2i, ±5i`.
pub fn planar(n: usize) -> LagrangianSpec {
    planar_with(n, (2.0, 5.0), 25.0, [0.3, -0.2])
}

/// Random member of the planar family: fixed `J1..J3`, random target
/// frequencies, free entry and forcing.
pub fn random_planar(r: &mut ChaCha8Rng, n: usize) -> LagrangianSpec {
    let w1 = r.gen_range(1.0..3.0);
    let w2 = r.gen_range(3.5..6.0);
    // real J4 exists for ω1² ≤ free ≤ ω2² when J1 − 2J3 is a multiple of I
    let free = w1 * w1 + r.gen_range(0.1..0.9) * (w2 * w2 - w1 * w1);
    let j7 = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
    planar_with(n, (w1, w2), free, j7)
}

pub fn random_amplitudes(r: &mut ChaCha8Rng, count: usize) -> Vec<C64> {
    (0..count).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()
}

/// Three-dimensional system whose discrete particle pencil, for the central
/// difference at `ε = 2π/30`, has roots `±i{1,2,3,12,13,14}`.
pub fn spatial(n: usize) -> (LagrangianSpec, f64) {
    let eps = 2.0 * PI / 30.0;
    let j1 = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 6.0]);
    let j2 = DMatrix::identity(3, 3);
    let j3 = DMatrix::identity(3, 3) * 0.5;
    let kappas: Vec<f64> = (1..=3).map(|m| (m as f64 * eps).sin().powi(2) / (eps * eps)).collect();
    let j4 = j4_for_spectrum(&j1, &j2, &j3, &kappas).unwrap();
    let spec = LagrangianSpec::new(n, j1, j2, j3, j4, DMatrix::zeros(3, 3), DVector::zeros(3), DVector::from_vec(vec![0.1, 0.0, -0.2]))
        .unwrap();
    (spec, eps)
}

/// Boundary positions used by the planar experiments (rows are particles).
pub fn planar_boundary() -> (DMatrix<f64>, DMatrix<f64>) {
    (
        DMatrix::from_row_slice(3, 2, &[1.0, 0.0, -0.5, 0.8, -0.5, -0.8]),
        DMatrix::from_row_slice(3, 2, &[0.2, 1.0, -1.0, 0.1, 0.6, -0.9]),
    )
}

pub fn config_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}
