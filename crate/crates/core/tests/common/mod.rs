//! Shared generators for integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use gstrand_core::discretization::synth_field;
use gstrand_core::dynamics::{PolySpec, Se3Params, SmkParams, So3Params, So4Ex1Params, So4Ex2Params};
use gstrand_core::{Closure, FieldVec3, FourierModeSpec, GridSpec, Group, StrandState, Vec3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rand_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

/// Offset plus modes `1..=kmax` with amplitudes `amp/k`.
pub fn smooth_field(rng: &mut ChaCha8Rng, grid: GridSpec, amp: f64, kmax: i64) -> FieldVec3 {
    let mut modes = vec![];
    for component in 0..3 {
        for k in 1..=kmax {
            modes.push(FourierModeSpec {
                component,
                wavenumber: k,
                amplitude: amp * rng.gen_range(-1.0..1.0) / k as f64,
                phase: rng.gen_range(0.0..2.0 * PI),
            });
        }
    }
    let offset = rand_vec(rng, amp);
    synth_field(grid, &modes, offset).unwrap()
}

pub fn smooth_state(rng: &mut ChaCha8Rng, group: Group, grid: GridSpec, amp: f64, kmax: i64) -> StrandState {
    let n = group.field_names().len();
    let fields = (0..n).map(|_| smooth_field(rng, grid, amp, kmax)).collect();
    StrandState::from_fields(group, fields).unwrap()
}

pub fn poly(rng: &mut ChaCha8Rng, degree: usize, scale: f64) -> PolySpec {
    PolySpec::new((0..=degree).map(|_| rng.gen_range(-scale..scale)).collect()).unwrap()
}

pub fn random_so3(rng: &mut ChaCha8Rng) -> So3Params {
    So3Params { a: rand_vec(rng, 1.0), mu: rng.gen_range(-0.5..0.5), nu: rng.gen_range(-1.0..1.0), f: poly(rng, 4, 0.5) }
}

pub fn random_so4_ex1(rng: &mut ChaCha8Rng) -> So4Ex1Params {
    So4Ex1Params {
        a1: rand_vec(rng, 1.0),
        a2: rand_vec(rng, 1.0),
        mu: rng.gen_range(-0.5..0.5),
        nu: rng.gen_range(-1.0..1.0),
        f: poly(rng, 4, 0.5),
    }
}

pub fn random_so4_ex2(rng: &mut ChaCha8Rng) -> So4Ex2Params {
    loop {
        let (a, b) = (rand_vec(rng, 1.0), rand_vec(rng, 1.0));
        if a.cross(b).norm() > 0.1 {
            return So4Ex2Params { a, b, nu: rng.gen_range(-1.0..1.0), mu: rng.gen_range(-1.0..1.0), sigma: rng.gen_range(-1.0..1.0) };
        }
    }
}

pub fn random_se3(rng: &mut ChaCha8Rng) -> Se3Params {
    Se3Params {
        a1: rand_vec(rng, 1.0),
        a2: rand_vec(rng, 1.0),
        mu: rng.gen_range(-0.5..0.5),
        nu: rng.gen_range(-1.0..1.0),
        f: poly(rng, 4, 0.5),
    }
}

/// Diagonally dominant symmetric `J` and a symmetric `ψ` form.
pub fn random_smk(rng: &mut ChaCha8Rng) -> SmkParams {
    let mut p = SmkParams::identity();
    for i in 0..3 {
        for k in 0..i {
            let x = rng.gen_range(-0.3..0.3);
            p.j[i][k] = x;
            p.j[k][i] = x;
        }
        p.j[i][i] = rng.gen_range(1.0..2.0);
    }
    for i in 0..6 {
        for k in 0..=i {
            let x = rng.gen_range(-1.0..1.0);
            p.psi_q[i][k] = x;
            p.psi_q[k][i] = x;
        }
        p.psi_l[i] = rng.gen_range(-1.0..1.0);
    }
    p.probe_a1 = rand_vec(rng, 1.0);
    p.probe_a2 = rand_vec(rng, 1.0);
    p
}

pub fn integrable_closures(rng: &mut ChaCha8Rng) -> Vec<Closure> {
    vec![
        Closure::So3(random_so3(rng)),
        Closure::So4Ex1(random_so4_ex1(rng)),
        Closure::So4Ex2(random_so4_ex2(rng)),
        Closure::Se3(random_se3(rng)),
    ]
}
