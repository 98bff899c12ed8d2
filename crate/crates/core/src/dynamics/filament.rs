//! Rebuild the rod centerline from its strains.

use crate::algebra::{hat4_se3, AlgPair, Mat4, Vec3};
use crate::discretization::FieldVec3;
use crate::dynamics::state::StrandState;
use crate::error::{GStrandError, Result};

/// Reconstructed curve. `points[j]` and `frames[j]` sit at `s[j]`,
/// `j = 0..=n`; the last entry is the image of `s = L`.
#[derive(Clone, Debug)]
pub struct Filament {
    pub s: Vec<f64>,
    pub points: Vec<Vec3>,
    pub frames: Vec<Mat4>,
    /// Frobenius distance between the end frame and the start frame. Zero
    /// for a closed, untwisted rod.
    pub closure_gap: f64,
}

const FRAME_TOL: f64 = 1e-10;

fn check_frame(g: &Mat4) -> Result<()> {
    let m = &g.0;
    if m[3] != [0.0, 0.0, 0.0, 1.0] {
        return Err(GStrandError::InvalidFrame("bottom row must be (0, 0, 0, 1)".into()));
    }
    let r = g.rotation();
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - want).abs() > FRAME_TOL {
                return Err(GStrandError::InvalidFrame("rotation block is not orthonormal".into()));
            }
        }
    }
    let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
    if det < 0.0 {
        return Err(GStrandError::InvalidFrame("rotation block has determinant -1".into()));
    }
    Ok(())
}

/// Gram–Schmidt on the columns of the rotation block.
fn reorthonormalize(g: &mut Mat4) {
    let col = |g: &Mat4, c: usize| Vec3::new(g.0[0][c], g.0[1][c], g.0[2][c]);
    let e0 = col(g, 0);
    let e0 = (1.0 / e0.norm()) * e0;
    let e1 = col(g, 1);
    let e1 = e1 - e0.dot(e1) * e0;
    let e1 = (1.0 / e1.norm()) * e1;
    let e2 = e0.cross(e1);
    for (c, e) in [e0, e1, e2].into_iter().enumerate() {
        for i in 0..3 {
            g.0[i][c] = e[i];
        }
    }
}

// periodic 4-point midpoint value between j and j+1
fn midpoint(f: &FieldVec3, j: usize) -> Vec3 {
    let n = f.len();
    let at = |k: isize| f.values[k.rem_euclid(n as isize) as usize];
    let j = j as isize;
    (1.0 / 16.0) * (-1.0 * at(j - 1) + 9.0 * at(j) + 9.0 * at(j + 1) - 1.0 * at(j + 2))
}

/// Integrate `g_s = g·(Ω, Γ)^` from `g(0) = g0` with RK4 in `s`.
pub fn reconstruct_from_strains(omega: &FieldVec3, gamma: &FieldVec3, g0: Mat4) -> Result<Filament> {
    check_frame(&g0)?;
    if omega.grid != gamma.grid {
        return Err(GStrandError::GridMismatch);
    }
    let grid = omega.grid;
    let n = grid.n;
    if n < 2 {
        return Err(GStrandError::InvalidGrid("filament reconstruction needs a spatial grid".into()));
    }
    let ds = grid.ds();
    let xi = |w: Vec3, g: Vec3| hat4_se3(AlgPair::se3(w, g));

    let mut g = g0;
    let mut frames = Vec::with_capacity(n + 1);
    frames.push(g);
    for j in 0..n {
        let x0 = xi(omega.values[j], gamma.values[j]);
        let xm = xi(midpoint(omega, j), midpoint(gamma, j));
        let x1 = xi(omega.values[(j + 1) % n], gamma.values[(j + 1) % n]);
        let k1 = g.mul(&x0);
        let k2 = g.add(&k1.scale(0.5 * ds)).mul(&xm);
        let k3 = g.add(&k2.scale(0.5 * ds)).mul(&xm);
        let k4 = g.add(&k3.scale(ds)).mul(&x1);
        let incr = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4).scale(ds / 6.0);
        g = g.add(&incr);
        reorthonormalize(&mut g);
        frames.push(g);
    }
    let closure_gap = frames[n].sub(&frames[0]).frobenius();
    Ok(Filament {
        s: (0..=n).map(|j| j as f64 * ds).collect(),
        points: frames.iter().map(Mat4::translation).collect(),
        frames,
        closure_gap,
    })
}

/// Centerline of an se3 state, built from its strain pair `(Ω, Γ)`.
pub fn reconstruct_filament(state: &StrandState, g0: Mat4) -> Result<Filament> {
    match state {
        StrandState::Se3 { omega, gamma, .. } => reconstruct_from_strains(omega, gamma, g0),
        other => Err(GStrandError::GroupMismatch(format!(
            "filament reconstruction needs an se3 state, got {}",
            other.group()
        ))),
    }
}
