//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so each criterion prints its verdict,
//! measured values and wall time even when an earlier one fails.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use common::*;
use gstrand_core::algebra::{
    ad_se3, ad_so3, ad_so4, adstar_se3, cross_pair_se3, hat3, hat4_se3, hat4_so4, pair_so4, AlgPair,
};
use gstrand_core::conservation::{var_deriv_fd_check, Monitor};
use gstrand_core::discretization::integrate_scalar;
use gstrand_core::dynamics::{
    check_se2_split, reconstruct_from_strains, steps_for, uniformity_defect, PolySpec, Se3Params, So3Params,
    So4Ex1Params, So4Ex2Params,
};
use gstrand_core::integrability::{constraint_residuals, riccati_densities, zcr_residual_discrete, zcr_residual_semidiscrete};
use gstrand_core::{Closure, DerivOp, FieldVec3, GridSpec, Group, Integrator, Mat4, Scheme, StrandState, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn ratio_ok(r: f64) -> bool {
    (16.0 * 0.7..=16.0 * 1.3).contains(&r)
}

// 3x3 helpers for the matrix side of the hat-map check
fn mat3_mul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    r
}

fn mat3_comm_diff(a: [[f64; 3]; 3], b: [[f64; 3]; 3], c: [[f64; 3]; 3]) -> f64 {
    let (ab, ba) = (mat3_mul(a, b), mat3_mul(b, a));
    let mut m: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max((ab[i][j] - ba[i][j] - c[i][j]).abs());
        }
    }
    m
}

fn c1_algebra() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = BTreeMap::<&str, f64>::new();
    let mut note = |k: &'static str, v: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max(v);
    };
    for _ in 0..1000 {
        let (x, y, z) = (rand_vec(&mut rng, 1.0), rand_vec(&mut rng, 1.0), rand_vec(&mut rng, 1.0));
        // so(3)
        let jac = ad_so3(x, ad_so3(y, z)) + ad_so3(y, ad_so3(z, x)) + ad_so3(z, ad_so3(x, y));
        note("jacobi", jac.max_abs());
        note("antisymmetry", (ad_so3(x, y) + ad_so3(y, x)).max_abs());
        note("hat", mat3_comm_diff(hat3(x).to_matrix(), hat3(y).to_matrix(), hat3(ad_so3(x, y)).to_matrix()));
        note("bi-invariance", (ad_so3(x, y).dot(z) - x.dot(ad_so3(y, z))).abs());

        let pr = |rng: &mut ChaCha8Rng, f: fn(Vec3, Vec3) -> AlgPair| f(rand_vec(rng, 1.0), rand_vec(rng, 1.0));
        // so(4)
        let (p, q, r) = (pr(&mut rng, AlgPair::so4), pr(&mut rng, AlgPair::so4), pr(&mut rng, AlgPair::so4));
        let b = |u: AlgPair, v: AlgPair| ad_so4(u, v).unwrap();
        note("jacobi", (b(p, b(q, r)) + b(q, b(r, p)) + b(r, b(p, q))).norm());
        note("antisymmetry", (b(p, q) + b(q, p)).norm());
        note("hat", hat4_so4(p).commutator(&hat4_so4(q)).sub(&hat4_so4(b(p, q))).max_abs());
        note("bi-invariance", (pair_so4(b(p, q), r) - pair_so4(p, b(q, r))).abs());
        // se(3)
        let (p, q, r) = (pr(&mut rng, AlgPair::se3), pr(&mut rng, AlgPair::se3), pr(&mut rng, AlgPair::se3));
        let b = |u: AlgPair, v: AlgPair| ad_se3(u, v).unwrap();
        note("jacobi", (b(p, b(q, r)) + b(q, b(r, p)) + b(r, b(p, q))).norm());
        note("antisymmetry", (b(p, q) + b(q, p)).norm());
        note("hat", hat4_se3(p).commutator(&hat4_se3(q)).sub(&hat4_se3(b(p, q))).max_abs());
        // ⟨ad*_ξ μ, η⟩ = ⟨μ, ad_ξ η⟩ under the cross pairing, with ad* = −ad
        let (xi, mu, eta) = (p, q, r);
        note("ad*/ad", (cross_pair_se3(adstar_se3(xi, mu).unwrap(), eta) - cross_pair_se3(mu, b(xi, eta))).abs());
    }
    let max = worst.values().fold(0.0f64, |m, &v| m.max(v));
    let detail = worst.iter().map(|(k, v)| format!("{k}={v:.1e}")).collect::<Vec<_>>().join(" ");
    verdict(max <= 1e-12, detail)
}

fn c2_constraints() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let grid = GridSpec::new(64, 1.0).unwrap();
    let mut worst = BTreeMap::<String, f64>::new();
    for _ in 0..100 {
        for c in integrable_closures(&mut rng) {
            let st = smooth_state(&mut rng, c.group(), grid, 1.0, 4);
            let r = constraint_residuals(&st, &c.diagnostics(&st).unwrap(), &c).unwrap();
            let e = worst.entry(c.name().to_string()).or_insert(0.0);
            *e = e.max(r.max());
        }
    }
    let mut smk_min = f64::INFINITY;
    for _ in 0..100 {
        let c = Closure::Smk(random_smk(&mut rng));
        let st = smooth_state(&mut rng, Group::Se3, grid, 1.0, 4);
        smk_min = smk_min.min(constraint_residuals(&st, &c.diagnostics(&st).unwrap(), &c).unwrap().r3);
    }
    let ok = worst.values().all(|&v| v <= 1e-12) && smk_min > 1e-3;
    let mut detail = worst.iter().map(|(k, v)| format!("{k}={v:.1e}")).collect::<Vec<_>>().join(" ");
    detail.push_str(&format!(" smk_min_r3={smk_min:.2e}"));
    verdict(ok, detail)
}

fn c3_semidiscrete_zcr() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let grid = GridSpec::new(128, 1.0).unwrap();
    let lambdas = [0.5, 1.0, 2.0, 5.0];
    let mut worst = BTreeMap::<String, f64>::new();
    let mut secs = BTreeMap::<String, f64>::new();
    for c in integrable_closures(&mut rng) {
        let t0 = Instant::now();
        let st = smooth_state(&mut rng, c.group(), grid, 0.5, 3);
        let it = Integrator::new(c.clone(), grid, Scheme::Spectral, 2e-3).unwrap();
        let mut w: f64 = 0.0;
        let mut sample = |s: &StrandState| {
            for &l in &lambdas {
                w = w.max(zcr_residual_semidiscrete(s, &c, it.deriv(), l).unwrap());
            }
        };
        sample(&st);
        it.run(st, 250, |k, s| {
            if k % 25 == 0 {
                sample(s)
            }
        })
        .unwrap();
        worst.insert(c.name().to_string(), w);
        secs.insert(c.name().to_string(), t0.elapsed().as_secs_f64());
    }
    let ok = worst.values().all(|&v| v <= 1e-10) && secs.values().all(|&s| s < 30.0);
    let detail = worst.iter().map(|(k, v)| format!("{k}={v:.1e} ({:.2}s)", secs[k])).collect::<Vec<_>>().join(" ");
    verdict(ok, detail)
}

fn so3_generic() -> So3Params {
    So3Params { a: Vec3::new(0.6, 0.3, 0.7), mu: 0.3, nu: 0.5, f: PolySpec::new(vec![0.0, 0.2, 0.5, 0.3]).unwrap() }
}

fn c4_discrete_zcr() -> Verdict {
    let grid = GridSpec::new(128, 1.0).unwrap();
    let c = Closure::So3(so3_generic());
    let t_mid = 0.2;
    let residual = |st0: &StrandState, dt: f64| -> f64 {
        let it = Integrator::new(c.clone(), grid, Scheme::Spectral, dt).unwrap();
        let k_mid = steps_for(t_mid, dt).unwrap();
        let mut snaps = vec![];
        it.run(st0.clone(), k_mid + 2, |k, s| {
            if k + 2 >= k_mid {
                snaps.push(s.clone());
            }
        })
        .unwrap();
        zcr_residual_discrete(&snaps, &c, it.deriv(), dt, 1.0).unwrap()
    };
    // The stencil error scales with the fifth time derivative of L, so the
    // absolute bound is checked on moderate data (modes k <= 2). Rougher data
    // (k <= 3) is reported for its order only.
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let moderate = smooth_state(&mut rng, Group::So3, grid, 0.5, 2);
    let rough = smooth_state(&mut rng, Group::So3, grid, 0.8, 3);
    let dts = [4e-3, 2e-3, 1e-3];
    let mut ok = true;
    let mut parts = vec![];
    for (label, st0) in [("moderate", &moderate), ("rough", &rough)] {
        let r: Vec<f64> = dts.iter().map(|&dt| residual(st0, dt)).collect();
        let orders: Vec<f64> = r.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        ok &= orders.iter().all(|&o| o >= 3.5);
        if label == "moderate" {
            ok &= r[2] <= 1e-6;
        }
        parts.push(format!("{label}: residual(dt=4e-3,2e-3,1e-3)={:.2e},{:.2e},{:.2e} orders={:.2},{:.2}", r[0], r[1], r[2], orders[0], orders[1]));
    }
    verdict(ok, parts.join("; "))
}

/// Largest relative drift of each monitored quantity over a run, sampled
/// every 10 steps.
fn max_drift(c: &Closure, st: &StrandState, dt: f64, t_end: f64) -> BTreeMap<String, f64> {
    let it = Integrator::new(c.clone(), st.grid(), Scheme::Spectral, dt).unwrap();
    let mut m = Monitor::new(c.clone());
    m.observe(0.0, st).unwrap();
    let mut worst = BTreeMap::new();
    it.run(st.clone(), steps_for(t_end, dt).unwrap(), |k, s| {
        if k % 10 == 0 {
            for (key, v) in m.observe(k as f64 * dt, s).unwrap().relative_drift {
                let e = worst.entry(key).or_insert(0.0f64);
                *e = e.max(v);
            }
        }
    })
    .unwrap();
    worst
}

// Quantities whose drift is at roundoff level (linear invariants that RK4
// preserves exactly) carry no order information.
const ROUNDOFF_DRIFT: f64 = 1e-12;

fn c5_conservation() -> Verdict {
    let grid = GridSpec::new(128, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let st = smooth_state(&mut rng, Group::So3, grid, 0.8, 3);
    let c = Closure::So3(so3_generic());
    let t0 = Instant::now();
    let d1 = max_drift(&c, &st, 1e-3, 1.0);
    let d2 = max_drift(&c, &st, 5e-4, 1.0);
    let so3_secs = t0.elapsed().as_secs_f64();
    let mut ok = so3_secs < 60.0;
    let mut parts = vec![];
    for (k, &v) in &d1 {
        ok &= v <= 1e-6;
        if v > ROUNDOFF_DRIFT {
            let ratio = v / d2[k];
            ok &= ratio_ok(ratio);
            parts.push(format!("{k}={v:.1e} ratio={ratio:.1}"));
        } else {
            parts.push(format!("{k}={v:.1e} (exact, no ratio)"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let others = [
        Closure::So4Ex1(So4Ex1Params { a1: Vec3::new(0.5, 0.2, -0.3), a2: Vec3::new(-0.1, 0.4, 0.6), mu: 0.3, nu: 0.5, f: PolySpec::new(vec![0.0, 0.2, 0.5, 0.3]).unwrap() }),
        Closure::So4Ex2(So4Ex2Params { a: Vec3::new(0.6, 0.0, 0.3), b: Vec3::new(0.0, 0.5, -0.4), nu: 0.5, mu: 0.3, sigma: -0.4 }),
        Closure::Se3(Se3Params { a1: Vec3::new(0.5, -0.3, 0.2), a2: Vec3::new(0.1, 0.6, 0.4), mu: 0.3, nu: 0.5, f: PolySpec::new(vec![0.0, 0.2, 0.5, 0.3]).unwrap() }),
    ];
    for c in others {
        let t0 = Instant::now();
        let st = smooth_state(&mut rng, c.group(), grid, 0.5, 3);
        let d = max_drift(&c, &st, 1e-3, 1.0);
        let secs = t0.elapsed().as_secs_f64();
        ok &= d["h"] <= 1e-6 && secs < 60.0;
        parts.push(format!("{}:h={:.1e}", c.name(), d["h"]));
    }
    verdict(ok, parts.join(" "))
}

fn c6_riccati() -> Verdict {
    let grid = GridSpec::new(128, 1.0).unwrap();
    let d = DerivOp::new(grid, Scheme::Spectral).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut e_m1, mut e0, mut e1): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for trial in 0..20 {
        let mut p = random_so3(&mut rng);
        if trial % 5 == 0 {
            p.a = Vec3::new(0.0, 0.0, 1.3); // exercises the rotated frame
        }
        let st = smooth_state(&mut rng, Group::So3, grid, 1.0, 4);
        let r = riccati_densities(&st, &p, &d).unwrap();
        let StrandState::So3 { pi, gamma } = &st else { unreachable!() };
        let a = p.a;
        let an = a.norm();
        // closed-form integrands, written out independently of the library
        let mut h0 = vec![];
        let mut h1 = vec![];
        for j in 0..grid.n {
            let (pv, gv) = (pi.values[j], gamma.values[j]);
            let ap = a.dot(pv);
            e_m1 = e_m1.max((r.rho_m1[j] - ap / an).norm());
            let cr = a.cross(pv);
            let d0 = cr.dot(cr) / (2.0 * an * an) + a.dot(gv);
            h0.push(d0);
            h1.push(pv.dot(gv) - ap / (an * an) * d0);
        }
        let int = |v: Vec<f64>| integrate_scalar(grid, &v);
        let i0 = int(r.rho_0.iter().map(|z| z.re).collect());
        let i0_im = int(r.rho_0.iter().map(|z| z.im).collect());
        let i1 = int(r.rho_1.iter().map(|z| z.re).collect());
        let i1_im = int(r.rho_1.iter().map(|z| z.im).collect());
        e0 = e0.max((i0 - int(h0) / an).abs()).max(i0_im.abs());
        e1 = e1.max((i1 - int(h1) / an).abs()).max(i1_im.abs());
    }
    verdict(e_m1 <= 1e-10 && e0 <= 1e-9 && e1 <= 1e-9, format!("rho_m1={e_m1:.1e} int_rho0={e0:.1e} int_rho1={e1:.1e}"))
}

fn c7_var_deriv() -> Verdict {
    let grid = GridSpec::new(32, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = BTreeMap::<String, f64>::new();
    for _ in 0..20 {
        let mut cs = integrable_closures(&mut rng);
        cs.push(Closure::Smk(random_smk(&mut rng)));
        for c in cs {
            let st = smooth_state(&mut rng, c.group(), grid, 1.0, 3);
            let e = var_deriv_fd_check(&st, &c).unwrap();
            let w = worst.entry(c.name().to_string()).or_insert(0.0);
            *w = w.max(e);
        }
    }
    let detail = worst.iter().map(|(k, v)| format!("{k}={v:.1e}")).collect::<Vec<_>>().join(" ");
    verdict(worst.values().all(|&v| v <= 1e-5), detail)
}

fn c8_reductions() -> Verdict {
    // (a) SE(2): Π, Ω along ẑ; M, Γ in the plane
    let grid = GridSpec::new(64, 1.0).unwrap();
    let tau = 2.0 * PI;
    let normal = |c: f64, k: f64| FieldVec3::from_fn(grid, move |s| Vec3::new(0.0, 0.0, c + 0.3 * (k * tau * s).sin()));
    let planar = |c: f64, k: f64| FieldVec3::from_fn(grid, move |s| Vec3::new(c + 0.2 * (k * tau * s).cos(), 0.4 * (tau * s).sin(), 0.0));
    let st = StrandState::Se3 { pi: normal(0.5, 1.0), mom: planar(0.3, 2.0), omega: normal(1.0, 2.0), gamma: planar(1.0, 1.0) };
    let c = Closure::Se3(Se3Params { a1: Vec3::new(0.7, -0.4, 0.0), a2: Vec3::new(0.0, 0.0, 0.9), mu: 0.0, nu: 0.0, f: PolySpec::new(vec![0.0, 0.3, 0.4, 0.2]).unwrap() });
    let it = Integrator::new(c, grid, Scheme::Spectral, 5e-3).unwrap();
    let mut split: f64 = 0.0;
    it.run(st, 1000, |_, s| split = split.max(check_se2_split(s).unwrap())).unwrap();

    // (b) uniform data stays uniform on a spatial grid
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut uniform: f64 = 0.0;
    for c in integrable_closures(&mut rng) {
        let n = c.group().field_names().len();
        let fields = (0..n).map(|_| FieldVec3::constant(grid, rand_vec(&mut rng, 0.5))).collect();
        let st = StrandState::from_fields(c.group(), fields).unwrap();
        for scheme in [Scheme::Central4, Scheme::Spectral] {
            let it = Integrator::new(c.clone(), grid, scheme, 5e-3).unwrap();
            it.run(st.clone(), 200, |_, s| uniform = uniform.max(uniformity_defect(s))).unwrap();
        }
    }

    // SO(4) ODE mode: Casimirs of the momentum pair, strain pair at rest
    let point = GridSpec::point(1.0);
    let p = So4Ex1Params { a1: Vec3::new(0.4, -0.2, 0.7), a2: Vec3::new(0.1, 0.5, -0.3), mu: 0.6, nu: 0.4, f: PolySpec::new(vec![0.0, 0.2, 0.5]).unwrap() };
    let c = Closure::So4Ex1(p);
    let st = StrandState::So4 {
        pi: FieldVec3::constant(point, Vec3::new(1.0, 0.3, -0.5)),
        xi: FieldVec3::constant(point, Vec3::new(-0.2, 0.8, 0.4)),
        omega: FieldVec3::zeros(point),
        gamma: FieldVec3::zeros(point),
    };
    let casimir_drift = |dt: f64| max_drift_ode(&c, &st, dt, 10.0);
    let (d1, d2) = (casimir_drift(0.02), casimir_drift(0.01));
    let r1 = d1.0 / d2.0;
    let r2 = d1.1 / d2.1;
    // O(dt⁴) is an upper bound: accept any measured order of at least 4 − 0.3.
    let at_least_fourth = |r: f64| r.log2() >= 3.7;
    let ok = split <= 1e-12 && uniform <= 1e-13 && at_least_fourth(r1) && at_least_fourth(r2);
    verdict(ok, format!("se2_split={split:.1e} uniform={uniform:.1e} C1 drift={:.1e} order={:.2} C2 drift={:.1e} order={:.2}", d1.0, r1.log2(), d1.1, r2.log2()))
}

fn max_drift_ode(c: &Closure, st: &StrandState, dt: f64, t_end: f64) -> (f64, f64) {
    let d = max_drift(c, st, dt, t_end);
    (d["C1"], d["C2"])
}

fn c9_advection() -> Verdict {
    let grid = GridSpec::new(64, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let st = smooth_state(&mut rng, Group::So3, grid, 1.0, 4);
    let c = Closure::So3(So3Params { a: Vec3::E3, mu: 0.0, nu: 0.0, f: PolySpec::zero() });
    let err = |dt: f64| {
        let it = Integrator::new(c.clone(), grid, Scheme::Spectral, dt).unwrap();
        it.run(st.clone(), steps_for(1.0, dt).unwrap(), |_, _| {}).unwrap().max_diff(&st)
    };
    let (e1, e2) = (err(1.0 / 200.0), err(1.0 / 400.0));
    let order = (e1 / e2).log2();
    verdict((order - 4.0).abs() <= 0.3 && e2 < 1e-5, format!("err(dt=1/200)={e1:.2e} err(dt=1/400)={e2:.2e} order={order:.2}"))
}

fn c10_filament() -> Verdict {
    let grid = GridSpec::new(256, 3.0).unwrap();
    let line = reconstruct_from_strains(&FieldVec3::zeros(grid), &FieldVec3::constant(grid, Vec3::E1), Mat4::identity()).unwrap();
    let e_line = line.s.iter().zip(&line.points).fold(0.0f64, |m, (&s, p)| m.max((*p - s * Vec3::E1).max_abs()));
    let kappa = 2.0;
    let arc = reconstruct_from_strains(&FieldVec3::constant(grid, kappa * Vec3::E3), &FieldVec3::constant(grid, Vec3::E1), Mat4::identity()).unwrap();
    let e_arc = arc.s.iter().zip(&arc.points).fold(0.0f64, |m, (&s, p)| {
        let want = Vec3::new((kappa * s).sin() / kappa, (1.0 - (kappa * s).cos()) / kappa, 0.0);
        m.max((*p - want).max_abs())
    });
    verdict(e_line <= 1e-8 && e_arc <= 1e-8, format!("line={e_line:.1e} arc={e_arc:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict, f64); 10] = [
        ("algebra identities", c1_algebra, 1.0),
        ("constraint hierarchy", c2_constraints, 5.0),
        ("semi-discrete zero curvature", c3_semidiscrete_zcr, 120.0),
        ("fully discrete zero curvature", c4_discrete_zcr, 60.0),
        ("conservation", c5_conservation, 240.0),
        ("Riccati hierarchy", c6_riccati, 5.0),
        ("variational derivatives", c7_var_deriv, 120.0),
        ("reductions", c8_reductions, 30.0),
        ("advection", c9_advection, 10.0),
        ("filament reconstruction", c10_filament, 5.0),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let v = run();
        let secs = t0.elapsed().as_secs_f64();
        let pass = v.pass && secs < *budget;
        if !pass {
            failed += 1;
        }
        println!("criterion {:>2} [{}] {name}: {} ({secs:.2}s)", i + 1, if pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
