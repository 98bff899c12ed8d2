//! Fixed inputs shared by the benchmarks.

use gstrand_core::discretization::synth_field;
use gstrand_core::dynamics::{PolySpec, So3Params};
use gstrand_core::{FourierModeSpec, GridSpec, Group, StrandState, Vec3};

/// A smooth so3 state with a few low modes in every component.
pub fn so3_state(grid: GridSpec) -> StrandState {
    let field = |shift: f64| {
        let modes: Vec<FourierModeSpec> = (0..3)
            .flat_map(|component| {
                (1..=3).map(move |k| FourierModeSpec {
                    component,
                    wavenumber: k,
                    amplitude: 0.4 / k as f64,
                    phase: shift + component as f64,
                })
            })
            .collect();
        synth_field(grid, &modes, Vec3::new(0.1, -0.2, 0.3)).unwrap()
    };
    StrandState::from_fields(Group::So3, vec![field(0.0), field(1.3)]).unwrap()
}

pub fn so3_closure() -> So3Params {
    So3Params {
        a: Vec3::new(0.3, -0.5, 0.8),
        mu: 0.2,
        nu: 0.5,
        f: PolySpec::new(vec![0.0, 0.1, -0.2, 0.05]).unwrap(),
    }
}
