//! Force signs at the cube from the fit-free box energy.

use pistonlab::piston::{pressure_long_shaft, rayleigh_dowker};
use pistonlab::regular::box_finite_part_exact;
use pistonlab::spectra::{BoxSpec, WallModel};

fn energy(wall: WallModel) -> impl Fn(f64) -> pistonlab::Result<f64> {
    move |a| box_finite_part_exact(&BoxSpec::new(a, 1.0, 1.0, wall)?)
}

fn gradient(f: impl Fn(f64) -> pistonlab::Result<f64>, a: f64) -> f64 {
    let h = 1e-3 * a;
    -(f(a + h).unwrap() - f(a - h).unwrap()) / (2.0 * h)
}

#[test]
fn permeable_cube_force_from_exact_energy() {
    let conducting = gradient(energy(WallModel::AllConducting), 1.0);
    let doubled = gradient(energy(WallModel::AllConducting), 2.0);
    let permeable = gradient(energy(WallModel::PermeablePiston), 1.0);
    assert!((permeable - (2.0 * doubled - conducting)).abs() < 1e-6);
    assert!(conducting > 0.0);
    assert!(permeable > 0.04 && permeable < 0.05, "{permeable}");
    assert!(permeable - pressure_long_shaft(1.0) > 0.0);
    assert!(conducting - pressure_long_shaft(1.0) < 0.0);
}

#[test]
fn permeable_energy_is_negative_at_the_cube() {
    let e = rayleigh_dowker(energy(WallModel::AllConducting), 1.0).unwrap();
    assert!((e - energy(WallModel::PermeablePiston)(1.0).unwrap()).abs() < 1e-9);
    assert!(e < 0.0);
}
