//! Normals, fiber force and surface tension force from exact jets.

use membrane::mechanics::{fiber_force_2d, frame_2d, frame_3d, fundamental_forms, mean_curvature, surface_tension_force, MaterialParams};
use membrane::shapes::{reference_jet_3d_of, IdealShape3D, Jet2D};
use nalgebra::Vector2;

fn main() -> membrane::Result<()> {
    let params = MaterialParams::new(2.0, 0.5)?;

    // Circle of radius 0.3: fiber force K0 r pointing to the center.
    let r = 0.3;
    let (s, c) = 0.7f64.sin_cos();
    let jet = Jet2D {
        x: Vector2::new(r * c, r * s),
        d1: Vector2::new(-r * s, r * c),
        d2: Vector2::new(-r * c, -r * s),
    };
    let f = fiber_force_2d(&jet, &params);
    println!("circle: |F| = {:.12} (K0 r = {}), normal {:.6?}", f.norm(), params.k0 * r, frame_2d(&jet)?.normal);

    // Sphere of radius 0.3: surface tension 2γ/r toward the center, from a
    // Richardson extrapolated jet.
    let sphere = IdealShape3D::new([0.0; 3], r, r, r)?;
    let jet = reference_jet_3d_of(|l, t| sphere.eval(l, t), 0.4, 0.2).jet;
    let frame = frame_3d(&jet)?;
    let h = mean_curvature(&fundamental_forms(&jet, &frame))?;
    let f = surface_tension_force(&jet, &params)?;
    println!(
        "sphere: H = {h:.10}, |F| = {:.10} (2 gamma / r = {:.10}), F . x = {:.3e}",
        f.norm(),
        2.0 * params.gamma / r,
        f.dot(&jet.x)
    );
    Ok(())
}
