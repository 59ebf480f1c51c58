//! Inverse multiquadric interpolant on the sphere: shape and normal errors
//! for the smooth 3D test object.

use membrane::mechanics::frame_3d;
use membrane::points::fibonacci_sphere;
use membrane::rbf::{rbf_eval_3d, RadialKernel, RbfSolver3D};
use membrane::shapes::{reference_jet_3d, Jet3D, Partial, TestObject3D};

fn main() -> membrane::Result<()> {
    let object = TestObject3D::object1();
    let sites = fibonacci_sphere(1024)?;
    let nodes = fibonacci_sphere(256)?;
    let data: Vec<_> = nodes.points().iter().map(|p| object.eval(p.lambda, p.theta)).collect();
    let col = |i: usize| data.iter().map(|v| v[i]).collect::<Vec<f64>>();

    let solver = RbfSolver3D::new(&nodes, RadialKernel::imq(0.9)?)?;
    let s = solver.fit(&col(0), &col(1), &col(2))?;
    println!("cholesky: {}, cond {:.2e}", solver.is_cholesky(), solver.condition());

    let partials: Vec<Vec<_>> = Partial::ALL.iter().map(|&p| rbf_eval_3d(&s, &sites, p)).collect();
    let (mut shape, mut normal) = (0.0f64, 0.0f64);
    for (j, p) in sites.points().iter().enumerate() {
        let jet = Jet3D::from_partials(std::array::from_fn(|k| partials[k][j]));
        let exact = reference_jet_3d(&object, p.lambda, p.theta).jet;
        shape = shape.max((jet.x - object.eval(p.lambda, p.theta)).norm());
        normal = normal.max((frame_3d(&jet)?.normal - frame_3d(&exact)?.normal).norm());
    }
    println!("N = 256, M = 1024: max shape error {shape:.3e}, max normal error {normal:.3e}");
    Ok(())
}
