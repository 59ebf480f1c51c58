//! Spherical harmonic interpolant of the rough 3D test object on Fibonacci
//! nodes, with the interpolation matrix condition estimate.

use membrane::fourier::{sph_degree_for, sph_eval, SphSolver};
use membrane::points::fibonacci_sphere;
use membrane::shapes::{Partial, TestObject3D};

fn main() -> membrane::Result<()> {
    let object = TestObject3D::object2();
    let sites = fibonacci_sphere(1024)?;
    let truth: Vec<_> = sites.points().iter().map(|p| object.eval(p.lambda, p.theta)).collect();

    for n in [16, 36, 64, 121, 256] {
        let nodes = fibonacci_sphere(n)?;
        let degree = sph_degree_for(n).expect("perfect square");
        let solver = match SphSolver::new(&nodes, degree) {
            Ok(s) => s,
            Err(e) => {
                println!("N = {n:3}  refused: {e}");
                continue;
            }
        };
        let data: Vec<_> = nodes.points().iter().map(|p| object.eval(p.lambda, p.theta)).collect();
        let col = |i: usize| data.iter().map(|v| v[i]).collect::<Vec<f64>>();
        let p = solver.fit(&col(0), &col(1), &col(2))?;
        let approx = sph_eval(&p, &sites, Partial::Val);
        let err = approx.iter().zip(&truth).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("N = {n:3}  degree {degree:2}  cond {:.2e}  max shape error {err:.3e}", solver.condition());
    }
    Ok(())
}
