//! Multiquadric and inverse multiquadric interpolants on the circle.

use membrane::points::equispaced_circle;
use membrane::rbf::{rbf_eval_2d, rbf_fit_2d, RadialKernel};
use membrane::shapes::TestObject2D;

fn main() -> membrane::Result<()> {
    let object = TestObject2D::object2();
    let sites = equispaced_circle(100)?;
    let truth: Vec<_> = sites.angles().iter().map(|&l| object.eval(l)).collect();
    let nodes = equispaced_circle(32)?;
    let x: Vec<f64> = nodes.angles().iter().map(|&l| object.eval(l).x).collect();
    let y: Vec<f64> = nodes.angles().iter().map(|&l| object.eval(l).y).collect();

    for kernel in [RadialKernel::mq(3.6)?, RadialKernel::imq(3.6)?, RadialKernel::mq(1.0)?] {
        let s = rbf_fit_2d(&nodes, &x, &y, kernel)?;
        let approx = rbf_eval_2d(&s, &sites, 0)?;
        let err = approx.iter().zip(&truth).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!(
            "{} eps = {:<4} cond {:.2e}  max shape error {err:.3e}",
            kernel.family, kernel.epsilon, s.condition
        );
    }
    Ok(())
}
