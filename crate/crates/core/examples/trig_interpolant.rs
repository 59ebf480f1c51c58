//! Trigonometric interpolant of the smooth 2D test object: error at the
//! sample sites as N grows, plus a coefficient dump.

use membrane::fourier::{trig_eval, trig_fit};
use membrane::points::equispaced_circle;
use membrane::shapes::TestObject2D;

fn main() -> membrane::Result<()> {
    let object = TestObject2D::object1();
    let sites = equispaced_circle(100)?;
    let truth: Vec<_> = sites.angles().iter().map(|&l| object.eval(l)).collect();

    for n in (8..=56).step_by(8) {
        let nodes = equispaced_circle(n)?;
        let x: Vec<f64> = nodes.angles().iter().map(|&l| object.eval(l).x).collect();
        let y: Vec<f64> = nodes.angles().iter().map(|&l| object.eval(l).y).collect();
        let p = trig_fit(&nodes, &x, &y)?;
        let approx = trig_eval(&p, &sites, 0)?;
        let err = approx.iter().zip(&truth).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("N = {n:2}  max shape error {err:.3e}");
    }

    let nodes = equispaced_circle(8)?;
    let x: Vec<f64> = nodes.angles().iter().map(|&l| object.eval(l).x).collect();
    let y: Vec<f64> = nodes.angles().iter().map(|&l| object.eval(l).y).collect();
    let mut out = std::io::stdout();
    trig_fit(&nodes, &x, &y)?.write_csv(&mut out).expect("stdout");
    Ok(())
}
