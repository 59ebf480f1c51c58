//! As the shape parameter goes to zero the multiquadric interpolant on
//! equispaced circle nodes approaches the trigonometric interpolant.

use membrane::experiments::epsilon_fourier_limit_study;
use membrane::shapes::TestObject2D;

fn main() -> membrane::Result<()> {
    let eps = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125];
    for row in epsilon_fourier_limit_study(8, &TestObject2D::object1(), &eps)? {
        match row.gap {
            Some(g) => println!("eps = {:<8} gap {g:.3e}  cond {:.2e}", row.epsilon, row.condition),
            None => println!("eps = {:<8} refused ({})", row.epsilon, row.failure.unwrap_or_default()),
        }
    }
    Ok(())
}
