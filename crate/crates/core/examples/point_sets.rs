//! Minimal energy and Fibonacci node sets on the sphere.
//!
//! cargo run --release --example point_sets -- 256 7

use membrane::points::{fibonacci_sphere, format_point_set, min_chordal_distance, minimal_energy_sphere, riesz_energy, PointFormat};

fn main() -> membrane::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);

    let me = minimal_energy_sphere(n, seed, 1500, 1e-9)?;
    let fib = fibonacci_sphere(n)?;
    println!("n = {n}, seed = {seed}");
    println!("minimal energy: energy {:.10}, min distance {:.6}, status {:?}", me.energy, min_chordal_distance(&me.set)?, me.status);
    println!(
        "fibonacci:      energy {:.10}, min distance {:.6}",
        riesz_energy(&fib.unit_vectors()),
        min_chordal_distance(&fib)?
    );

    // First lines of the text form used by the point cache.
    for line in format_point_set(&me.set, PointFormat::UnitVectors).lines().take(3) {
        println!("  {line}");
    }
    Ok(())
}
