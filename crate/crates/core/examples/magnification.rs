//! Which magnifications a closed loop of 2N unit-wavenumber fields can reach.

use runwave::geometry::{admissible_magnifications, Direction};
use runwave::LoopLayout;

fn main() -> runwave::Result<()> {
    use Direction::*;
    for (e34, e41) in [(Forward, Forward), (Forward, Backward), (Backward, Forward), (Backward, Backward)] {
        let l = LoopLayout::diamond(e34, e41, 0.0)?;
        println!("ε34 = {:+}, ε41 = {:+}: ξ = {}", e34.sign(), e41.sign(), l.magnification());
    }
    for n in 2..=5 {
        let xis: Vec<f64> = admissible_magnifications(n)?.iter().map(|w| w.xi).collect();
        println!("N = {n}: {xis:?}");
    }

    // non-unit wavenumbers give fractional magnification
    let coarse = LoopLayout::diamond_with_magnification(0.25, 0.0)?;
    println!("coarse layout: ξ = {}, Φ(z = 1λ) = {:.4}", coarse.magnification(), coarse.loop_phase(1.0)?);
    Ok(())
}
