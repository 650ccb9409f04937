//! Fluorescence ratio `R(Φ)` for three drive strengths, and which drive
//! gives the steepest usable curve.

use std::f64::consts::PI;

use runwave::observables::{rank_drives, ratio_analytic, ratio_curve};

fn main() -> runwave::Result<()> {
    for x in [1.0, 5.0, 10.0] {
        let c = ratio_curve(x, 9)?;
        let row: Vec<String> = c.values.iter().map(|r| format!("{r:.3}")).collect();
        println!("x = {x:>4}: R at Φ = 0, π/4, …, 2π: {}", row.join(" "));
    }
    println!("R(5, 0.6π) = {:.4}", ratio_analytic(5.0, 0.6 * PI));

    for q in rank_drives(&[1.0, 5.0, 10.0], 1024)? {
        println!("x = {:>4}: min |dR/dΦ| {:.4}, max {:.3}", q.x, q.min_slope, q.max_slope);
    }
    Ok(())
}
