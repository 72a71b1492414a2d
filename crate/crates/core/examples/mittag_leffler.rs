//! Evaluates Mittag-Leffler functions and the distribution `F^{α,λ}`.

use hawkes_impact::mittag::{ml_cdf, ml_density, ml_e, MittagLefflerParams};

fn main() -> hawkes_impact::Result<()> {
    println!("z,E_0.5(z),E_0.8(z),exp(z)");
    for z in [-10.0, -2.0, -0.5, 0.0, 0.5, 2.0] {
        println!("{z},{},{},{}", ml_e(0.5, 1.0, z)?, ml_e(0.8, 1.0, z)?, z.exp());
    }
    let p = MittagLefflerParams::new(0.6, 1.0)?;
    println!("\nt,density,cdf");
    for t in [0.01, 0.1, 0.5, 1.0, 5.0, 50.0] {
        println!("{t},{},{}", ml_density(&p, t)?, ml_cdf(&p, t)?);
    }
    Ok(())
}
