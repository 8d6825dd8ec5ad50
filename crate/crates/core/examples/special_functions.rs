//! Gamma, beta, incomplete beta and digamma.

use fou2::specfun::{beta, digamma, incomplete_beta, ln_gamma, regularized_incomplete_beta};

fn main() -> fou2::Result<()> {
    println!("ln Γ(0.5)        = {:.15}", ln_gamma(0.5)?);
    println!("ln Γ(100)        = {:.10}", ln_gamma(100.0)?);
    println!("B(1.3, 0.4)      = {:.15}", beta(1.3, 0.4)?);
    println!("B_0.3(1.3, 0.4)  = {:.15}", incomplete_beta(0.3, 1.3, 0.4)?);
    println!(
        "I_0.3(1.3, 0.4)  = {:.15}",
        regularized_incomplete_beta(0.3, 1.3, 0.4)?
    );
    println!("ψ(1)             = {:.15}", digamma(1.0)?);
    println!(
        "ψ(1) + γ         = {:.3e}",
        digamma(1.0)? + 0.577_215_664_901_532_9
    );
    match ln_gamma(-1.0) {
        Ok(v) => println!("ln Γ(−1) = {v}"),
        Err(e) => println!("ln Γ(−1): {e}"),
    }
    Ok(())
}
