//! Elasto-plastic tunnel in Mohr-Coulomb ground compared with the
//! closed-form plastic zone solution. Takes about a minute in release mode.

use igabem::verify;

fn main() -> igabem::Result<()> {
    let (report, run) = verify::duncan_fama_check(None)?;
    println!("first yield at load factor {:.4}", run.first_yield_factor);
    println!("iterations per increment {:?}", run.iterations);
    print!("{}", report.table());
    Ok(())
}
