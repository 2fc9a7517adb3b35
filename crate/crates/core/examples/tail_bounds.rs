//! Markov and Chernoff bounds next to simulated binomial tails.

use pgmatroid::randmodel::{bound_report, chernoff_lower, chernoff_upper, markov};

fn main() -> pgmatroid::Result<()> {
    println!("markov(1, 2) = {}", markov(1.0, 2.0)?);
    println!(
        "chernoff_upper(300, 0.1) = {:.6}",
        chernoff_upper(300.0, 0.1)?
    );
    println!(
        "chernoff_lower(300, 0.1) = {:.6}",
        chernoff_lower(300.0, 0.1)?
    );

    let r = bound_report(2000, 0.3, 0.1, 900.0, 2000, 3, 1)?;
    println!("mu = {}", r.mu);
    println!(
        "P(X >= {}) <= {:.4}, observed {:.4}",
        r.markov_x, r.markov, r.empirical_markov_tail
    );
    println!(
        "upper tail <= {:.4}, observed {:.4}",
        r.chernoff_upper, r.empirical_upper_tail
    );
    println!(
        "lower tail <= {:.4}, observed {:.4}",
        r.chernoff_lower, r.empirical_lower_tail
    );
    Ok(())
}
