//! The threshold n0 and the counting chain evaluated at it, under both bounds on
//! the number of classes.

use pgmatroid::decomp::{conditions_at, counting_bound_report, threshold_n0, LogBase};

fn main() -> pgmatroid::Result<()> {
    for base in [LogBase::Natural, LogBase::Two] {
        match threshold_n0(2, 1.0, 1, 1.0, 0.1, base) {
            Ok(n0) => println!(
                "base {base}: n0 = {n0}, {:?}",
                conditions_at(n0, 2, 1.0, 1, 1.0, 0.1, base)?
            ),
            Err(e) => println!("base {base}: {e}"),
        }
    }

    let n0 = threshold_n0(2, 1.0, 1, 1.0, 0.1, LogBase::Natural)? as u64;
    let report = counting_bound_report(n0, 2, 1.0, 1, 1.0, 0.1, LogBase::Natural)?;
    for regime in &report.regimes {
        println!(
            "{} (chain holds: {})",
            regime.classes_bound, regime.chain_holds
        );
        for s in &regime.steps {
            println!(
                "  {} {} {}: ln {:.3} vs {:.3} -> {}",
                s.lhs, s.relation, s.rhs, s.ln_lhs, s.ln_rhs, s.holds
            );
        }
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}
