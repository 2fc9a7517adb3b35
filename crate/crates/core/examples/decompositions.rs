//! (b,c)-decompositions of the Fano plane: a violating transversal, a search,
//! and the JSON file format.

use pgmatroid::decomp::{search_decomposition, verify_decomposition, DecompositionFile};
use pgmatroid::{GeometryCtx, Limits, SubMatroid};

fn main() -> pgmatroid::Result<()> {
    let fano = SubMatroid::full(&GeometryCtx::pg(3, 2)?);
    let singletons: Vec<Vec<usize>> = (0..7).map(|i| vec![i]).collect();
    println!(
        "singletons, b = 2: {:?}",
        verify_decomposition(&fano, &singletons, 2, 1.0, 1_000_000)?
    );

    for (b, c) in [(1, 1.0), (1, 2.0), (2, 1.0)] {
        match search_decomposition(&fano, b, c, 1_000_000, &Limits::default())? {
            Some(d) => {
                println!("b = {b}, c = {c}: {:?}", d.classes);
                println!(
                    "{}",
                    DecompositionFile::from_decomposition(&fano, &d).to_json()?
                );
            }
            None => println!("b = {b}, c = {c}: none"),
        }
    }
    Ok(())
}
