//! Colouring numbers of full binary projective geometries, with witnesses for
//! the Fano plane checked against the flat-scan form of Edmonds' formula.

use pgmatroid::{colouring_number, verify_colouring, GeometryCtx, Limits, SubMatroid};

fn main() -> pgmatroid::Result<()> {
    let fano = SubMatroid::full(&GeometryCtx::pg(3, 2)?);
    let (k, witness) = colouring_number(&fano);
    println!("col(Fano) = {k}: {:?}", witness.classes);
    assert!(verify_colouring(&fano, &witness));
    assert_eq!(k, fano.edmonds_bruteforce(&Limits::default())?);

    for n in 3..=10 {
        let m = SubMatroid::full(&GeometryCtx::pg(n, 2)?);
        let points = m.len();
        println!(
            "col(PG({},2)) = {} = ceil({points}/{n})",
            n - 1,
            colouring_number(&m).0
        );
    }
    Ok(())
}
