//! Points and lines of the Fano plane, and flat counts against Gaussian binomials.

use pgmatroid::{qbinom, GeometryCtx};

fn main() -> pgmatroid::Result<()> {
    let fano = GeometryCtx::pg(3, 2)?;
    for p in fano.enumerate_points() {
        println!("point {}: {:?}", p.index, p.coords);
    }
    for line in fano.enumerate_flats(2)? {
        println!(
            "line {:?} -> points {:?}",
            line.rows(),
            fano.flat_points(&line)
        );
    }

    for (n, q) in [(4, 2), (4, 3), (3, 4)] {
        let ctx = GeometryCtx::pg(n, q)?;
        for d in 1..=n {
            let counted = ctx.enumerate_flats(d)?.count();
            println!(
                "PG({},{q}) rank {d}: {counted} flats, [{n},{d}]_{q} = {}",
                n - 1,
                qbinom(n as i64, d as i64, q)?
            );
        }
    }
    println!("[30,15]_2 = {}", qbinom(30, 15, 2)?);
    Ok(())
}
