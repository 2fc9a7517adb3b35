//! Arithmetic in GF(9): the chosen modulus, a multiplication table and inverses.

use pgmatroid::gf::FieldSpec;

fn main() -> pgmatroid::Result<()> {
    let f = FieldSpec::from_order(9)?;
    println!(
        "GF({}) = GF({})[x] / {:?} (coefficients low to high)",
        f.q(),
        f.p(),
        f.modulus()
    );

    print!("  *|");
    for b in 0..f.q() {
        print!("{b:>3}");
    }
    println!();
    for a in 0..f.q() {
        print!("{a:>3}|");
        for b in 0..f.q() {
            print!("{:>3}", f.mul(a, b));
        }
        println!();
    }

    for a in 1..f.q() {
        let inv = f.inv(a)?;
        assert_eq!(f.mul(a, inv), 1);
        println!("{a}^-1 = {inv}");
    }
    Ok(())
}
