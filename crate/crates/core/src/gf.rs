//! Arithmetic in GF(q), q = p^e.
//!
//! Elements are integers `0..q` whose base-p digits are the polynomial
//! coefficients (digit 0 is the constant term). Prime fields use modular
//! arithmetic directly; extension fields go through log/antilog tables built
//! once at construction.

use serde::Serialize;

use crate::error::{Error, Result};

/// Field element, encoded base p.
pub type Elem = u32;

/// Largest field order accepted by [`FieldSpec::new`].
pub const DEFAULT_ORDER_CAP: u32 = 1 << 16;

/// Full addition/multiplication tables are materialised up to this order.
const TABLE_ORDER: u32 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
    Neg,
}

#[derive(Clone, Debug)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    /// Monic reduction polynomial, coefficients from degree 0 up to degree e.
    modulus: Vec<u32>,
    exp: Vec<Elem>,
    log: Vec<u32>,
    add_table: Vec<Elem>,
    mul_table: Vec<Elem>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power into `(p, e)`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

impl FieldSpec {
    pub fn new(p: u32, e: u32) -> Result<Self> {
        Self::with_cap(p, e, DEFAULT_ORDER_CAP)
    }

    /// Builds GF(q) from its order.
    pub fn from_order(q: u32) -> Result<Self> {
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Self::new(p, e)
    }

    pub fn with_cap(p: u32, e: u32, cap: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e == 0 {
            return Err(Error::InvalidDegree);
        }
        let cap = cap.min(DEFAULT_ORDER_CAP);
        let q = (p as u64).checked_pow(e).filter(|&q| q <= cap as u64);
        let q = q.ok_or(Error::FieldTooLarge { p, e, cap })? as u32;
        let modulus = smallest_irreducible(p, e as usize);

        let mut field = FieldSpec {
            p,
            e,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            add_table: Vec::new(),
            mul_table: Vec::new(),
        };
        if e > 1 {
            field.build_log_tables();
        }
        if q <= TABLE_ORDER {
            field.build_full_tables();
        }
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn is_binary(&self) -> bool {
        self.q == 2
    }

    fn build_log_tables(&mut self) {
        let order = self.q - 1;
        let generator = (2..self.q)
            .find(|&g| self.multiplicative_order_slow(g) == order)
            .expect("multiplicative group of a finite field is cyclic");
        self.exp = vec![0; 2 * order as usize];
        self.log = vec![0; self.q as usize];
        let mut x: Elem = 1;
        for i in 0..order {
            self.exp[i as usize] = x;
            self.exp[(i + order) as usize] = x;
            self.log[x as usize] = i;
            x = self.poly_mul_mod(x, generator);
        }
    }

    fn build_full_tables(&mut self) {
        let q = self.q as usize;
        self.add_table = vec![0; q * q];
        self.mul_table = vec![0; q * q];
        for a in 0..self.q {
            for b in 0..self.q {
                let i = a as usize * q + b as usize;
                self.add_table[i] = self.add_digits(a, b);
                self.mul_table[i] = self.mul_untabled(a, b);
            }
        }
    }

    fn multiplicative_order_slow(&self, g: Elem) -> u32 {
        let mut x = g;
        let mut k = 1;
        while x != 1 {
            x = self.poly_mul_mod(x, g);
            k += 1;
        }
        k
    }

    fn digits(&self, a: Elem) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.e as usize);
        let mut a = a;
        for _ in 0..self.e {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    fn encode_digits(&self, digits: &[u32]) -> Elem {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    fn add_digits(&self, a: Elem, b: Elem) -> Elem {
        if self.e == 1 {
            return (a + b) % self.p;
        }
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.e {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    /// Schoolbook product reduced by the modulus; used only for table construction.
    fn poly_mul_mod(&self, a: Elem, b: Elem) -> Elem {
        let p = self.p as u64;
        let e = self.e as usize;
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * e];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        for deg in (e..2 * e).rev() {
            let lead = prod[deg];
            if lead == 0 {
                continue;
            }
            for (k, &m) in self.modulus.iter().enumerate() {
                let idx = deg - e + k;
                prod[idx] = (prod[idx] + (p - lead) * m as u64) % p;
            }
        }
        let low: Vec<u32> = prod[..e].iter().map(|&c| c as u32).collect();
        self.encode_digits(&low)
    }

    fn mul_untabled(&self, a: Elem, b: Elem) -> Elem {
        if self.e == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as Elem;
        }
        if a == 0 || b == 0 {
            return 0;
        }
        let l = self.log[a as usize] + self.log[b as usize];
        self.exp[l as usize]
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if !self.add_table.is_empty() {
            return self.add_table[a as usize * self.q as usize + b as usize];
        }
        self.add_digits(a, b)
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if !self.mul_table.is_empty() {
            return self.mul_table[a as usize * self.q as usize + b as usize];
        }
        self.mul_untabled(a, b)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if self.e == 1 {
            return (self.p - a % self.p) % self.p;
        }
        if self.p == 2 {
            return a;
        }
        let d: Vec<u32> = self
            .digits(a)
            .iter()
            .map(|&x| (self.p - x) % self.p)
            .collect();
        self.encode_digits(&d)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        if self.e == 1 {
            // a^(p-2) mod p
            return Ok(self.pow(a, self.p as u64 - 2));
        }
        let order = self.q - 1;
        Ok(self.exp[((order - self.log[a as usize]) % order) as usize])
    }

    pub fn pow(&self, a: Elem, mut k: u64) -> Elem {
        let mut base = a;
        let mut acc = 1;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Uniform entry point over the four primitive operations.
    pub fn arith(&self, op: FieldOp, a: Elem, b: Option<Elem>) -> Result<Elem> {
        let check = |x: Elem| {
            if x < self.q {
                Ok(x)
            } else {
                Err(Error::ElementOutOfRange {
                    value: x,
                    q: self.q,
                })
            }
        };
        let a = check(a)?;
        match op {
            FieldOp::Add => Ok(self.add(a, check(b.ok_or(Error::MissingOperand)?)?)),
            FieldOp::Mul => Ok(self.mul(a, check(b.ok_or(Error::MissingOperand)?)?)),
            FieldOp::Neg => Ok(self.neg(a)),
            FieldOp::Inv => self.inv(a),
        }
    }
}

// --- polynomials over GF(p), coefficient vectors low degree first ---

fn poly_trim(a: &mut Vec<u32>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

/// Remainder of `a` modulo the monic polynomial `m`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm && !(r.len() == 1 && r[0] == 0) {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        for (k, &c) in m.iter().enumerate() {
            r[shift + k] = (r[shift + k] + (p - lead) * c % p) % p;
        }
        r.pop();
        poly_trim(&mut r);
    }
    r
}

/// Monic polynomial of degree `deg` whose lower coefficients are the base-p digits of `code`.
fn monic_from_code(code: u64, deg: usize, p: u32) -> Vec<u32> {
    let mut coeffs = Vec::with_capacity(deg + 1);
    let mut c = code;
    for _ in 0..deg {
        coeffs.push((c % p as u64) as u32);
        c /= p as u64;
    }
    coeffs.push(1);
    coeffs
}

/// Trial division by every monic polynomial of degree 1..=deg/2.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for code in 0..(p as u64).pow(d as u32) {
            let divisor = monic_from_code(code, d, p);
            if poly_rem(poly, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible of degree `deg`, ordering polynomials by their
/// coefficient sequence from the leading term down.
fn smallest_irreducible(p: u32, deg: usize) -> Vec<u32> {
    // Reading the lower coefficients as a base-p number with the x^(deg-1)
    // digit most significant gives exactly that order.
    (0..(p as u64).pow(deg as u32))
        .map(|code| monic_from_code(code, deg, p))
        .find(|m| is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree")
}
