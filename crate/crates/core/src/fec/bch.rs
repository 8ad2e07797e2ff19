//! Narrow-sense binary BCH generator polynomials of length 2^m - 1.

use crate::error::{Error, Result};

/// Primitive polynomials (with the x^m term) for m = 3..=7.
fn primitive_poly(m: u32) -> Option<u32> {
    match m {
        3 => Some(0b1011),
        4 => Some(0b1_0011),
        5 => Some(0b10_0101),
        6 => Some(0b100_0011),
        7 => Some(0b1000_1001),
        _ => None,
    }
}

struct Field {
    exp: Vec<u32>,
    log: Vec<u32>,
    order: u32,
}

impl Field {
    fn new(m: u32) -> Result<Self> {
        let poly = primitive_poly(m).ok_or_else(|| {
            Error::domain(format!("BCH construction supports m in 3..=7, got {m}"))
        })?;
        let order = (1u32 << m) - 1;
        let mut exp = vec![0u32; order as usize];
        let mut log = vec![0u32; (order + 1) as usize];
        let mut x = 1u32;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = x;
            log[x as usize] = i as u32;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        Ok(Self { exp, log, order })
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[((self.log[a as usize] + self.log[b as usize]) % self.order) as usize]
    }

    fn alpha_pow(&self, i: u32) -> u32 {
        self.exp[(i % self.order) as usize]
    }

    /// Minimal polynomial of alpha^i as a binary bitmask (bit d = coeff of x^d).
    fn minimal_poly(&self, i: u32) -> u128 {
        let mut coset = vec![i % self.order];
        loop {
            let next = (coset.last().unwrap() * 2) % self.order;
            if next == coset[0] {
                break;
            }
            coset.push(next);
        }
        // product of (x + alpha^c) with field coefficients, lowest degree first
        let mut poly: Vec<u32> = vec![1];
        for c in coset {
            let root = self.alpha_pow(c);
            let mut next = vec![0u32; poly.len() + 1];
            for (d, &coef) in poly.iter().enumerate() {
                next[d + 1] ^= coef;
                next[d] ^= self.mul(coef, root);
            }
            poly = next;
        }
        poly.iter().enumerate().fold(0u128, |acc, (d, &c)| {
            debug_assert!(c <= 1, "minimal polynomial must be binary");
            acc | ((c as u128) << d)
        })
    }
}

fn poly_mul(a: u128, b: u128) -> u128 {
    let mut acc = 0u128;
    let mut rest = b;
    while rest != 0 {
        let d = rest.trailing_zeros();
        acc ^= a << d;
        rest &= rest - 1;
    }
    acc
}

/// Generator polynomial of the primitive narrow-sense BCH code of length
/// `2^m - 1` correcting `t` errors (designed distance `2t + 1`).
pub fn generator_poly(m: u32, t: u32) -> Result<u128> {
    if t == 0 {
        return Err(Error::domain(
            "BCH error-correction capability must be >= 1",
        ));
    }
    let field = Field::new(m)?;
    let mut g = 1u128;
    let mut used: Vec<u128> = Vec::new();
    for i in (1..2 * t).step_by(2) {
        let mp = field.minimal_poly(i);
        if !used.contains(&mp) {
            used.push(mp);
            g = poly_mul(g, mp);
        }
    }
    let degree = 127 - g.leading_zeros();
    if degree >= field.order {
        return Err(Error::domain(format!(
            "t = {t} leaves no information bits at m = {m}"
        )));
    }
    Ok(g)
}
