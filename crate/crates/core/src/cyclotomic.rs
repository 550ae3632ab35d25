//! Exact arithmetic in cyclotomic fields.
//!
//! An element of Q(zeta_N) is stored as a vector of rationals of length phi(N),
//! the coordinates in the power basis `1, z, ..., z^(phi(N)-1)` of
//! `Q[x]/(Phi_N(x))`. Elements of different orders are combined by promoting
//! both to the field of order `lcm(N, M)`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Dense polynomials over Q, coefficients in ascending degree.
mod poly {
    use super::*;

    pub fn trim(p: &mut Vec<Rational>) {
        while p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
    }

    pub fn mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        trim(&mut out);
        out
    }

    pub fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let n = a.len().max(b.len());
        let mut out: Vec<Rational> = (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(Rational::zero);
                match b.get(i) {
                    Some(y) => x - y,
                    None => x,
                }
            })
            .collect();
        trim(&mut out);
        out
    }

    /// Quotient and remainder of `a` by a nonzero `b`.
    pub fn div_rem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        let mut rem = a.to_vec();
        trim(&mut rem);
        let mut b = b.to_vec();
        trim(&mut b);
        let lead = b.last().expect("division by the zero polynomial").clone();
        if rem.len() < b.len() {
            return (Vec::new(), rem);
        }
        let mut quot = vec![Rational::zero(); rem.len() - b.len() + 1];
        while rem.len() >= b.len() {
            let shift = rem.len() - b.len();
            let c = rem.last().unwrap() / &lead;
            for (i, bc) in b.iter().enumerate() {
                rem[shift + i] -= &c * bc;
            }
            quot[shift] = c;
            // the leading coefficient cancels exactly
            rem.pop();
            trim(&mut rem);
        }
        trim(&mut quot);
        (quot, rem)
    }

    /// Inverse of `a` modulo the irreducible `modulus`, via the extended Euclidean algorithm.
    pub fn inverse_mod(a: &[Rational], modulus: &[Rational]) -> Option<Vec<Rational>> {
        let (mut r0, mut r1) = (modulus.to_vec(), a.to_vec());
        trim(&mut r1);
        if r1.is_empty() {
            return None;
        }
        let (mut s0, mut s1) = (Vec::new(), vec![Rational::one()]);
        while !r1.is_empty() {
            let (q, r) = div_rem(&r0, &r1);
            let s2 = sub(&s0, &mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is the gcd; it is a nonzero constant when a is coprime to the modulus
        if r0.len() != 1 {
            return None;
        }
        let c = r0[0].clone();
        let (_, inv) = div_rem(&s0.iter().map(|x| x / &c).collect::<Vec<_>>(), modulus);
        Some(inv)
    }
}

fn phi_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<Rational>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<Rational>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cyclotomic_arc(n: u64) -> Arc<Vec<Rational>> {
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    if let Some(p) = phi_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut p = vec![Rational::zero(); n as usize + 1];
    p[0] = -Rational::one();
    p[n as usize] = Rational::one();
    for d in 1..n {
        if n % d == 0 {
            let (q, r) = poly::div_rem(&p, &cyclotomic_arc(d));
            debug_assert!(r.is_empty());
            p = q;
        }
    }
    let p = Arc::new(p);
    phi_cache().lock().unwrap().insert(n, p.clone());
    p
}

/// Coefficients (ascending) of the cyclotomic polynomial `Phi_n`.
///
/// Computed as `x^n - 1` divided by `Phi_d` for every proper divisor `d`, and cached.
pub fn cyclotomic_polynomial(n: u64) -> Vec<Rational> {
    cyclotomic_arc(n).as_ref().clone()
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64
}

/// Reduce a polynomial of arbitrary degree modulo the monic `Phi_n`.
fn reduce(mut p: Vec<Rational>, n: u64) -> Vec<Rational> {
    let phi = cyclotomic_arc(n);
    let deg = phi.len() - 1;
    for top in (deg..p.len()).rev() {
        if p[top].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut p[top], Rational::zero());
        let shift = top - deg;
        for (i, pc) in phi[..deg].iter().enumerate() {
            p[shift + i] -= &c * pc;
        }
    }
    p.resize(deg, Rational::zero());
    p
}

/// An exact element of the cyclotomic field Q(zeta_N).
#[derive(Clone, Debug)]
pub struct Cyclotomic {
    order: u64,
    coords: Vec<Rational>,
}

impl Cyclotomic {
    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        Cyclotomic {
            order: 1,
            coords: vec![q],
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// Build from power-basis coordinates; `coords` of any length are reduced mod `Phi_order`.
    pub fn from_coords(order: u64, coords: Vec<Rational>) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        Cyclotomic {
            order,
            coords: reduce(coords, order),
        }
    }

    /// `zeta_n^k` with `k` taken mod `n`.
    pub fn root_of_unity(n: u64, k: i64) -> Self {
        assert!(n >= 1, "root of unity of order 0");
        let e = k.rem_euclid(n as i64) as usize;
        let mut p = vec![Rational::zero(); e + 1];
        p[e] = Rational::one();
        Self::from_coords(n, p)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.rational_value().is_some_and(|q| q.is_one())
    }

    /// The image under `zeta_N -> zeta_M^(M/N)`.
    pub fn promote(&self, m: u64) -> Result<Self> {
        if m == 0 || m % self.order != 0 {
            return Err(Error::NotAMultiple {
                from: self.order,
                to: m,
            });
        }
        if m == self.order {
            return Ok(self.clone());
        }
        let step = (m / self.order) as usize;
        let mut p = vec![Rational::zero(); step * (self.coords.len().max(1) - 1) + 1];
        for (i, c) in self.coords.iter().enumerate() {
            p[i * step] = c.clone();
        }
        Ok(Self::from_coords(m, p))
    }

    /// The constant coordinate when every other coordinate vanishes.
    pub fn rational_value(&self) -> Option<Rational> {
        if self.coords[1..].iter().all(Zero::is_zero) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        if a.order == b.order {
            return (a.clone(), b.clone());
        }
        let l = a.order.lcm(&b.order);
        (a.promote(l).unwrap(), b.promote(l).unwrap())
    }

    pub fn invert(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let phi = cyclotomic_arc(self.order);
        let inv = poly::inverse_mod(&self.coords, &phi).ok_or_else(|| {
            Error::Invariant(format!("Phi_{} is not coprime to a nonzero element", self.order))
        })?;
        Ok(Self::from_coords(self.order, inv))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.invert()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Cyclotomic::zero();
        }
        Cyclotomic {
            order: self.order,
            coords: self.coords.iter().map(|c| c * q).collect(),
        }
    }

    /// Render as `c0 + c1*z + c2*z^2 + ...` in the order of this element.
    pub fn render(&self) -> String {
        render_coords(&self.coords)
    }

    /// Render in the field of order `m` (a multiple of this element's order).
    pub fn render_in(&self, m: u64) -> Result<String> {
        Ok(render_coords(&self.promote(m)?.coords))
    }
}

fn render_coords(coords: &[Rational]) -> String {
    let mut out = String::new();
    for (i, c) in coords.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        let monomial = match i {
            0 => String::new(),
            1 => "z".to_string(),
            _ => format!("z^{i}"),
        };
        let body = if i == 0 {
            mag.to_string()
        } else if mag.is_one() {
            monomial
        } else {
            format!("{mag}*{monomial}")
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Self::common(self, other);
        a.coords == b.coords
    }
}

impl Eq for Cyclotomic {}

impl From<Rational> for Cyclotomic {
    fn from(q: Rational) -> Self {
        Self::from_rational(q)
    }
}

impl From<i64> for Cyclotomic {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl<'a> Add<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &'a Cyclotomic) -> Cyclotomic {
        if rhs.order == 1 || self.order == 1 {
            let (big, small) = if rhs.order == 1 { (self, rhs) } else { (rhs, self) };
            let mut out = big.clone();
            out.coords[0] += &small.coords[0];
            return out;
        }
        let (a, b) = Cyclotomic::common(self, rhs);
        Cyclotomic {
            order: a.order,
            coords: a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect(),
        }
    }
}

impl<'a> Sub<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &'a Cyclotomic) -> Cyclotomic {
        self + &(-rhs)
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic {
            order: self.order,
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl<'a> Mul<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &'a Cyclotomic) -> Cyclotomic {
        if self.order == 1 {
            return rhs.scale(&self.coords[0]);
        }
        if rhs.order == 1 {
            return self.scale(&rhs.coords[0]);
        }
        let (a, b) = Cyclotomic::common(self, rhs);
        let prod = poly::mul(&a.coords, &b.coords);
        Cyclotomic::from_coords(a.order, prod)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: Cyclotomic) -> Cyclotomic { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        -&self
    }
}

impl std::iter::Sum for Cyclotomic {
    fn sum<I: Iterator<Item = Cyclotomic>>(iter: I) -> Self {
        iter.fold(Cyclotomic::zero(), |acc, x| &acc + &x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&n| q(n, 1)).collect()
    }

    fn z(n: u64, k: i64) -> Cyclotomic {
        Cyclotomic::root_of_unity(n, k)
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(2), ints(&[1, 1]));
        assert_eq!(cyclotomic_polynomial(4), ints(&[1, 0, 1]));
        assert_eq!(cyclotomic_polynomial(6), ints(&[1, -1, 1]));
        assert_eq!(cyclotomic_polynomial(12), ints(&[1, 0, -1, 0, 1]));
        for n in 1..=30 {
            assert_eq!(cyclotomic_polynomial(n).len() as u64 - 1, totient(n));
        }
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(z(1, 0), Cyclotomic::one());
        assert_eq!(z(2, 1), Cyclotomic::from_integer(-1));
        assert_eq!(z(4, 2), Cyclotomic::from_integer(-1));
        assert_eq!(z(4, 2).rational_value(), Some(q(-1, 1)));
        // exact order: z^N = 1 and z^k != 1 below N
        for n in 1..=24u64 {
            let zeta = z(n, 1);
            assert!(zeta.pow(n as i64).unwrap().is_one());
            for k in 1..n as i64 {
                assert!(!zeta.pow(k).unwrap().is_one(), "zeta_{n}^{k} == 1");
            }
        }
    }

    #[test]
    fn field_examples() {
        let one_minus = &Cyclotomic::one() - &z(3, 1);
        let expected = (&Cyclotomic::one() - &z(3, 2)).scale(&q(1, 3));
        assert_eq!(one_minus.invert().unwrap(), expected);
        assert!((&z(6, 1) * &z(6, 5)).is_one());
        assert!((&z(4, 1) + &(-&z(4, 1))).is_zero());
        assert_eq!(Cyclotomic::zero().invert(), Err(Error::ZeroInverse));
    }

    #[test]
    fn promotion() {
        assert_eq!(
            Cyclotomic::from_integer(-1).promote(6).unwrap(),
            Cyclotomic::from_integer(-1)
        );
        assert_eq!(z(2, 1).promote(6).unwrap().coords, z(6, 3).coords);
        assert_eq!(z(3, 1).promote(6).unwrap().coords, z(6, 2).coords);
        assert!(Cyclotomic::one().promote(17).unwrap().is_one());
        assert_eq!(
            z(4, 1).promote(6),
            Err(Error::NotAMultiple { from: 4, to: 6 })
        );
    }

    #[test]
    fn rational_values() {
        let a = &(&Cyclotomic::one() + &z(4, 1)) - &z(4, 1);
        assert_eq!(a.rational_value(), Some(q(1, 1)));
        assert_eq!((&z(3, 1) + &z(3, 2)).rational_value(), Some(q(-1, 1)));
        assert_eq!(z(4, 1).rational_value(), None);
    }

    #[test]
    fn rendering() {
        assert_eq!(Cyclotomic::zero().render(), "0");
        assert_eq!(Cyclotomic::from_rational(q(-3, 4)).render(), "-3/4");
        let a = &Cyclotomic::from_rational(q(1, 4)) - &z(4, 1).scale(&q(1, 2));
        assert_eq!(a.render(), "1/4 - 1/2*z");
        assert_eq!(z(6, 1).render_in(12).unwrap(), "z^2");
    }

    #[test]
    fn inverse_pairs_and_geometric_sums() {
        for n in 1..=24u64 {
            for k in 0..n as i64 {
                assert!((&z(n, k) * &z(n, n as i64 - k)).is_one());
            }
            if n >= 2 {
                let s: Cyclotomic = (0..n as i64).map(|k| z(n, k)).sum();
                assert!(s.is_zero(), "geometric sum for N={n}");
            }
        }
    }

    fn element(order: u64) -> impl Strategy<Value = Cyclotomic> {
        let len = totient(order) as usize;
        prop::collection::vec((-9i64..=9, 1i64..=5), len).prop_map(move |cs| {
            Cyclotomic::from_coords(order, cs.into_iter().map(|(n, d)| q(n, d)).collect())
        })
    }

    proptest! {
        #[test]
        fn field_axioms(a in element(12), b in element(12), c in element(12)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            if !a.is_zero() {
                prop_assert!((&a * &a.invert().unwrap()).is_one());
            }
        }

        #[test]
        fn promote_is_a_ring_homomorphism(a in element(6), b in element(6)) {
            let lhs = (&a * &b).promote(30).unwrap();
            let rhs = &a.promote(30).unwrap() * &b.promote(30).unwrap();
            prop_assert_eq!(lhs.coords(), rhs.coords());
        }

        #[test]
        fn mixed_orders_agree(a in element(4), b in element(3)) {
            // addition across orders is commutative and promotes to lcm
            let s = &a + &b;
            prop_assert_eq!(s.order(), 12);
            prop_assert_eq!(&s - &b, a);
        }
    }
}
