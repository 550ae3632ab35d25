//! Truncated power series in the hyperplane class `H`.

use std::collections::HashMap;
use std::ops::{Add, Mul};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::One;

use crate::cyclotomic::{Cyclotomic, Rational};
use crate::error::{Error, Result};

/// A power series `sum_d c_d H^d` kept modulo `H^(T+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Cyclotomic>,
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

impl Series {
    pub fn constant(c: Cyclotomic, truncation: usize) -> Self {
        let mut coeffs = vec![Cyclotomic::zero(); truncation + 1];
        coeffs[0] = c;
        Series { coeffs }
    }

    pub fn one(truncation: usize) -> Self {
        Self::constant(Cyclotomic::one(), truncation)
    }

    /// Series with the given coefficients; truncation is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<Cyclotomic>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least a constant term");
        Series { coeffs }
    }

    /// `zeta * e^(aH)`.
    pub fn exp_linear(a: i64, zeta: &Cyclotomic, truncation: usize) -> Self {
        let a = BigInt::from(a);
        let coeffs = (0..=truncation)
            .map(|d| {
                let c = Rational::new(num_traits::pow(a.clone(), d), factorial(d));
                zeta.scale(&c)
            })
            .collect();
        Series { coeffs }
    }

    /// The Todd series `wH / (1 - e^(-wH))`, obtained by inverting `(1 - e^(-wH)) / (wH)`.
    pub fn todd_factor(w: u64, truncation: usize) -> Self {
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Series>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(s) = cache.lock().unwrap().get(&(w, truncation)) {
            return s.clone();
        }
        let s = Self::compute_todd_factor(w, truncation);
        cache.lock().unwrap().insert((w, truncation), s.clone());
        s
    }

    fn compute_todd_factor(w: u64, truncation: usize) -> Self {
        let minus_w = -BigInt::from(w);
        let coeffs = (0..=truncation)
            .map(|d| {
                Cyclotomic::from_rational(Rational::new(
                    num_traits::pow(minus_w.clone(), d),
                    factorial(d + 1),
                ))
            })
            .collect();
        Series { coeffs }
            .invert()
            .expect("(1 - e^(-x))/x has constant term 1")
    }

    /// `1 - c * e^(-wH)`; a unit exactly when `c != 1`.
    pub fn euler_trace_factor(w: i64, inv_char: &Cyclotomic, truncation: usize) -> Self {
        let e = Self::exp_linear(-w, inv_char, truncation);
        &Self::one(truncation) + &e.scale(&Cyclotomic::from_integer(-1))
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Cyclotomic] {
        &self.coeffs
    }

    pub fn coefficient(&self, degree: usize) -> Result<&Cyclotomic> {
        self.coeffs.get(degree).ok_or(Error::DegreeOutOfRange {
            degree,
            truncation: self.truncation(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Cyclotomic::is_zero)
    }

    pub fn is_unit(&self) -> bool {
        !self.coeffs[0].is_zero()
    }

    /// Drop every term above `H^truncation`.
    pub fn truncate(&self, truncation: usize) -> Self {
        assert!(truncation <= self.truncation(), "cannot deepen a truncated series");
        Series {
            coeffs: self.coeffs[..=truncation].to_vec(),
        }
    }

    pub fn scale(&self, c: &Cyclotomic) -> Self {
        Series {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Multiplicative inverse, solving `s * t = 1` coefficient by coefficient.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NonUnitSeries);
        }
        let inv0 = self.coeffs[0].invert()?;
        let mut out: Vec<Cyclotomic> = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for d in 1..self.coeffs.len() {
            let acc: Cyclotomic = (1..=d)
                .filter(|&i| !self.coeffs[i].is_zero())
                .map(|i| &self.coeffs[i] * &out[d - i])
                .sum();
            out.push(-(&acc * &inv0));
        }
        Ok(Series { coeffs: out })
    }

    /// Product of a list of series, starting from `1` at the given truncation.
    pub fn product<'a>(factors: impl IntoIterator<Item = &'a Series>, truncation: usize) -> Self {
        factors
            .into_iter()
            .fold(Self::one(truncation), |acc, f| &acc * f)
    }
}

impl<'a> Add<&'a Series> for &'a Series {
    type Output = Series;
    fn add(self, rhs: &'a Series) -> Series {
        let t = self.truncation().min(rhs.truncation());
        Series {
            coeffs: (0..=t).map(|d| &self.coeffs[d] + &rhs.coeffs[d]).collect(),
        }
    }
}

impl<'a> Mul<&'a Series> for &'a Series {
    type Output = Series;
    fn mul(self, rhs: &'a Series) -> Series {
        let t = self.truncation().min(rhs.truncation());
        let coeffs = (0..=t)
            .map(|d| {
                (0..=d)
                    .filter(|&i| !self.coeffs[i].is_zero() && !rhs.coeffs[d - i].is_zero())
                    .map(|i| &self.coeffs[i] * &rhs.coeffs[d - i])
                    .sum()
            })
            .collect();
        Series { coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Cyclotomic {
        Cyclotomic::from_rational(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    fn s(v: &[(i64, i64)]) -> Series {
        Series::from_coeffs(v.iter().map(|&(n, d)| q(n, d)).collect())
    }

    #[test]
    fn exp_linear_examples() {
        assert_eq!(
            Series::exp_linear(2, &Cyclotomic::one(), 2),
            s(&[(1, 1), (2, 1), (2, 1)])
        );
        let z3 = Cyclotomic::root_of_unity(3, 1);
        let e = Series::exp_linear(0, &z3, 5);
        assert_eq!(e.coeffs[0], z3);
        assert!(e.coeffs[1..].iter().all(Cyclotomic::is_zero));
        assert_eq!(
            Series::exp_linear(3, &Cyclotomic::from_integer(-1), 1),
            s(&[(-1, 1), (-3, 1)])
        );
    }

    #[test]
    fn todd_examples() {
        // inverse of 1 - H/2 + H^2/6
        assert_eq!(Series::todd_factor(1, 2), s(&[(1, 1), (1, 2), (1, 12)]));
        assert_eq!(Series::todd_factor(2, 1), s(&[(1, 1), (1, 1)]));
        assert_eq!(Series::todd_factor(1, 0), s(&[(1, 1)]));
        // Bernoulli check: x/(1-e^-x) = 1 + x/2 + x^2/12 - x^4/720
        assert_eq!(
            Series::todd_factor(1, 4),
            s(&[(1, 1), (1, 2), (1, 12), (0, 1), (-1, 720)])
        );
        assert_eq!(
            *Series::todd_factor(1, 2).coefficient(2).unwrap(),
            q(1, 12)
        );
    }

    #[test]
    fn euler_trace_factor_examples() {
        let minus_one = Cyclotomic::from_integer(-1);
        assert_eq!(Series::euler_trace_factor(1, &minus_one, 0), s(&[(2, 1)]));
        let fixed = Series::euler_trace_factor(1, &Cyclotomic::one(), 1);
        assert_eq!(fixed, s(&[(0, 1), (1, 1)]));
        assert_eq!(fixed.invert(), Err(Error::NonUnitSeries));
        let z3 = Cyclotomic::root_of_unity(3, 1);
        assert_eq!(
            Series::euler_trace_factor(2, &z3, 0).coeffs[0],
            &Cyclotomic::one() - &z3
        );
    }

    #[test]
    fn ring_examples() {
        assert_eq!(
            s(&[(1, 1), (1, 1), (0, 1)]).invert().unwrap(),
            s(&[(1, 1), (-1, 1), (1, 1)])
        );
        assert_eq!(&s(&[(1, 1), (1, 1)]) * &s(&[(1, 1), (-1, 1)]), s(&[(1, 1), (0, 1)]));
        assert_eq!(s(&[(0, 1), (1, 1)]).invert(), Err(Error::NonUnitSeries));
        assert!(matches!(
            s(&[(1, 1)]).coefficient(3),
            Err(Error::DegreeOutOfRange { degree: 3, truncation: 0 })
        ));
    }

    fn unit_series() -> impl Strategy<Value = Series> {
        (0usize..=6)
            .prop_flat_map(|t| prop::collection::vec((-6i64..=6, 0i64..6, 1i64..=4), t + 1))
            .prop_filter_map("unit", |cs| {
                let coeffs: Vec<Cyclotomic> = cs
                    .into_iter()
                    .map(|(n, k, d)| Cyclotomic::root_of_unity(6, k).scale(&Rational::new(n.into(), d.into())))
                    .collect();
                let s = Series::from_coeffs(coeffs);
                s.is_unit().then_some(s)
            })
    }

    proptest! {
        #[test]
        fn invert_is_exact(s in unit_series()) {
            let t = s.truncation();
            prop_assert_eq!(&s.invert().unwrap() * &s, Series::one(t));
        }

        #[test]
        fn exp_is_a_homomorphism(a in -5i64..=5, b in -5i64..=5, t in 0usize..=6) {
            let one = Cyclotomic::one();
            prop_assert_eq!(
                &Series::exp_linear(a, &one, t) * &Series::exp_linear(b, &one, t),
                Series::exp_linear(a + b, &one, t)
            );
        }

        #[test]
        fn truncation_coherence(w in 1u64..=8, t in 0usize..=8, cut in 0usize..=8) {
            let cut = cut.min(t);
            prop_assert_eq!(Series::todd_factor(w, t).truncate(cut), Series::todd_factor(w, cut));
        }
    }

    #[test]
    fn todd_coefficients_are_rational() {
        for w in 1..=8 {
            for t in 0..=8 {
                for c in Series::todd_factor(w, t).coeffs() {
                    assert!(c.rational_value().is_some());
                }
            }
        }
    }
}
