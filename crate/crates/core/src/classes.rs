//! K-theory classes and the per-sector integrands of the orbifold Riemann-Roch sum.
//!
//! Every sector, whether of a weighted projective stack or a fixed component
//! of a cyclic group element, is reduced to a [`LocalModel`]: a fixed stratum
//! `P(w_S)` carrying one hyperplane class `H`, the character by which the
//! symmetry acts on `O(1)` there, and the list of normal directions.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::geometry::{CyclicQuotient, FixedComponent, NormalDatum, Sector, WeightedProjective};
use crate::series::Series;

/// `coefficient * O(degree)`, twisted by `char_shift` units of the symmetry character.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KTerm {
    pub coefficient: i64,
    pub degree: i64,
    pub char_shift: i64,
}

/// A formal integer combination of character-twisted line bundles.
///
/// Canonical form: equal `(degree, char_shift)` pairs merged, zero coefficients dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KClass {
    terms: BTreeMap<(i64, i64), i64>,
}

impl KClass {
    pub fn zero() -> Self {
        KClass::default()
    }

    /// The line bundle `O(a)`.
    pub fn line(degree: i64) -> Self {
        Self::from_terms([KTerm {
            coefficient: 1,
            degree,
            char_shift: 0,
        }])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = KTerm>) -> Self {
        let mut out = KClass::zero();
        for t in terms {
            out.push(t);
        }
        out
    }

    pub fn push(&mut self, t: KTerm) {
        let key = (t.degree, t.char_shift);
        let c = self.terms.get(&key).copied().unwrap_or(0) + t.coefficient;
        if c == 0 {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = KTerm> + '_ {
        self.terms.iter().map(|(&(degree, char_shift), &coefficient)| KTerm {
            coefficient,
            degree,
            char_shift,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &KClass) -> KClass {
        Self::from_terms(self.terms().chain(other.terms()))
    }

    /// Tensor product: degrees and character shifts add, coefficients multiply.
    pub fn tensor(&self, other: &KClass) -> KClass {
        let mut out = KClass::zero();
        for a in self.terms() {
            for b in other.terms() {
                out.push(KTerm {
                    coefficient: a.coefficient * b.coefficient,
                    degree: a.degree + b.degree,
                    char_shift: a.char_shift + b.char_shift,
                });
            }
        }
        out
    }

    /// The Koszul class `prod_j (1 - O(-d_j))` of `E = sum_j O(d_j)`.
    pub fn koszul(degrees: &[i64]) -> KClass {
        degrees.iter().fold(KClass::line(0), |acc, &d| {
            let factor = KClass::from_terms([
                KTerm { coefficient: 1, degree: 0, char_shift: 0 },
                KTerm { coefficient: -1, degree: -d, char_shift: 0 },
            ]);
            acc.tensor(&factor)
        })
    }
}

impl fmt::Display for KClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, t) in self.terms().enumerate() {
            let mag = t.coefficient.abs();
            match (i, t.coefficient < 0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if mag != 1 {
                write!(f, "{mag}*")?;
            }
            if t.char_shift == 0 {
                write!(f, "O({})", t.degree)?;
            } else {
                write!(f, "O({},{})", t.degree, t.char_shift)?;
            }
        }
        Ok(())
    }
}

/// Local data of one fixed stratum, enough to build and integrate its integrand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalModel {
    /// Order `r` of the cyclotomic field the traces live in.
    pub order: u64,
    /// The symmetry acts on the fiber of `O(1)` over the stratum by `zeta_r^line_character`.
    pub line_character: i64,
    /// Exponent contributed by one unit of `KTerm::char_shift`.
    pub twist_character: i64,
    /// The fixed stratum `P(w_S)`.
    pub stratum: WeightedProjective,
    pub normal: Vec<NormalDatum>,
}

impl LocalModel {
    pub fn for_sector(y: &WeightedProjective, sector: &Sector) -> Result<Self> {
        Ok(LocalModel {
            order: sector.order,
            line_character: sector.exponent as i64,
            twist_character: sector.exponent as i64,
            stratum: y.fixed_locus(sector),
            normal: y.normal_data(sector)?,
        })
    }

    /// The component `P(V_v)` of the fixed locus of `g^t` on `[P^n / mu_m]`.
    pub fn for_fixed_component(q: &CyclicQuotient, t: u64, component: &FixedComponent) -> Self {
        let m = q.order();
        let v = component.residue;
        let normal = (0..=q.dim())
            .filter(|j| !component.coords.contains(j))
            .map(|j| NormalDatum {
                weight: 1,
                // dual to the coordinate x_j / x_i, whose character is t*t_j - v
                character: (v + m - (t * q.action()[j]) % m) % m,
            })
            .collect();
        LocalModel {
            order: m,
            line_character: v as i64,
            twist_character: t as i64,
            stratum: WeightedProjective::projective(component.coords.len() - 1),
            normal,
        }
    }

    pub fn dim(&self) -> usize {
        self.stratum.dim()
    }

    fn zeta_pow(&self, e: i64) -> Cyclotomic {
        Cyclotomic::root_of_unity(self.order, e)
    }

    /// Eigenvalue and trace series `eigenvalue * e^(aH)` of one term (coefficient ignored).
    pub fn trace_char(&self, term: &KTerm) -> (Cyclotomic, Series) {
        let eigen = self.zeta_pow(self.line_character * term.degree + self.twist_character * term.char_shift);
        let series = Series::exp_linear(term.degree, &eigen, self.dim());
        (eigen, series)
    }

    /// `sum_terms coefficient * trace_char(term)`.
    pub fn trace_series(&self, class: &KClass) -> Series {
        class.terms().fold(Series::constant(Cyclotomic::zero(), self.dim()), |acc, t| {
            let (_, s) = self.trace_char(&t);
            &acc + &s.scale(&Cyclotomic::from_integer(t.coefficient))
        })
    }

    /// `prod_{i in S} w_i H / (1 - e^(-w_i H))`; the trivial summand of the Euler
    /// sequence contributes `1`.
    pub fn todd_of_stratum(&self) -> Series {
        let t = self.dim();
        self.stratum
            .weights()
            .iter()
            .fold(Series::one(t), |acc, &w| &acc * &Series::todd_factor(w, t))
    }

    /// One factor `1 - zeta^(-char) e^(-wH)` per normal direction.
    pub fn euler_class_of_normal(&self) -> Result<Vec<Series>> {
        self.normal
            .iter()
            .map(|d| {
                let inv = self.zeta_pow(-(d.character as i64));
                let f = Series::euler_trace_factor(d.weight as i64, &inv, self.dim());
                if f.is_unit() {
                    Ok(f)
                } else {
                    Err(Error::Invariant(format!(
                        "normal factor of weight {} is not invertible in sector of order {}",
                        d.weight, self.order
                    )))
                }
            })
            .collect()
    }

    /// `(1/prod w_S) * [H^dim] s`.
    pub fn integrate(&self, s: &Series) -> Result<Cyclotomic> {
        integrate(&self.stratum, s)
    }

    /// Character exponent of `O(d)` restricted to the stratum, mod `r`.
    pub fn degree_character(&self, d: i64) -> u64 {
        (self.line_character * d).rem_euclid(self.order as i64) as u64
    }

    /// Build `Td(stratum) * Tr(V) * Tr(extra_numerator)` over the trace-Euler class of the
    /// normal bundle, with `moving_obstructions` removed from the normal bundle.
    pub fn assemble_integrand(
        &self,
        v: &KClass,
        extra_numerator: Option<&KClass>,
        moving_obstructions: &[i64],
    ) -> Result<SectorClass> {
        let mut numerator = &self.todd_of_stratum() * &self.trace_series(v);
        if let Some(extra) = extra_numerator {
            numerator = &numerator * &self.trace_series(extra);
        }
        let excess_factors = moving_obstructions
            .iter()
            .map(|&d| {
                let c = self.degree_character(d);
                if c == 0 {
                    return Err(Error::FixedDirection {
                        degree: d,
                        order: self.order,
                        exponent: self.line_character.rem_euclid(self.order as i64) as u64,
                    });
                }
                Ok(Series::euler_trace_factor(d, &self.zeta_pow(-(c as i64)), self.dim()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SectorClass {
            numerator,
            denominator_factors: self.euler_class_of_normal()?,
            excess_factors,
        })
    }
}

/// `(1/prod w_i) * [H^dim] s` over the weighted projective stack `stratum`.
pub fn integrate(stratum: &WeightedProjective, s: &Series) -> Result<Cyclotomic> {
    let dim = stratum.dim();
    if s.truncation() < dim {
        return Err(Error::TruncationTooShallow {
            truncation: s.truncation(),
            dim,
        });
    }
    let norm = BigRational::new(BigInt::from(1), BigInt::from(stratum.weight_product()));
    Ok(s.coefficient(dim)?.scale(&norm))
}

/// The integrand of one sector: a numerator and the factors of the trace-Euler class
/// of its (virtual) normal bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorClass {
    pub numerator: Series,
    /// Factors of `Tr(Lambda N*)`, one per normal direction.
    pub denominator_factors: Vec<Series>,
    /// Factors of `Tr(Lambda (E^m)*)`, the moving obstruction directions subtracted from
    /// the normal bundle.
    pub excess_factors: Vec<Series>,
}

impl SectorClass {
    /// `Tr(Lambda (N - E^m)*) = prod denominators / prod excess`.
    pub fn virtual_euler_class(&self) -> Result<Series> {
        let t = self.numerator.truncation();
        let mut out = Series::one(t);
        for f in &self.denominator_factors {
            if !f.is_unit() {
                return Err(Error::Invariant("non-invertible normal factor".into()));
            }
            out = &out * f;
        }
        for f in &self.excess_factors {
            out = &out * &f.invert()?;
        }
        Ok(out)
    }

    pub fn evaluate(&self, model: &LocalModel) -> Result<Cyclotomic> {
        let den = self.virtual_euler_class()?;
        model.integrate(&(&self.numerator * &den.invert()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wps(w: &[u64]) -> WeightedProjective {
        WeightedProjective::new(w.to_vec()).unwrap()
    }

    fn model(w: &[u64], idx: usize) -> LocalModel {
        let y = wps(w);
        LocalModel::for_sector(&y, &y.sectors()[idx]).unwrap()
    }

    fn q(n: i64, d: i64) -> Cyclotomic {
        Cyclotomic::from_rational(BigRational::new(n.into(), d.into()))
    }

    fn series(v: &[(i64, i64)]) -> Series {
        Series::from_coeffs(v.iter().map(|&(n, d)| q(n, d)).collect())
    }

    fn o(a: i64) -> KTerm {
        KTerm { coefficient: 1, degree: a, char_shift: 0 }
    }

    #[test]
    fn kclass_canonical_form() {
        let c = KClass::from_terms([o(1), o(2), o(1), KTerm { coefficient: -1, ..o(2) }]);
        assert_eq!(c.terms().collect::<Vec<_>>(), vec![KTerm { coefficient: 2, ..o(1) }]);
        assert_eq!(KClass::koszul(&[3]).to_string(), "-O(-3) + O(0)");
        assert_eq!(KClass::koszul(&[1, 2]).to_string(), "O(-3) - O(-2) - O(-1) + O(0)");
        assert!(KClass::koszul(&[2]).add(&KClass::koszul(&[2]).tensor(&KClass::from_terms([KTerm { coefficient: -1, ..o(0) }]))).is_zero());
    }

    #[test]
    fn trace_examples() {
        let m = model(&[1, 2], 1);
        let (e, s) = m.trace_char(&o(3));
        assert_eq!(e, Cyclotomic::from_integer(-1));
        assert_eq!(s, series(&[(-1, 1)]));
        let m = model(&[1, 2, 3], 0);
        let (e, s) = m.trace_char(&o(4));
        assert!(e.is_one());
        assert_eq!(s, Series::exp_linear(4, &Cyclotomic::one(), 2));
        let m = model(&[2, 2], 1);
        assert!(m.trace_char(&o(2)).0.is_one());
    }

    #[test]
    fn todd_examples() {
        assert_eq!(model(&[1, 1], 0).todd_of_stratum(), series(&[(1, 1), (1, 1)]));
        assert_eq!(model(&[1, 2], 1).todd_of_stratum(), series(&[(1, 1)]));
        assert_eq!(model(&[2, 2], 1).todd_of_stratum(), series(&[(1, 1), (2, 1)]));
    }

    #[test]
    fn normal_class_examples() {
        assert_eq!(model(&[1, 2], 1).euler_class_of_normal().unwrap(), vec![series(&[(2, 1)])]);
        assert!(model(&[1, 2], 0).euler_class_of_normal().unwrap().is_empty());
        let m = model(&[1, 2, 3], 2);
        assert_eq!((m.order, m.line_character), (3, 1));
        let one = Cyclotomic::one();
        let f = m.euler_class_of_normal().unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].coeffs()[0], &one - &Cyclotomic::root_of_unity(3, -1));
        assert_eq!(f[1].coeffs()[0], &one - &Cyclotomic::root_of_unity(3, -2));
    }

    #[test]
    fn fixed_normal_direction_is_an_error() {
        let mut m = model(&[1, 2], 1);
        m.normal[0].character = 0;
        assert!(matches!(m.euler_class_of_normal(), Err(Error::Invariant(_))));
    }

    #[test]
    fn integrate_examples() {
        let h = series(&[(0, 1), (1, 1)]);
        assert_eq!(integrate(&wps(&[1, 1]), &h).unwrap(), q(1, 1));
        assert_eq!(integrate(&wps(&[1, 2]), &h).unwrap(), q(1, 2));
        assert_eq!(integrate(&wps(&[2]), &series(&[(1, 1)])).unwrap(), q(1, 2));
        assert!(matches!(
            integrate(&wps(&[1, 1, 1]), &h),
            Err(Error::TruncationTooShallow { truncation: 1, dim: 2 })
        ));
    }

    #[test]
    fn assemble_examples() {
        let c = model(&[1, 1], 0).assemble_integrand(&KClass::line(0), None, &[]).unwrap();
        assert_eq!(c.numerator, series(&[(1, 1), (1, 1)]));
        assert!(c.denominator_factors.is_empty());

        for a in 0..4 {
            let c = model(&[1, 2], 1).assemble_integrand(&KClass::line(a), None, &[]).unwrap();
            let sign = if a % 2 == 0 { 1 } else { -1 };
            assert_eq!(c.numerator, series(&[(sign, 1)]));
            assert_eq!(c.denominator_factors, vec![series(&[(2, 1)])]);
            assert_eq!(c.evaluate(&model(&[1, 2], 1)).unwrap(), q(sign, 4));
        }

        let p2 = model(&[1, 1, 1], 0);
        let c = p2.assemble_integrand(&KClass::line(0), Some(&KClass::koszul(&[3])), &[]).unwrap();
        let koszul = &Series::one(2) + &Series::exp_linear(-3, &Cyclotomic::from_integer(-1), 2);
        assert_eq!(c.numerator, &koszul * &p2.todd_of_stratum());
    }

    #[test]
    fn moving_obstruction_with_trivial_character_is_rejected() {
        let m = model(&[1, 1, 2], 1);
        assert!(matches!(
            m.assemble_integrand(&KClass::line(0), None, &[2]),
            Err(Error::FixedDirection { degree: 2, .. })
        ));
        assert!(m.assemble_integrand(&KClass::line(0), None, &[3]).is_ok());
    }

    fn binomial(n: i64, k: i64) -> i64 {
        (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
    }

    #[test]
    fn hrr_on_projective_space() {
        for n in 0..=4usize {
            let m = LocalModel::for_sector(&WeightedProjective::projective(n), &WeightedProjective::projective(n).sectors()[0]).unwrap();
            for a in 0..=8i64 {
                let c = m.assemble_integrand(&KClass::line(a), None, &[]).unwrap();
                assert_eq!(c.evaluate(&m).unwrap(), Cyclotomic::from_integer(binomial(a + n as i64, n as i64)));
            }
        }
    }

    proptest! {
        #[test]
        fn traces_are_multiplicative(
            w in prop::collection::vec(1u64..=6, 1..=4),
            idx in 0usize..16,
            a in -6i64..=6,
            b in -6i64..=6,
        ) {
            let y = wps(&w);
            let sectors = y.sectors();
            let m = LocalModel::for_sector(&y, &sectors[idx % sectors.len()]).unwrap();
            let (ea, sa) = m.trace_char(&o(a));
            let (eb, sb) = m.trace_char(&o(b));
            let (eab, sab) = m.trace_char(&o(a + b));
            prop_assert_eq!(&ea * &eb, eab);
            prop_assert_eq!(&sa * &sb, sab);
        }

        #[test]
        fn integrate_is_linear(a in -5i64..=5, b in -5i64..=5, k in 0i64..6) {
            let y = wps(&[1, 2, 3]);
            let c = Cyclotomic::root_of_unity(6, k);
            let one = Cyclotomic::one();
            let sa = Series::exp_linear(a, &one, 2);
            let sb = Series::exp_linear(b, &one, 2);
            let lhs = integrate(&y, &(&sa.scale(&c) + &sb)).unwrap();
            let rhs = &(&integrate(&y, &sa).unwrap() * &c) + &integrate(&y, &sb).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
