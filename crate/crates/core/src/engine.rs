//! Sector-by-sector evaluation of Kawasaki's Riemann-Roch formula.
//!
//! Every total is summed exactly in a common cyclotomic field and must come out
//! as a rational integer; anything else is reported as an internal error
//! together with the rendered per-sector breakdown.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::classes::{KClass, KTerm, LocalModel};
use crate::cyclotomic::{Cyclotomic, Rational};
use crate::error::{Error, Result};
use crate::geometry::{CyclicQuotient, Sector, WeightedProjective};

/// A zero-locus obstruction theory: the virtual space is cut out of `ambient` by a
/// section of `E = sum_j O(d_j)`, with `E_0 = T_Y` and `E_1 = E` restricted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionSetup {
    ambient: WeightedProjective,
    degrees: Vec<i64>,
}

impl ObstructionSetup {
    pub fn new(ambient: WeightedProjective, degrees: Vec<i64>) -> Result<Self> {
        if let Some(d) = degrees.iter().find(|&&d| d <= 0) {
            return Err(Error::Geometry(format!("obstruction degrees must be positive, got {d}")));
        }
        Ok(ObstructionSetup { ambient, degrees })
    }

    pub fn ambient(&self) -> &WeightedProjective {
        &self.ambient
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    /// `dim Y - rank E`; may be negative.
    pub fn virtual_dim(&self) -> i64 {
        self.ambient.dim() as i64 - self.degrees.len() as i64
    }

    /// Koszul class `Lambda E* = prod_j (1 - O(-d_j))`, the pushforward of `O^vir`.
    pub fn koszul(&self) -> KClass {
        KClass::koszul(&self.degrees)
    }
}

/// One summand of a sector sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorReport {
    pub order: u64,
    pub exponent: u64,
    pub fixed: Vec<usize>,
    pub multiplicity: u64,
    /// The stacky integral over the fixed stratum, `m_mu` already folded in.
    pub contribution: Cyclotomic,
    /// Obstruction degrees on which the sector acts trivially.
    pub fixed_degrees: Vec<i64>,
    pub moving_degrees: Vec<i64>,
}

impl SectorReport {
    fn new(sector: &Sector, contribution: Cyclotomic) -> Self {
        SectorReport {
            order: sector.order,
            exponent: sector.exponent,
            fixed: sector.fixed.clone(),
            multiplicity: sector.multiplicity,
            contribution,
            fixed_degrees: Vec::new(),
            moving_degrees: Vec::new(),
        }
    }

    /// The integral over the stratum with its generic stabilizer of order `m_mu` removed;
    /// the contribution is `(1/m_mu)` times this.
    pub fn effective_integral(&self) -> Cyclotomic {
        self.contribution
            .scale(&Rational::from_integer(BigInt::from(self.multiplicity)))
    }

    pub fn fixed_label(&self) -> String {
        let idx: Vec<String> = self.fixed.iter().map(usize::to_string).collect();
        format!("{{{}}}", idx.join(","))
    }
}

/// Exact integer total with its per-sector breakdown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerResult {
    pub total: BigInt,
    pub sectors: Vec<SectorReport>,
}

/// One fixed component of one group element in the averaged Lefschetz sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LefschetzTerm {
    pub element: u64,
    pub residue: u64,
    pub coords: Vec<usize>,
    /// Holomorphic Lefschetz integral over the component (before averaging).
    pub contribution: Cyclotomic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LefschetzResult {
    pub total: BigInt,
    /// `L(g^t)` for `t = 0..m`.
    pub traces: Vec<Cyclotomic>,
    pub terms: Vec<LefschetzTerm>,
}

/// Smallest order in which every contribution can be written.
pub fn common_order<'a>(values: impl IntoIterator<Item = &'a Cyclotomic>) -> u64 {
    values.into_iter().fold(1, |l, c| l.lcm(&c.order()))
}

/// One line per sector, preceded by the declaration of `z`.
pub fn render_breakdown(sectors: &[SectorReport]) -> Vec<String> {
    let order = common_order(sectors.iter().map(|s| &s.contribution));
    let mut out = vec![format!("z = zeta_{order}")];
    out.extend(sectors.iter().map(|s| {
        format!(
            "sector r={} k={} S={} m={} contribution={}",
            s.order,
            s.exponent,
            s.fixed_label(),
            s.multiplicity,
            s.contribution.render_in(order).expect("order divides the lcm"),
        )
    }));
    out
}

pub fn render_lefschetz_breakdown(terms: &[LefschetzTerm]) -> Vec<String> {
    let order = common_order(terms.iter().map(|t| &t.contribution));
    let mut out = vec![format!("z = zeta_{order}")];
    out.extend(terms.iter().map(|t| {
        let idx: Vec<String> = t.coords.iter().map(usize::to_string).collect();
        format!(
            "element t={} fixed={{{}}} v={} contribution={}",
            t.element,
            idx.join(","),
            t.residue,
            t.contribution.render_in(order).expect("order divides the lcm"),
        )
    }));
    out
}

fn integer_total(total: &Cyclotomic, breakdown: impl FnOnce() -> Vec<String>) -> Result<BigInt> {
    let Some(q) = total.rational_value() else {
        return Err(Error::NonRationalTotal {
            total: total.render(),
            breakdown: breakdown(),
        });
    };
    if !q.is_integer() {
        return Err(Error::NonIntegerTotal {
            total: q.to_string(),
            breakdown: breakdown(),
        });
    }
    Ok(q.to_integer())
}

fn finish(sectors: Vec<SectorReport>) -> Result<EulerResult> {
    let total: Cyclotomic = sectors.iter().map(|s| s.contribution.clone()).sum();
    let effective: Cyclotomic = sectors
        .iter()
        .map(|s| {
            let inv_m = BigRational::new(BigInt::one(), BigInt::from(s.multiplicity));
            s.effective_integral().scale(&inv_m)
        })
        .sum();
    if effective != total {
        return Err(Error::Invariant(
            "stacky and multiplicity-weighted sector sums disagree".into(),
        ));
    }
    let total = integer_total(&total, || render_breakdown(&sectors))?;
    Ok(EulerResult { total, sectors })
}

/// The sector-sum evaluator. `Engine::default()` is the only configuration used
/// outside of fault-injection tests.
#[derive(Clone, Debug, Default)]
pub struct Engine {
    trace_fault: Option<i64>,
}

impl Engine {
    /// An engine that shifts the trace exponent of every bundle term on every non-identity
    /// sector by `offset`. Exists to exercise the integrality guard.
    #[doc(hidden)]
    pub fn with_trace_fault(offset: i64) -> Self {
        Engine {
            trace_fault: Some(offset),
        }
    }

    fn bundle_at(&self, v: &KClass, identity: bool) -> KClass {
        match self.trace_fault {
            Some(offset) if !identity => KClass::from_terms(v.terms().map(|t| KTerm {
                char_shift: t.char_shift + offset,
                ..t
            })),
            _ => v.clone(),
        }
    }

    fn sector_sum(
        &self,
        y: &WeightedProjective,
        mut per_sector: impl FnMut(&Sector, &LocalModel, &KClass) -> Result<SectorReport>,
        v: &KClass,
    ) -> Result<Vec<SectorReport>> {
        y.sectors()
            .iter()
            .map(|sector| {
                let model = LocalModel::for_sector(y, sector)?;
                per_sector(sector, &model, &self.bundle_at(v, sector.is_identity()))
            })
            .collect()
    }

    /// The identity-sector term `int_Y ch(V) Td(T_Y)` alone.
    pub fn chi_fake(&self, y: &WeightedProjective, v: &KClass) -> Result<Rational> {
        let identity = &y.sectors()[0];
        let model = LocalModel::for_sector(y, identity)?;
        let value = model.assemble_integrand(v, None, &[])?.evaluate(&model)?;
        value
            .rational_value()
            .ok_or_else(|| Error::Invariant("identity sector produced an irrational value".into()))
    }

    /// `chi(Y, V)` as the sum over all sectors of Kawasaki's formula.
    pub fn chi_kawasaki(&self, y: &WeightedProjective, v: &KClass) -> Result<EulerResult> {
        let sectors = self.sector_sum(
            y,
            |sector, model, v| {
                let c = model.assemble_integrand(v, None, &[])?.evaluate(model)?;
                Ok(SectorReport::new(sector, c))
            },
            v,
        )?;
        finish(sectors)
    }

    /// Left side of the virtual formula: `chi(Y, V * Lambda E*)`.
    pub fn chi_virtual_direct(&self, setup: &ObstructionSetup, v: &KClass) -> Result<EulerResult> {
        let mut result = self.chi_kawasaki(&setup.ambient, &v.tensor(&setup.koszul()))?;
        for report in &mut result.sectors {
            let zeta = Cyclotomic::root_of_unity(report.order, report.exponent as i64);
            let (fixed, moving) = partition_degrees(&zeta, &setup.degrees);
            report.fixed_degrees = fixed;
            report.moving_degrees = moving;
        }
        Ok(result)
    }

    /// Right side of the virtual formula: each stratum carries the virtual structure sheaf
    /// of the fixed part of `E`, and the moving part of `E` is subtracted from its normal
    /// bundle.
    pub fn chi_virtual_strata(&self, setup: &ObstructionSetup, v: &KClass) -> Result<EulerResult> {
        let sectors = self.sector_sum(
            &setup.ambient,
            |sector, model, v| {
                let (fixed, moving) = partition_degrees(&sector.zeta, &setup.degrees);
                let stratum_koszul = KClass::koszul(&fixed);
                let c = model
                    .assemble_integrand(v, Some(&stratum_koszul), &moving)
                    .map_err(|e| match e {
                        Error::NonUnitSeries => Error::Invariant(format!(
                            "non-invertible virtual normal class at sector r={} k={}",
                            sector.order, sector.exponent
                        )),
                        e => e,
                    })?
                    .evaluate(model)?;
                let mut report = SectorReport::new(sector, c);
                report.fixed_degrees = fixed;
                report.moving_degrees = moving;
                Ok(report)
            },
            v,
        )?;
        finish(sectors)
    }

    /// `(1/m) sum_t L(g^t)`: the holomorphic Lefschetz numbers of `V` averaged over the group,
    /// with the bundle linearized by `shift` units of the defining character.
    pub fn chi_lefschetz(&self, q: &CyclicQuotient, v: &KClass, shift: i64) -> Result<LefschetzResult> {
        let m = q.order();
        let linearized = KClass::from_terms(v.terms().map(|t| KTerm {
            char_shift: t.char_shift + shift,
            ..t
        }));
        let mut terms = Vec::new();
        let mut traces = Vec::new();
        for t in 0..m {
            let bundle = self.bundle_at(&linearized, t == 0);
            let mut trace = Cyclotomic::zero();
            for component in q.fixed_components(t) {
                let model = LocalModel::for_fixed_component(q, t, &component);
                let c = model.assemble_integrand(&bundle, None, &[])?.evaluate(&model)?;
                trace = &trace + &c;
                terms.push(LefschetzTerm {
                    element: t,
                    residue: component.residue,
                    coords: component.coords,
                    contribution: c,
                });
            }
            traces.push(trace);
        }
        let sum: Cyclotomic = traces.iter().cloned().sum();
        let avg = sum.scale(&BigRational::new(BigInt::one(), BigInt::from(m)));
        let total = integer_total(&avg, || render_lefschetz_breakdown(&terms))?;
        Ok(LefschetzResult { total, traces, terms })
    }
}

/// Split obstruction degrees into those fixed by `zeta` and those it moves.
pub fn partition_degrees(zeta: &Cyclotomic, degrees: &[i64]) -> (Vec<i64>, Vec<i64>) {
    degrees
        .iter()
        .partition(|&&d| zeta.pow(d).map(|z| z.is_one()).unwrap_or(false))
}

pub fn chi_fake(y: &WeightedProjective, v: &KClass) -> Result<Rational> {
    Engine::default().chi_fake(y, v)
}

pub fn chi_kawasaki(y: &WeightedProjective, v: &KClass) -> Result<EulerResult> {
    Engine::default().chi_kawasaki(y, v)
}

pub fn chi_virtual_direct(setup: &ObstructionSetup, v: &KClass) -> Result<EulerResult> {
    Engine::default().chi_virtual_direct(setup, v)
}

pub fn chi_virtual_strata(setup: &ObstructionSetup, v: &KClass) -> Result<EulerResult> {
    Engine::default().chi_virtual_strata(setup, v)
}

pub fn chi_lefschetz(q: &CyclicQuotient, v: &KClass, shift: i64) -> Result<LefschetzResult> {
    Engine::default().chi_lefschetz(q, v, shift)
}

/// `chi_kawasaki` of a single line bundle as a machine integer.
pub fn chi_line(y: &WeightedProjective, a: i64) -> Result<i64> {
    let r = chi_kawasaki(y, &KClass::line(a))?;
    i64::try_from(&r.total).map_err(|_| Error::Invariant("total does not fit in i64".into()))
}

impl EulerResult {
    pub fn total_i64(&self) -> i64 {
        i64::try_from(&self.total).expect("Euler characteristic fits in i64")
    }

    pub fn total_cyclotomic(&self) -> Cyclotomic {
        self.sectors.iter().map(|s| s.contribution.clone()).sum()
    }
}

impl LefschetzResult {
    pub fn total_i64(&self) -> i64 {
        i64::try_from(&self.total).expect("Euler characteristic fits in i64")
    }
}
