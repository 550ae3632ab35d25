//! Supported orbifolds and the components of their inertia orbifolds.
//!
//! Two families are supported: weighted projective stacks `P(w_0, ..., w_n)`
//! and global quotients `[P^n / mu_m]` by a diagonal cyclic action. All local
//! groups are cyclic, so a sector is determined by a primitive root of unity.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;

use crate::cyclotomic::{totient, Cyclotomic};
use crate::error::{Error, Result};

/// The weighted projective stack `P(w_0, ..., w_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedProjective {
    weights: Vec<u64>,
}

impl WeightedProjective {
    pub fn new(weights: Vec<u64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Geometry("at least one weight is required".into()));
        }
        if weights.contains(&0) {
            return Err(Error::Geometry("weights must be positive".into()));
        }
        Ok(WeightedProjective { weights })
    }

    /// Ordinary projective space `P^n`.
    pub fn projective(n: usize) -> Self {
        WeightedProjective {
            weights: vec![1; n + 1],
        }
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    /// Generic stabilizer order.
    pub fn gcd(&self) -> u64 {
        self.weights.iter().fold(0, |g, w| g.gcd(w))
    }

    pub fn weight_product(&self) -> u64 {
        self.weights.iter().product()
    }

    /// Sectors of the inertia orbifold, identity first, then by `(r, k)`.
    pub fn sectors(&self) -> Vec<Sector> {
        let max = *self.weights.iter().max().unwrap();
        let mut out = Vec::new();
        for r in 1..=max {
            let fixed: Vec<usize> = (0..self.weights.len())
                .filter(|&i| self.weights[i] % r == 0)
                .collect();
            if fixed.is_empty() {
                continue;
            }
            let multiplicity = fixed.iter().fold(0, |g, &i| g.gcd(&self.weights[i]));
            for k in 0..r {
                if k.gcd(&r) != 1 {
                    continue;
                }
                out.push(Sector {
                    order: r,
                    exponent: k,
                    zeta: Cyclotomic::root_of_unity(r, k as i64),
                    fixed: fixed.clone(),
                    multiplicity,
                });
            }
        }
        out
    }

    /// `P(w_S)`, the fixed stratum of a sector.
    pub fn fixed_locus(&self, sector: &Sector) -> WeightedProjective {
        WeightedProjective {
            weights: sector.fixed.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// Weights and character exponents of the directions normal to a sector.
    pub fn normal_data(&self, sector: &Sector) -> Result<Vec<NormalDatum>> {
        (0..self.weights.len())
            .filter(|i| !sector.fixed.contains(i))
            .map(|j| {
                let w = self.weights[j];
                let character = (w * sector.exponent) % sector.order;
                if character == 0 {
                    return Err(Error::Invariant(format!(
                        "normal direction {j} of sector r={} k={} has trivial character",
                        sector.order, sector.exponent
                    )));
                }
                Ok(NormalDatum {
                    weight: w,
                    character,
                })
            })
            .collect()
    }

    /// Number of sectors predicted by counting primitive roots: the sum of `phi(r)`
    /// over every `r` dividing some weight.
    pub fn expected_sector_count(&self) -> usize {
        let max = *self.weights.iter().max().unwrap();
        (1..=max)
            .filter(|r| self.weights.iter().any(|w| w % r == 0))
            .map(|r| totient(r) as usize)
            .sum()
    }
}

impl fmt::Display for WeightedProjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ws: Vec<String> = self.weights.iter().map(u64::to_string).collect();
        write!(f, "P({})", ws.join(","))
    }
}

/// One connected component of the inertia orbifold of a weighted projective stack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sector {
    /// Order `r` of the root of unity.
    pub order: u64,
    /// Exponent `k`, coprime to `r` (or `0` for the identity sector).
    pub exponent: u64,
    /// `zeta_r^k`.
    pub zeta: Cyclotomic,
    /// Indices `i` with `r | w_i`.
    pub fixed: Vec<usize>,
    /// `gcd(w_i : i in fixed)`, the order of the subgroup acting trivially on the fixed chart.
    pub multiplicity: u64,
}

impl Sector {
    pub fn is_identity(&self) -> bool {
        self.order == 1
    }

    pub fn dim(&self) -> usize {
        self.fixed.len() - 1
    }

    /// `S={0,1}` style rendering of the fixed index set.
    pub fn fixed_label(&self) -> String {
        let idx: Vec<String> = self.fixed.iter().map(usize::to_string).collect();
        format!("{{{}}}", idx.join(","))
    }
}

/// A direction normal to a fixed stratum: `O(weight)` on which the sector acts by
/// `zeta_r^character`, with `character != 0 mod r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalDatum {
    pub weight: u64,
    pub character: u64,
}

/// `[P^n / mu_m]`, the generator acting on coordinate `i` by `zeta_m^(t_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicQuotient {
    order: u64,
    action: Vec<u64>,
}

/// A connected component `P(V_v)` of the fixed locus of a group element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedComponent {
    /// The common value `v = t * t_i mod m` on the coordinates of this component.
    pub residue: u64,
    pub coords: Vec<usize>,
}

impl CyclicQuotient {
    pub fn new(order: u64, action: Vec<u64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Geometry("group order must be positive".into()));
        }
        if action.is_empty() {
            return Err(Error::Geometry("at least one coordinate is required".into()));
        }
        let action = action.into_iter().map(|t| t % order).collect();
        Ok(CyclicQuotient { order, action })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn action(&self) -> &[u64] {
        &self.action
    }

    pub fn dim(&self) -> usize {
        self.action.len() - 1
    }

    /// Fixed components of `g^t` on `P^n`, one per distinct value of `t * t_i mod m`.
    pub fn fixed_components(&self, t: u64) -> Vec<FixedComponent> {
        let mut classes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, &ti) in self.action.iter().enumerate() {
            classes.entry((t * ti) % self.order).or_default().push(i);
        }
        classes
            .into_iter()
            .map(|(residue, coords)| FixedComponent { residue, coords })
            .collect()
    }
}

impl fmt::Display for CyclicQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts: Vec<String> = self.action.iter().map(u64::to_string).collect();
        write!(f, "[P{}/mu_{}] act=({})", self.dim(), self.order, ts.join(","))
    }
}
