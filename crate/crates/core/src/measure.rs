//! Finite-support probability measures with exact rational weights.

use std::collections::{BTreeMap, HashSet};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{enumerate_ball, word_length, Element, GeneratingSet, GroupDescriptor};
use crate::scalar::Rational;

/// Probability measure with finitely many atoms, stored in canonical
/// (sorted) support order.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasure {
    group: GroupDescriptor,
    support: Vec<(Element, Rational)>,
}

/// Abelian drift `Σ μ(g)·[g]` in `G_ab ⊗ ℝ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DriftVector(pub Vec<Rational>);

impl DriftVector {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Symmetric / adapted / smooth summary of a measure.
#[derive(Clone, Debug, PartialEq)]
pub struct SasReport {
    pub symmetric: bool,
    /// Smallest `r ≥ 1` with `ball_S(r)` inside the semigroup generated by the
    /// support, found within the search budget; `None` means not certified.
    pub adapted_witness_radius: Option<u32>,
    /// Longest semigroup word needed to reach that ball.
    pub witness_word_length: Option<u32>,
    /// Always true for finite support.
    pub smooth: bool,
    /// `Σ μ(g)·|g|_S`.
    pub first_moment: Rational,
}

impl FiniteMeasure {
    /// Validates positivity, distinctness and exact total mass 1.
    pub fn new(group: GroupDescriptor, entries: Vec<(Element, Rational)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut total = Rational::zero();
        for (i, (g, w)) in entries.iter().enumerate() {
            group.validate(g).map_err(|e| Error::Invalid(format!("measure entry {i}: {e}")))?;
            if !w.is_positive() {
                return Err(Error::Invalid(format!("measure entry {i}: weight {w} must be positive")));
            }
            if !seen.insert(g.clone()) {
                return Err(Error::Invalid(format!("measure entry {i}: duplicate atom {g}")));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::Invalid(format!("measure weights sum to {total}, expected exactly 1")));
        }
        let mut support = entries;
        support.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self { group, support })
    }

    pub fn point_mass(group: GroupDescriptor, g: Element) -> Result<Self> {
        Self::new(group, vec![(g, Rational::one())])
    }

    pub fn uniform(group: GroupDescriptor, elements: &[Element]) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Invalid("uniform measure needs at least one atom".into()));
        }
        let w = Rational::new(1.into(), (elements.len() as i64).into());
        Self::new(group, elements.iter().map(|g| (g.clone(), w.clone())).collect())
    }

    /// Uniform measure on a generating set.
    pub fn simple_random_walk(group: GroupDescriptor, gens: &GeneratingSet) -> Result<Self> {
        Self::uniform(group, gens.elements())
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn support(&self) -> &[(Element, Rational)] {
        &self.support
    }

    pub fn weight(&self, g: &Element) -> Rational {
        self.support
            .binary_search_by(|(x, _)| x.cmp(g))
            .map(|i| self.support[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn is_symmetric(&self) -> Result<bool> {
        for (g, w) in &self.support {
            if &self.weight(&self.group.inverse(g)?) != w {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Precomputes an inverse-CDF table over the canonical support order.
    pub fn sampler(&self) -> Sampler {
        Sampler::new(self)
    }
}

/// `Σ μ(g)·abelianize(g)`, exactly.
pub fn drift_abelian(mu: &FiniteMeasure) -> Result<DriftVector> {
    let mut acc = vec![Rational::zero(); mu.group.rank()];
    for (g, w) in &mu.support {
        for (a, x) in acc.iter_mut().zip(mu.group.abelianize(g)?) {
            *a += w * Rational::from_integer(x.into());
        }
    }
    Ok(DriftVector(acc))
}

/// Symmetry, adaptedness witness and first moment of `mu` with respect to `gens`.
pub fn check_sas(mu: &FiniteMeasure, gens: &GeneratingSet, probe_radius: u32) -> Result<SasReport> {
    if probe_radius == 0 {
        return Err(Error::Invalid("probe radius must be at least 1".into()));
    }
    let g = &mu.group;
    let mut first_moment = Rational::zero();
    for (x, w) in &mu.support {
        let len = word_length(g, x, gens, 64)?
            .ok_or_else(|| Error::Certification(format!("word length of {x} exceeds 64")))?;
        first_moment += w * Rational::from_integer(len.into());
    }

    // Semigroup words over the support, breadth first, up to a length budget.
    // Covering ball(1) already certifies adaptedness since `gens` is a
    // symmetric generating set.
    let budget = 8 * probe_radius;
    let target = enumerate_ball(g, gens, 1)?;
    let mut reached: HashSet<Element> = HashSet::from([g.identity()]);
    let mut frontier = vec![g.identity()];
    let mut witness = None;
    let covered = |reached: &HashSet<Element>| target.iter().all(|x| reached.contains(x));
    for word_len in 1..=budget {
        let mut next = Vec::new();
        for x in &frontier {
            for (s, _) in &mu.support {
                let y = g.mul(x, s)?;
                if reached.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        frontier = next;
        if covered(&reached) {
            witness = Some(word_len);
            break;
        }
        if frontier.is_empty() || reached.len() > 1_000_000 {
            break;
        }
    }
    Ok(SasReport {
        symmetric: mu.is_symmetric()?,
        adapted_witness_radius: witness.map(|_| 1),
        witness_word_length: witness,
        smooth: true,
        first_moment,
    })
}

/// Right-walk convolution: the weight of `z` is `Σ_{gh=z} μ(g)ν(h)`.
pub fn convolve(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<FiniteMeasure> {
    if mu.group != nu.group {
        return Err(Error::mismatch(&mu.group, format!("cannot convolve with a measure on {}", nu.group)));
    }
    let mut acc: BTreeMap<Element, Rational> = BTreeMap::new();
    for (g, a) in &mu.support {
        for (h, b) in &nu.support {
            *acc.entry(mu.group.mul(g, h)?).or_insert_with(Rational::zero) += a * b;
        }
    }
    FiniteMeasure::new(mu.group.clone(), acc.into_iter().filter(|(_, w)| !w.is_zero()).collect())
}

/// Draws one atom of `mu` (builds the sampling table on every call; use
/// [`FiniteMeasure::sampler`] in loops).
pub fn sample<R: Rng + ?Sized>(mu: &FiniteMeasure, rng: &mut R) -> Element {
    mu.sampler().sample(rng).clone()
}

/// Inverse-CDF sampler. Uses exact integer thresholds over the common
/// denominator when it fits in 62 bits, else `f64` cumulative weights.
#[derive(Clone, Debug)]
pub struct Sampler {
    atoms: Vec<Element>,
    table: Table,
}

#[derive(Clone, Debug)]
enum Table {
    Exact { denominator: u64, cumulative: Vec<u64> },
    Float { cumulative: Vec<f64> },
}

impl Sampler {
    fn new(mu: &FiniteMeasure) -> Self {
        let atoms = mu.support.iter().map(|(g, _)| g.clone()).collect();
        let lcm = mu
            .support
            .iter()
            .fold(num_bigint::BigInt::one(), |acc, (_, w)| acc.lcm(w.denom()));
        let table = match lcm.to_u64().filter(|&d| d < 1 << 62) {
            Some(denominator) => {
                let mut run = 0u64;
                let cumulative = mu
                    .support
                    .iter()
                    .map(|(_, w)| {
                        let scaled = w * Rational::from_integer(lcm.clone());
                        run += scaled.to_integer().to_u64().expect("weight ≤ 1");
                        run
                    })
                    .collect();
                Table::Exact { denominator, cumulative }
            }
            None => {
                let mut run = 0.0;
                let cumulative = mu
                    .support
                    .iter()
                    .map(|(_, w)| {
                        run += w.to_f64().unwrap_or(0.0);
                        run
                    })
                    .collect();
                Table::Float { cumulative }
            }
        };
        Self { atoms, table }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Element {
        let i = match &self.table {
            Table::Exact { denominator, cumulative } => {
                let u = rng.gen_range(0..*denominator);
                cumulative.partition_point(|&c| c <= u)
            }
            Table::Float { cumulative } => {
                let u: f64 = rng.gen::<f64>() * cumulative.last().copied().unwrap_or(1.0);
                cumulative.partition_point(|&c| c <= u)
            }
        };
        &self.atoms[i.min(self.atoms.len() - 1)]
    }

    pub fn atoms(&self) -> &[Element] {
        &self.atoms
    }
}
