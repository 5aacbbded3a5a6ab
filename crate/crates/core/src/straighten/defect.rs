use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use super::qi::CoarseMap;
use crate::error::{Error, Result};
use crate::group::{enumerate_ball, Element};
use crate::walk::stream_rng;

/// Pair sweeps at or below this size are exhaustive.
pub const EXHAUSTIVE_PAIR_LIMIT: u64 = 10_000_000;
const CELL_DEFECT: u64 = 3;

/// Point set on which `δ(x, y)` is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    /// The word ball of the source's default generators.
    Ball { radius: u32 },
    /// Powers `ℓ_iⁿ`, `|n| ≤ radius`, of the Abelian basis lifts; the radius
    /// of `ℓ_iⁿ` is taken to be `|n|`.
    Rays { radius: u32 },
}

impl Probe {
    pub fn radius(self) -> u32 {
        match self {
            Probe::Ball { radius } | Probe::Rays { radius } => radius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DefectOptions {
    pub probe: Probe,
    pub pair_budget: u64,
    pub seed: u64,
    /// Only count pairs whose product is again a probe point.
    pub product_in_probe: bool,
}

impl DefectOptions {
    pub fn ball(radius: u32) -> Self {
        Self {
            probe: Probe::Ball { radius },
            pair_budget: 1_000_000,
            seed: 0,
            product_in_probe: false,
        }
    }

    pub fn rays(radius: u32) -> Self {
        Self {
            probe: Probe::Rays { radius },
            ..Self::ball(radius)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectWitness {
    pub x: Element,
    pub y: Element,
    pub delta: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectReport {
    /// Sup-norm of `δ` over the examined pairs; a lower bound for `Δ_ab`
    /// when not `exhaustive`.
    pub max_defect: i64,
    pub witness: Option<DefectWitness>,
    /// `(r, max defect over pairs with both points of radius ≤ r)`.
    pub growth_curve: Vec<(u32, i64)>,
    pub exhaustive: bool,
    pub pairs: u64,
    pub options: DefectOptions,
}

impl DefectReport {
    pub fn at_radius(&self, r: u32) -> i64 {
        self.growth_curve
            .iter()
            .take_while(|(rad, _)| *rad <= r)
            .last()
            .map_or(0, |(_, d)| *d)
    }
}

/// `δ(x,y) = A(xy) − A(x) − A(y)` with `A = π_M ∘ Ψ`.
pub fn defect_at<M: CoarseMap + ?Sized>(psi: &M, x: &Element, y: &Element) -> Result<Vec<i64>> {
    let a = |g: &Element| psi.target().abelianize(&psi.eval(g)?);
    let xy = psi.source().mul(x, y)?;
    combine(&a(&xy)?, &a(x)?, &a(y)?)
}

fn combine(axy: &[i64], ax: &[i64], ay: &[i64]) -> Result<Vec<i64>> {
    axy.iter()
        .zip(ax)
        .zip(ay)
        .map(|((p, q), r)| p.checked_sub(*q).and_then(|v| v.checked_sub(*r)))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Overflow("abelian defect".into()))
}

fn sup(v: &[i64]) -> i64 {
    v.iter().map(|x| x.saturating_abs()).max().unwrap_or(0)
}

fn probe_points<M: CoarseMap + ?Sized>(psi: &M, probe: Probe) -> Result<Vec<(Element, u32)>> {
    let g = psi.source();
    match probe {
        Probe::Ball { radius } => Ok(enumerate_ball(g, &g.default_generators(), radius)?.elements().to_vec()),
        Probe::Rays { radius } => {
            let mut pts = vec![(g.identity(), 0)];
            for lift in g.abelian_basis_lifts() {
                for n in 1..=radius as i64 {
                    pts.push((g.pow(&lift, n)?, n as u32));
                    pts.push((g.pow(&lift, -n)?, n as u32));
                }
            }
            Ok(pts)
        }
    }
}

#[derive(Clone)]
struct Partial {
    per_radius: Vec<i64>,
    best: Option<(i64, usize, usize)>,
    pairs: u64,
}

impl Partial {
    fn new(r: usize) -> Self {
        Self {
            per_radius: vec![0; r + 1],
            best: None,
            pairs: 0,
        }
    }

    fn record(&mut self, d: i64, rad: u32, i: usize, j: usize) {
        let slot = &mut self.per_radius[rad as usize];
        *slot = (*slot).max(d);
        self.pairs += 1;
        if better((d, i, j), self.best) {
            self.best = Some((d, i, j));
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.per_radius.iter_mut().zip(other.per_radius) {
            *a = (*a).max(b);
        }
        self.pairs += other.pairs;
        if let Some(b) = other.best {
            if better(b, self.best) {
                self.best = Some(b);
            }
        }
        self
    }
}

// larger defect wins; ties go to the lexicographically smallest pair
fn better(c: (i64, usize, usize), cur: Option<(i64, usize, usize)>) -> bool {
    match cur {
        None => true,
        Some((d, i, j)) => c.0 > d || (c.0 == d && (c.1, c.2) < (i, j)),
    }
}

pub fn abelian_defect<M: CoarseMap + ?Sized>(psi: &M, opts: &DefectOptions) -> Result<DefectReport> {
    let radius = opts.probe.radius();
    if radius == 0 {
        return Err(Error::Invalid("probe radius must be at least 1".into()));
    }
    let pts = probe_points(psi, opts.probe)?;
    let (src, tgt) = (psi.source(), psi.target());
    let images: Vec<Vec<i64>> = pts
        .par_iter()
        .map(|(x, _)| tgt.abelianize(&psi.eval(x)?))
        .collect::<Result<_>>()?;
    let index: HashMap<&Element, usize> = pts.iter().enumerate().map(|(i, (x, _))| (x, i)).collect();

    let eval_pair = |i: usize, j: usize| -> Result<Option<i64>> {
        let xy = src.mul(&pts[i].0, &pts[j].0)?;
        let axy = match index.get(&xy) {
            Some(&k) => images[k].clone(),
            None if opts.product_in_probe => return Ok(None),
            None => tgt.abelianize(&psi.eval(&xy)?)?,
        };
        Ok(Some(sup(&combine(&axy, &images[i], &images[j])?)))
    };

    let n = pts.len() as u64;
    let total = n * n;
    let exhaustive = total <= EXHAUSTIVE_PAIR_LIMIT;
    let r = radius as usize;
    let partial = if exhaustive {
        (0..pts.len())
            .into_par_iter()
            .map(|i| {
                let mut p = Partial::new(r);
                for j in 0..pts.len() {
                    if let Some(d) = eval_pair(i, j)? {
                        p.record(d, pts[i].1.max(pts[j].1), i, j);
                    }
                }
                Ok(p)
            })
            .try_reduce(|| Partial::new(r), |a, b| Ok(a.merge(b)))?
    } else {
        let mut rng = stream_rng(opts.seed, CELL_DEFECT, 0);
        let pairs: Vec<(usize, usize)> = (0..opts.pair_budget)
            .map(|_| (rng.gen_range(0..pts.len()), rng.gen_range(0..pts.len())))
            .collect();
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let mut p = Partial::new(r);
                if let Some(d) = eval_pair(i, j)? {
                    p.record(d, pts[i].1.max(pts[j].1), i, j);
                }
                Ok(p)
            })
            .try_reduce(|| Partial::new(r), |a, b| Ok(a.merge(b)))?
    };

    let mut growth_curve = Vec::with_capacity(r + 1);
    let mut run = 0;
    for (rad, d) in partial.per_radius.iter().enumerate() {
        run = run.max(*d);
        growth_curve.push((rad as u32, run));
    }
    let witness = match partial.best {
        Some((_, i, j)) => {
            let (x, y) = (pts[i].0.clone(), pts[j].0.clone());
            let delta = defect_at(psi, &x, &y)?;
            Some(DefectWitness { x, y, delta })
        }
        None => None,
    };
    Ok(DefectReport {
        max_defect: run,
        witness,
        growth_curve,
        exhaustive,
        pairs: partial.pairs,
        options: *opts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupDescriptor;
    use crate::straighten::qi::{QiMapExpr, QiPrimitive, ShearKind};

    fn shear(kind: ShearKind) -> QiMapExpr {
        QiMapExpr::new(
            GroupDescriptor::free_abelian(2),
            vec![QiPrimitive::Shear { axis: 1, of: 0, kind }],
        )
        .unwrap()
    }

    #[test]
    fn mod2_shear_has_defect_two() {
        for r in 1..=4 {
            let rep = abelian_defect(&shear(ShearKind::Mod2), &DefectOptions::ball(r)).unwrap();
            assert_eq!(rep.max_defect, 2);
            assert!(rep.exhaustive);
            let w = rep.witness.unwrap();
            assert_eq!(sup(&w.delta), 2);
        }
    }

    #[test]
    fn sqrt_shear_witness() {
        let psi = shear(ShearKind::SqrtFloor);
        let x = Element::free(&[100, 0]);
        assert_eq!(defect_at(&psi, &x, &x).unwrap(), vec![0, -6]);
    }

    #[test]
    fn linear_maps_have_zero_defect() {
        let psi = QiMapExpr::new(
            GroupDescriptor::Heisenberg3,
            vec![QiPrimitive::LatticeLinear { matrix: vec![vec![1, 1], vec![0, 1]] }],
        )
        .unwrap();
        let rep = abelian_defect(&psi, &DefectOptions::ball(3)).unwrap();
        assert_eq!(rep.max_defect, 0);
    }

    #[test]
    fn growth_curve_is_monotone_and_sampling_is_seeded() {
        let psi = shear(ShearKind::SqrtFloor);
        let mut opts = DefectOptions::rays(3_000);
        opts.pair_budget = 20_000;
        let a = abelian_defect(&psi, &opts).unwrap();
        assert!(!a.exhaustive);
        assert!(a.growth_curve.windows(2).all(|w| w[0].1 <= w[1].1));
        assert_eq!(a, abelian_defect(&psi, &opts).unwrap());
    }
}
