use super::{Element, GroupDescriptor};
use crate::error::{Error, Result};

/// Which catalog subgroup a [`MarkedSubgroup`] describes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgroupKind {
    /// `H = G`.
    Whole,
    /// `{x ∈ ℤ^d : x[axis] ≡ 0 mod modulus}`.
    Scaled { axis: usize, modulus: i64 },
    /// `{x ∈ ℤ^d : Σ x_i ≡ 0 mod 2}`.
    EvenSum,
    /// The rotation subgroup `⟨r⟩` of `D∞`.
    Rotation,
    /// Componentwise subgroups of a direct product.
    Product(Vec<MarkedSubgroup>),
}

/// Finite-index subgroup `H ≤ G` with a coset labeling, a transversal and an
/// identification of `H` with a model group.
///
/// Cosets are right cosets: `G = ⊔ H·t_j` with `t_0 = e`, and every
/// `g` decomposes as `g = from_model(h)·transversal[label(g)]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedSubgroup {
    parent: GroupDescriptor,
    model: GroupDescriptor,
    kind: SubgroupKind,
    transversal: Vec<Element>,
    /// `R_parent × R_model` integer matrix of `H_ab ⊗ ℝ → G_ab ⊗ ℝ`.
    inclusion_ab: Vec<Vec<i64>>,
}

impl MarkedSubgroup {
    pub fn whole(group: GroupDescriptor) -> Self {
        let r = group.rank();
        let inclusion_ab = (0..r).map(|i| (0..r).map(|j| (i == j) as i64).collect()).collect();
        Self {
            transversal: vec![group.identity()],
            model: group.clone(),
            parent: group,
            kind: SubgroupKind::Whole,
            inclusion_ab,
        }
    }

    /// `ℤ^{axis-1} × mℤ × ℤ^{d-axis}` inside `ℤ^d`.
    pub fn scaled(d: usize, axis: usize, modulus: i64) -> Result<Self> {
        if axis >= d || modulus < 1 {
            return Err(Error::Invalid(format!(
                "scaled subgroup needs axis < {d} and modulus ≥ 1 (got axis {axis}, modulus {modulus})"
            )));
        }
        let parent = GroupDescriptor::free_abelian(d);
        let transversal = (0..modulus)
            .map(|j| {
                let mut v = vec![0; d];
                v[axis] = j;
                Element::free(&v)
            })
            .collect();
        let inclusion_ab = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| match (i == j, i == axis) {
                        (true, true) => modulus,
                        (true, false) => 1,
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            model: parent.clone(),
            parent,
            kind: SubgroupKind::Scaled { axis, modulus },
            transversal,
            inclusion_ab,
        })
    }

    /// Even coordinate sum in `ℤ^d`. The model basis is `2e₁, e₂−e₁, …, e_d−e₁`.
    pub fn even_sum(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Invalid("even-sum subgroup needs d ≥ 1".into()));
        }
        let parent = GroupDescriptor::free_abelian(d);
        let mut e1 = vec![0; d];
        e1[0] = 1;
        let inclusion_ab = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| match (i, j) {
                        (0, 0) => 2,
                        (0, _) => -1,
                        (i, j) if i == j => 1,
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            model: parent.clone(),
            transversal: vec![parent.identity(), Element::free(&e1)],
            parent,
            kind: SubgroupKind::EvenSum,
            inclusion_ab,
        })
    }

    /// `N = ⟨r⟩ ≅ ℤ` inside `D∞`, transversal `(e, s)`.
    pub fn rotation() -> Self {
        Self {
            parent: GroupDescriptor::DihedralInfinite,
            model: GroupDescriptor::free_abelian(1),
            kind: SubgroupKind::Rotation,
            transversal: vec![Element::dihedral(0, false), Element::dihedral(0, true)],
            inclusion_ab: Vec::new(),
        }
    }

    /// Product of subgroups of the factors of a direct product. Labels are
    /// mixed-radix with the last factor varying fastest.
    pub fn product(parts: Vec<MarkedSubgroup>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Invalid("product subgroup needs at least one factor".into()));
        }
        let parent = GroupDescriptor::product(parts.iter().map(|p| p.parent.clone()).collect());
        let model = GroupDescriptor::product(parts.iter().map(|p| p.model.clone()).collect());
        let index: usize = parts.iter().map(|p| p.index()).product();
        let transversal = (0..index)
            .map(|label| {
                let digits = mixed_radix_digits(label, &parts);
                Element::Product(parts.iter().zip(digits).map(|(p, j)| p.transversal[j].clone()).collect())
            })
            .collect();
        let (rp, rm) = (parent.rank(), model.rank());
        let mut inclusion_ab = vec![vec![0; rm]; rp];
        let (mut row0, mut col0) = (0, 0);
        for p in &parts {
            for (i, row) in p.inclusion_ab.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    inclusion_ab[row0 + i][col0 + j] = v;
                }
            }
            row0 += p.parent.rank();
            col0 += p.model.rank();
        }
        Ok(Self {
            parent,
            model,
            transversal,
            inclusion_ab,
            kind: SubgroupKind::Product(parts),
        })
    }

    pub fn parent(&self) -> &GroupDescriptor {
        &self.parent
    }

    pub fn model(&self) -> &GroupDescriptor {
        &self.model
    }

    pub fn kind(&self) -> &SubgroupKind {
        &self.kind
    }

    pub fn index(&self) -> usize {
        self.transversal.len()
    }

    pub fn transversal(&self) -> &[Element] {
        &self.transversal
    }

    pub fn inclusion_ab(&self) -> &[Vec<i64>] {
        &self.inclusion_ab
    }

    /// Coset label of `g`; `H` is the preimage of 0.
    pub fn label(&self, g: &Element) -> Result<usize> {
        match (&self.kind, g) {
            (SubgroupKind::Whole, _) => self.parent.validate(g).map(|_| 0),
            (SubgroupKind::Scaled { axis, modulus }, Element::Free(v)) if v.len() == self.parent.coord_len() => {
                Ok(v[*axis].rem_euclid(*modulus) as usize)
            }
            (SubgroupKind::EvenSum, Element::Free(v)) if v.len() == self.parent.coord_len() => {
                Ok(v.iter().fold(0i64, |acc, x| (acc + x.rem_euclid(2)) % 2) as usize)
            }
            (SubgroupKind::Rotation, Element::Dihedral { flip, .. }) => Ok(*flip as usize),
            (SubgroupKind::Product(parts), Element::Product(xs)) if xs.len() == parts.len() => {
                let mut label = 0;
                for (p, x) in parts.iter().zip(xs) {
                    label = label * p.index() + p.label(x)?;
                }
                Ok(label)
            }
            _ => Err(Error::mismatch(&self.parent, format!("cannot label {g:?}"))),
        }
    }

    pub fn contains(&self, g: &Element) -> Result<bool> {
        Ok(self.label(g)? == 0)
    }

    /// Model coordinates of `h ∈ H`.
    pub fn to_model(&self, h: &Element) -> Result<Element> {
        if self.label(h)? != 0 {
            return Err(Error::Invalid(format!("{h} is not in the subgroup")));
        }
        Ok(match (&self.kind, h) {
            (SubgroupKind::Whole, _) => h.clone(),
            (SubgroupKind::Scaled { axis, modulus }, Element::Free(v)) => {
                let mut m = v.clone();
                m[*axis] /= *modulus;
                Element::Free(m)
            }
            (SubgroupKind::EvenSum, Element::Free(v)) => {
                let tail: i64 = v[1..].iter().sum();
                let mut m = v.clone();
                m[0] = (v[0] + tail) / 2;
                Element::Free(m)
            }
            (SubgroupKind::Rotation, Element::Dihedral { shift, .. }) => Element::free(&[*shift]),
            (SubgroupKind::Product(parts), Element::Product(xs)) => Element::Product(
                parts
                    .iter()
                    .zip(xs)
                    .map(|(p, x)| p.to_model(x))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => unreachable!("label() validated the element kind"),
        })
    }

    /// The element of `H ≤ G` with model coordinates `m`.
    pub fn from_model(&self, m: &Element) -> Result<Element> {
        self.model.validate(m)?;
        let overflow = || Error::Overflow("subgroup embedding".into());
        Ok(match (&self.kind, m) {
            (SubgroupKind::Whole, _) => m.clone(),
            (SubgroupKind::Scaled { axis, modulus }, Element::Free(v)) => {
                let mut g = v.clone();
                g[*axis] = g[*axis].checked_mul(*modulus).ok_or_else(overflow)?;
                Element::Free(g)
            }
            (SubgroupKind::EvenSum, Element::Free(v)) => {
                let tail: i64 = v[1..].iter().sum();
                let mut g = v.clone();
                g[0] = v[0].checked_mul(2).and_then(|x| x.checked_sub(tail)).ok_or_else(overflow)?;
                Element::Free(g)
            }
            (SubgroupKind::Rotation, Element::Free(v)) => Element::dihedral(v[0], false),
            (SubgroupKind::Product(parts), Element::Product(xs)) => Element::Product(
                parts
                    .iter()
                    .zip(xs)
                    .map(|(p, x)| p.from_model(x))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => unreachable!("model.validate() checked the element kind"),
        })
    }

    /// Splits `g = from_model(h) · transversal[t]`, returning `(h, t)` with
    /// `h` in model coordinates.
    pub fn coset_decompose(&self, g: &Element) -> Result<(Element, usize)> {
        let t = self.label(g)?;
        let tinv = self.parent.inverse(&self.transversal[t])?;
        let h = self.parent.mul(g, &tinv)?;
        Ok((self.to_model(&h)?, t))
    }
}

fn mixed_radix_digits(mut label: usize, parts: &[MarkedSubgroup]) -> Vec<usize> {
    let mut digits = vec![0; parts.len()];
    for (i, p) in parts.iter().enumerate().rev() {
        digits[i] = label % p.index();
        label /= p.index();
    }
    digits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_ball;

    fn recomposes(h: &MarkedSubgroup, radius: u32) {
        let g = h.parent();
        let ball = enumerate_ball(g, &g.default_generators(), radius).unwrap();
        for x in ball.iter() {
            let (m, t) = h.coset_decompose(x).unwrap();
            let back = g.mul(&h.from_model(&m).unwrap(), &h.transversal()[t]).unwrap();
            assert_eq!(&back, x);
            assert_eq!(h.label(x).unwrap(), t);
            assert_eq!(h.to_model(&h.from_model(&m).unwrap()).unwrap(), m);
        }
    }

    #[test]
    fn parity_split_of_integers() {
        let h = MarkedSubgroup::scaled(1, 0, 2).unwrap();
        let (m, t) = h.coset_decompose(&Element::free(&[5])).unwrap();
        assert_eq!((m, t), (Element::free(&[2]), 1));
        let (m, t) = h.coset_decompose(&Element::free(&[-3])).unwrap();
        assert_eq!((m, t), (Element::free(&[-2]), 1));
        assert_eq!(h.inclusion_ab(), &[vec![2]]);
    }

    #[test]
    fn dihedral_rotation_core() {
        let n = MarkedSubgroup::rotation();
        let (m, t) = n.coset_decompose(&Element::dihedral(7, true)).unwrap();
        assert_eq!((m, t), (Element::free(&[7]), 1));
        assert_eq!(n.from_model(&Element::free(&[7])).unwrap(), Element::dihedral(7, false));
        assert!(n.inclusion_ab().is_empty());
        assert_eq!(n.model().rank(), 1);
    }

    #[test]
    fn identity_decomposes_trivially() {
        for h in [
            MarkedSubgroup::scaled(2, 1, 3).unwrap(),
            MarkedSubgroup::even_sum(3).unwrap(),
            MarkedSubgroup::rotation(),
            MarkedSubgroup::whole(GroupDescriptor::Heisenberg3),
        ] {
            let id = h.parent().identity();
            assert_eq!(h.coset_decompose(&id).unwrap(), (h.model().identity(), 0));
        }
    }

    #[test]
    fn recomposition_on_radius_six_balls() {
        recomposes(&MarkedSubgroup::scaled(2, 0, 2).unwrap(), 6);
        recomposes(&MarkedSubgroup::even_sum(2).unwrap(), 6);
        recomposes(&MarkedSubgroup::rotation(), 6);
        recomposes(&MarkedSubgroup::whole(GroupDescriptor::Heisenberg3), 6);
        recomposes(
            &MarkedSubgroup::product(vec![MarkedSubgroup::rotation(), MarkedSubgroup::scaled(1, 0, 2).unwrap()]).unwrap(),
            6,
        );
    }

    #[test]
    fn labels_are_homomorphisms_onto_the_quotient() {
        let h = MarkedSubgroup::rotation();
        let g = h.parent().clone();
        let ball = enumerate_ball(&g, &g.default_generators(), 4).unwrap();
        for x in ball.iter() {
            for y in ball.iter() {
                let xy = g.mul(x, y).unwrap();
                assert_eq!(h.label(&xy).unwrap(), (h.label(x).unwrap() + h.label(y).unwrap()) % 2);
            }
        }
    }

    #[test]
    fn even_sum_inclusion_matches_embedding() {
        let h = MarkedSubgroup::even_sum(2).unwrap();
        // model basis vectors map onto the columns of inclusion_ab
        for j in 0..2 {
            let mut e = vec![0; 2];
            e[j] = 1;
            let img = h.from_model(&Element::free(&e)).unwrap();
            let col: Vec<i64> = h.inclusion_ab().iter().map(|row| row[j]).collect();
            assert_eq!(img.coords(), col);
        }
    }

    #[test]
    fn non_members_have_no_model_coordinates() {
        let h = MarkedSubgroup::scaled(1, 0, 2).unwrap();
        assert!(h.to_model(&Element::free(&[3])).is_err());
        assert!(MarkedSubgroup::scaled(1, 1, 2).is_err());
    }

    #[test]
    fn dihedral_core_of_products() {
        let g = GroupDescriptor::product(vec![GroupDescriptor::DihedralInfinite, GroupDescriptor::free_abelian(1)]);
        let core = g.nilpotent_core();
        assert_eq!(core.index(), 2);
        assert_eq!(core.model().rank(), 2);
        assert_eq!(core.inclusion_ab(), &[vec![0, 1]]);
    }
}
