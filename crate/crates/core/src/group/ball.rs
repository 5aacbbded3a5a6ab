use std::collections::HashMap;

use super::{Element, GeneratingSet, GroupDescriptor};
use crate::error::{Error, Result};

/// Default element cap for breadth-first ball enumeration.
pub const DEFAULT_BALL_CAP: usize = 5_000_000;

/// Word-metric ball `{g : |g|_S ≤ radius}` with exact lengths, in BFS order.
#[derive(Clone, Debug)]
pub struct BallIndex {
    radius: u32,
    generating_set: GeneratingSet,
    elements: Vec<(Element, u32)>,
    index: HashMap<Element, u32>,
    /// `layer_ends[r]` = number of elements of length ≤ r.
    layer_ends: Vec<usize>,
}

impl BallIndex {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn generating_set(&self) -> &GeneratingSet {
        &self.generating_set
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Word length of `g`, if it lies in the ball.
    pub fn length(&self, g: &Element) -> Option<u32> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.index.contains_key(g)
    }

    /// All members with their lengths, in deterministic BFS order.
    pub fn elements(&self) -> &[(Element, u32)] {
        &self.elements
    }

    /// Members of length at most `r` (a prefix of [`Self::elements`]).
    pub fn within(&self, r: u32) -> &[(Element, u32)] {
        let r = r.min(self.radius) as usize;
        &self.elements[..self.layer_ends[r]]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().map(|(g, _)| g)
    }
}

/// Enumerates the ball of radius `r` with the default element cap.
pub fn enumerate_ball(group: &GroupDescriptor, gens: &GeneratingSet, r: u32) -> Result<BallIndex> {
    enumerate_ball_with_cap(group, gens, r, DEFAULT_BALL_CAP)
}

pub fn enumerate_ball_with_cap(
    group: &GroupDescriptor,
    gens: &GeneratingSet,
    r: u32,
    cap: usize,
) -> Result<BallIndex> {
    let id = group.identity();
    let mut elements = vec![(id.clone(), 0)];
    let mut index = HashMap::from([(id, 0)]);
    let mut layer_ends = vec![1];
    let mut start = 0;
    for len in 1..=r {
        let end = elements.len();
        for i in start..end {
            for s in gens.elements() {
                let h = group.mul(&elements[i].0, s)?;
                if index.contains_key(&h) {
                    continue;
                }
                if elements.len() >= cap {
                    return Err(Error::BallCapExceeded { cap, radius: r });
                }
                index.insert(h.clone(), len);
                elements.push((h, len));
            }
        }
        start = end;
        layer_ends.push(elements.len());
    }
    Ok(BallIndex {
        radius: r,
        generating_set: gens.clone(),
        elements,
        index,
        layer_ends,
    })
}

/// Exact word length of `g`, or `None` when `|g|_S > cap`.
pub fn word_length(group: &GroupDescriptor, g: &Element, gens: &GeneratingSet, cap: u32) -> Result<Option<u32>> {
    group.validate(g)?;
    let id = group.identity();
    if *g == id {
        return Ok(Some(0));
    }
    let mut seen = std::collections::HashSet::from([id.clone()]);
    let mut frontier = vec![id];
    for len in 1..=cap {
        let mut next = Vec::new();
        for x in &frontier {
            for s in gens.elements() {
                let h = group.mul(x, s)?;
                if &h == g {
                    return Ok(Some(len));
                }
                if seen.insert(h.clone()) {
                    if seen.len() > DEFAULT_BALL_CAP {
                        return Err(Error::BallCapExceeded {
                            cap: DEFAULT_BALL_CAP,
                            radius: len,
                        });
                    }
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}
