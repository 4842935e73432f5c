//! Permutation groups given by generators: orbits, blocks, primitivity.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for x in 0..n {
            let r = self.find(x);
            by_root[r].push(x);
        }
        let mut out: Vec<Vec<usize>> = by_root.into_iter().filter(|c| !c.is_empty()).collect();
        out.sort();
        out
    }
}

/// A partition of the points into blocks, held as sorted lists of sorted
/// 0-based blocks. Serialized 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockSystem {
    blocks: Vec<Vec<usize>>,
}

impl BlockSystem {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        let d: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; d];
        for &x in blocks.iter().flatten() {
            if x >= d || seen[x] {
                return Err(Error::invalid("blocks do not partition the points"));
            }
            seen[x] = true;
        }
        if blocks.iter().any(Vec::is_empty) {
            return Err(Error::invalid("empty block"));
        }
        Ok(BlockSystem { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn degree(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// One block or singletons only.
    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1 || self.blocks.iter().all(|b| b.len() == 1)
    }

    /// Block index of every point.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.degree()];
        for (i, b) in self.blocks.iter().enumerate() {
            for &x in b {
                out[x] = i;
            }
        }
        out
    }

    /// Whether `g` maps every block onto a block.
    pub fn is_preserved_by(&self, g: &Permutation) -> bool {
        if g.degree() != self.degree() {
            return false;
        }
        let of = self.block_of();
        self.blocks.iter().all(|b| {
            let target = of[g.image(b[0])];
            b.iter().all(|&x| of[g.image(x)] == target)
        })
    }
}

impl Serialize for BlockSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let one_based: Vec<Vec<usize>> = self.blocks.iter().map(|b| b.iter().map(|x| x + 1).collect()).collect();
        one_based.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Vec<usize>>::deserialize(d)?;
        if raw.iter().flatten().any(|&x| x == 0) {
            return Err(serde::de::Error::custom("block points are 1-based"));
        }
        BlockSystem::new(raw.into_iter().map(|b| b.into_iter().map(|x| x - 1).collect()).collect())
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Primitivity {
    Primitive,
    Imprimitive(BlockSystem),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPointVerdict {
    /// `<G_x, G_y> = G`.
    Equal,
    /// `<G_x, G_y>` is a proper subgroup.
    Proper,
    /// The group has more elements than the cap allowed.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct GeneratedGroup {
    degree: usize,
    generators: Vec<Permutation>,
}

impl GeneratedGroup {
    pub fn new(generators: Vec<Permutation>) -> Result<Self> {
        let degree = generators.first().ok_or_else(|| Error::invalid("no generators"))?.degree();
        if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
            return Err(Error::DegreeMismatch(degree, g.degree()));
        }
        Ok(GeneratedGroup { degree, generators })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.degree);
        for g in &self.generators {
            for x in 0..self.degree {
                uf.union(x, g.image(x));
            }
        }
        uf.classes()
    }

    pub fn is_transitive(&self) -> bool {
        is_transitive(self.degree, &self.generators)
    }

    /// Finest block system in which `a` and `b` share a block.
    fn block_closure(&self, a: usize, b: usize) -> UnionFind {
        let mut uf = UnionFind::new(self.degree);
        uf.union(a, b);
        let mut queue = VecDeque::from([(a, b)]);
        while let Some((x, y)) = queue.pop_front() {
            for g in &self.generators {
                let (gx, gy) = (g.image(x), g.image(y));
                if uf.union(gx, gy) {
                    queue.push_back((gx, gy));
                }
            }
        }
        uf
    }

    /// The smallest block containing `a` and `b`; all points if none smaller
    /// exists. Requires a transitive group.
    pub fn minimal_block(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        self.check_point(a)?;
        self.check_point(b)?;
        if !self.is_transitive() {
            return Err(Error::hypothesis("group must be transitive"));
        }
        let mut uf = self.block_closure(a, b);
        let root = uf.find(a);
        Ok((0..self.degree).filter(|&x| uf.find(x) == root).collect())
    }

    /// Tests `minimal_block(0, b)` for every `b`. On failure returns the block
    /// system generated by the first non-trivial minimal block found.
    pub fn is_primitive(&self) -> Result<Primitivity> {
        if !self.is_transitive() {
            return Err(Error::hypothesis("group must be transitive"));
        }
        for b in 1..self.degree {
            let mut uf = self.block_closure(0, b);
            let root = uf.find(0);
            if uf.size[root] < self.degree {
                return Ok(Primitivity::Imprimitive(BlockSystem { blocks: uf.classes() }));
            }
        }
        Ok(Primitivity::Primitive)
    }

    /// All group elements, or `None` once more than `cap` are found.
    pub fn elements(&self, cap: usize) -> Option<Vec<Permutation>> {
        closure(&self.generators, self.degree, cap)
    }

    /// Compares `<G_x, G_y>` with `G` by explicit enumeration.
    pub fn two_point_generation_test(&self, x: usize, y: usize, cap: usize) -> Result<TwoPointVerdict> {
        self.check_point(x)?;
        self.check_point(y)?;
        let Some(all) = self.elements(cap) else {
            return Ok(TwoPointVerdict::Inconclusive);
        };
        let stab: Vec<Permutation> = all.iter().filter(|g| g.image(x) == x || g.image(y) == y).cloned().collect();
        let joined = closure(&stab, self.degree, all.len()).expect("subgroup is no larger than the group");
        Ok(if joined.len() == all.len() { TwoPointVerdict::Equal } else { TwoPointVerdict::Proper })
    }

    fn check_point(&self, x: usize) -> Result<()> {
        if x >= self.degree {
            return Err(Error::invalid(format!("point {} outside degree {}", x + 1, self.degree)));
        }
        Ok(())
    }
}

pub(crate) fn is_transitive(degree: usize, generators: &[Permutation]) -> bool {
    let mut seen = vec![false; degree];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for g in generators {
            let y = g.image(x);
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == degree
}

fn closure(generators: &[Permutation], degree: usize, cap: usize) -> Option<Vec<Permutation>> {
    let id = Permutation::identity(degree);
    let mut seen: HashSet<Permutation> = HashSet::from([id.clone()]);
    let mut order = vec![id];
    let mut i = 0;
    while i < order.len() {
        if order.len() > cap {
            return None;
        }
        for g in generators {
            let h = order[i].then(g);
            if seen.insert(h.clone()) {
                order.push(h);
            }
        }
        i += 1;
    }
    if order.len() > cap {
        return None;
    }
    Some(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        Permutation::parse_with_degree(s, Some(9)).unwrap()
    }

    fn six_cycle_pair() -> GeneratedGroup {
        GeneratedGroup::new(vec![p("(1 2 3 4 5 6)"), p("(1 7)(3 8)(5 9)")]).unwrap()
    }

    #[test]
    fn six_cycle_pair_blocks() {
        let g = six_cycle_pair();
        assert!(g.is_transitive());
        assert_eq!(g.minimal_block(0, 2).unwrap(), vec![0, 2, 4]);
        assert_eq!(g.minimal_block(0, 1).unwrap(), (0..9).collect::<Vec<_>>());
        match g.is_primitive().unwrap() {
            Primitivity::Imprimitive(bs) => {
                assert_eq!(bs.blocks(), &[vec![0, 2, 4], vec![1, 3, 5], vec![6, 7, 8]]);
                assert_eq!(serde_json::to_string(&bs).unwrap(), "[[1,3,5],[2,4,6],[7,8,9]]");
            }
            Primitivity::Primitive => panic!("expected imprimitive"),
        }
    }

    #[test]
    fn intransitive_groups_are_rejected() {
        let g = GeneratedGroup::new(vec![p("(1 2 3)")]).unwrap();
        assert_eq!(g.orbits().len(), 7);
        assert!(matches!(g.is_primitive(), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn two_point_test_on_full_symmetric_group() {
        let s4 = GeneratedGroup::new(vec![
            Permutation::parse_with_degree("(1 2)", Some(4)).unwrap(),
            "(1 2 3 4)".parse().unwrap(),
        ])
        .unwrap();
        assert_eq!(s4.elements(100).unwrap().len(), 24);
        assert_eq!(s4.two_point_generation_test(0, 1, 100).unwrap(), TwoPointVerdict::Equal);
        assert_eq!(s4.two_point_generation_test(0, 1, 1).unwrap(), TwoPointVerdict::Inconclusive);
    }

    #[test]
    fn symmetric_group_contains_three_equal_cycles() {
        // A primitive group can contain [d-2c, c, c] with gcd(d, c) > 1,
        // so coprimality is not necessary for primitivity.
        let s9 = GeneratedGroup::new(vec![p("(1 2)"), p("(1 2 3 4 5 6 7 8 9)")]).unwrap();
        assert_eq!(s9.is_primitive().unwrap(), Primitivity::Primitive);
        assert_eq!(p("(1 2 3)(4 5 6)(7 8 9)").cycle_structure().parts(), &[3, 3, 3]);
    }

    #[test]
    fn block_system_round_trip() {
        let bs: BlockSystem = serde_json::from_str("[[2,4,6],[1,3,5],[7,8,9]]").unwrap();
        assert_eq!(bs.blocks()[0], vec![0, 2, 4]);
        assert!(bs.is_preserved_by(&p("(1 7)(3 8)(5 9)")));
        assert!(!bs.is_preserved_by(&p("(1 2)")));
    }
}
