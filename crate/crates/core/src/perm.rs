//! Permutations of `{0, …, d-1}` acting on the right.
//!
//! Products read left to right: `x^(pq) = (x^p)^q`, so `p * q` applies `p`
//! first. The Rust API is 0-based; cycle notation is 1-based and always
//! lists fixed points, e.g. `(1 2 3 4 5 6)(7)(8)(9)`.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::partition::Partition;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u16>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        assert!(degree <= u16::MAX as usize + 1, "degree too large");
        Permutation { images: (0..degree).map(|x| x as u16).collect() }
    }

    /// Builds a permutation from its image list `images[x] = x^p`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let d = images.len();
        if d == 0 {
            return Err(Error::invalid("degree must be positive"));
        }
        if d > u16::MAX as usize + 1 {
            return Err(Error::invalid(format!("degree {d} too large")));
        }
        let mut seen = vec![false; d];
        for &y in images {
            if y >= d || seen[y] {
                return Err(Error::invalid(format!("{images:?} is not a bijection")));
            }
            seen[y] = true;
        }
        Ok(Permutation { images: images.iter().map(|&y| y as u16).collect() })
    }

    /// Builds a permutation of the given degree from 0-based cycles.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        if degree == 0 {
            return Err(Error::invalid("degree must be positive"));
        }
        let mut images: Vec<usize> = (0..degree).collect();
        let mut seen = vec![false; degree];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= degree {
                    return Err(Error::invalid(format!("point {} exceeds degree {degree}", x + 1)));
                }
                if seen[x] {
                    return Err(Error::invalid(format!("point {} repeated", x + 1)));
                }
                seen[x] = true;
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Permutation::from_images(&images)
    }

    /// The representative of a cycle type whose cycles sit on consecutive
    /// points in non-increasing length order: `[6,1,1,1]` gives
    /// `(1 2 3 4 5 6)(7)(8)(9)`.
    pub fn canonical(structure: &Partition) -> Self {
        let mut cycles = Vec::new();
        let mut next = 0;
        for &len in structure.parts() {
            cycles.push((next..next + len).collect::<Vec<_>>());
            next += len;
        }
        Permutation::from_cycles(structure.degree(), &cycles).expect("canonical cycles are valid")
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn image(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&y| y as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| x == y as usize)
    }

    /// Points moved by the permutation.
    pub fn support(&self) -> Vec<usize> {
        (0..self.degree()).filter(|&x| self.image(x) != x).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u16; self.degree()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y as usize] = x as u16;
        }
        Permutation { images: inv }
    }

    /// `self` followed by `other`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(self.then(other))
    }

    #[inline]
    pub(crate) fn then(&self, other: &Permutation) -> Self {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation { images: self.images.iter().map(|&y| other.images[y as usize]).collect() }
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Permutation::identity(self.degree());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&sq);
            }
            sq = sq.then(&sq);
            e >>= 1;
        }
        acc
    }

    /// `by * self * by^-1`. In cycle notation this relabels every point `x`
    /// of `self` as `x^(by^-1)`.
    pub fn conjugate(&self, by: &Permutation) -> Result<Self> {
        Ok(by.compose(self)?.then(&by.inverse()))
    }

    /// All cycles including fixed points, each starting at its least point,
    /// ordered by least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let d = self.degree();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.image(start);
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.image(x);
            }
            out.push(cycle);
        }
        out
    }

    pub fn num_cycles(&self) -> usize {
        let d = self.degree();
        let mut seen = vec![false; d];
        let mut count = 0;
        for start in 0..d {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.image(x);
            }
        }
        count
    }

    pub fn cycle_structure(&self) -> Partition {
        Partition::new(self.cycles().iter().map(Vec::len).collect()).expect("cycle lengths partition the degree")
    }

    /// Degree minus number of cycles.
    pub fn defect(&self) -> usize {
        self.degree() - self.num_cycles()
    }

    /// Lazily enumerates every `w` with `w * w == self` in a fixed order.
    pub fn square_roots(&self) -> SquareRoots {
        SquareRoots::new(self)
    }

    /// Parses cycle notation. Fixed points may be omitted; the degree is
    /// `degree` if given, otherwise the largest point mentioned.
    pub fn parse_with_degree(s: &str, degree: Option<usize>) -> Result<Self> {
        let cycles = parse_cycles(s)?;
        let max = cycles.iter().flatten().copied().max().map_or(0, |m| m + 1);
        let d = match degree {
            Some(d) if d < max => {
                return Err(Error::parse(format!("point {max} exceeds degree {d} in {s:?}")));
            }
            Some(d) => d,
            None => max,
        };
        if d == 0 {
            return Err(Error::parse(format!("cannot infer degree of {s:?}")));
        }
        Permutation::from_cycles(d, &cycles).map_err(|e| Error::parse(format!("{s:?}: {e}")))
    }
}

fn parse_cycles(s: &str) -> Result<Vec<Vec<usize>>> {
    let mut cycles = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(|| Error::parse(format!("expected '(' in {s:?}")))?;
        let close = body.find(')').ok_or_else(|| Error::parse(format!("unclosed cycle in {s:?}")))?;
        let mut cycle = Vec::new();
        for tok in body[..close].split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v: usize = tok.parse().map_err(|_| Error::parse(format!("bad point {tok:?} in {s:?}")))?;
            if v == 0 {
                return Err(Error::parse(format!("points are 1-based, found 0 in {s:?}")));
            }
            cycle.push(v - 1);
        }
        if !cycle.is_empty() {
            cycles.push(cycle);
        }
        rest = body[close + 1..].trim_start();
    }
    Ok(cycles)
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Permutation::parse_with_degree(s, None)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cycle in self.cycles() {
            write!(f, "(")?;
            for (i, x) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", x + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

/// Panics on degree mismatch; use [`Permutation::compose`] for a checked product.
impl Mul for &Permutation {
    type Output = Permutation;

    fn mul(self, rhs: &Permutation) -> Permutation {
        assert_eq!(self.degree(), rhs.degree(), "degree mismatch");
        self.then(rhs)
    }
}

impl serde::Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every permutation with the given cycle type, in lexicographic order of
/// image lists.
pub fn conjugacy_class(structure: &Partition) -> Vec<Permutation> {
    let d = structure.degree();
    let mut lengths: Vec<(usize, usize)> = Vec::new();
    for &p in structure.parts() {
        match lengths.iter_mut().find(|(l, _)| *l == p) {
            Some((_, m)) => *m += 1,
            None => lengths.push((p, 1)),
        }
    }
    let mut out = Vec::new();
    let mut images = vec![usize::MAX; d];
    class_rec(&mut images, &mut lengths, &mut out);
    out.sort();
    out
}

fn class_rec(images: &mut Vec<usize>, lengths: &mut Vec<(usize, usize)>, out: &mut Vec<Permutation>) {
    let Some(first) = images.iter().position(|&y| y == usize::MAX) else {
        out.push(Permutation { images: images.iter().map(|&y| y as u16).collect() });
        return;
    };
    for li in 0..lengths.len() {
        if lengths[li].1 == 0 {
            continue;
        }
        let len = lengths[li].0;
        lengths[li].1 -= 1;
        let mut cycle = vec![first];
        images[first] = first;
        extend_cycle(images, &mut cycle, len, lengths, out);
        images[first] = usize::MAX;
        lengths[li].1 += 1;
    }
}

fn extend_cycle(
    images: &mut Vec<usize>,
    cycle: &mut Vec<usize>,
    len: usize,
    lengths: &mut Vec<(usize, usize)>,
    out: &mut Vec<Permutation>,
) {
    if cycle.len() == len {
        for i in 0..len {
            images[cycle[i]] = cycle[(i + 1) % len];
        }
        class_rec(images, lengths, out);
        for &x in cycle.iter().skip(1) {
            images[x] = usize::MAX;
        }
        images[cycle[0]] = cycle[0];
        return;
    }
    for x in 0..images.len() {
        if images[x] != usize::MAX {
            continue;
        }
        images[x] = x;
        cycle.push(x);
        extend_cycle(images, cycle, len, lengths, out);
        cycle.pop();
        images[x] = usize::MAX;
    }
}

/// Iterator over the square roots of a permutation.
///
/// Cycles are grouped by length and ordered by least point. Within a length
/// class the enumeration walks every admissible matching (even lengths must
/// be paired, odd ones may stay single), and for each matched pair every
/// interleaving offset in ascending order.
pub struct SquareRoots {
    degree: usize,
    classes: Vec<LengthClass>,
    offsets: Vec<usize>,
    pairs: Vec<(usize, usize, usize)>,
    done: bool,
}

struct LengthClass {
    len: usize,
    cycles: Vec<Vec<usize>>,
    allow_single: bool,
    choices: Vec<usize>,
}

impl LengthClass {
    fn decode(&self) -> Vec<(usize, Option<usize>)> {
        let mut rem: Vec<usize> = (0..self.cycles.len()).collect();
        let mut out = Vec::new();
        for &c in &self.choices {
            let first = rem.remove(0);
            if self.allow_single && c == 0 {
                out.push((first, None));
            } else {
                let partner = rem.remove(c - self.allow_single as usize);
                out.push((first, Some(partner)));
            }
        }
        out
    }

    /// Completes `choices` with the first option at every remaining level.
    fn complete(&mut self) {
        let mut left = self.cycles.len() - self.consumed();
        while left > 0 {
            self.choices.push(0);
            left -= if self.allow_single { 1 } else { 2 };
        }
    }

    fn consumed(&self) -> usize {
        self.choices.iter().map(|&c| if self.allow_single && c == 0 { 1 } else { 2 }).sum()
    }

    fn reset(&mut self) {
        self.choices.clear();
        self.complete();
    }

    fn advance(&mut self) -> bool {
        while let Some(c) = self.choices.pop() {
            let rem = self.cycles.len() - self.consumed();
            let options = rem - 1 + self.allow_single as usize;
            if c + 1 < options {
                self.choices.push(c + 1);
                self.complete();
                return true;
            }
        }
        false
    }
}

impl SquareRoots {
    fn new(p: &Permutation) -> Self {
        let mut cycles = p.cycles();
        cycles.sort_by_key(|c| (c.len(), c[0]));
        let mut classes: Vec<LengthClass> = Vec::new();
        for c in cycles {
            match classes.last_mut() {
                Some(cl) if cl.len == c.len() => cl.cycles.push(c),
                _ => classes.push(LengthClass {
                    len: c.len(),
                    allow_single: c.len() % 2 == 1,
                    cycles: vec![c],
                    choices: Vec::new(),
                }),
            }
        }
        let done = classes.iter().any(|cl| !cl.allow_single && cl.cycles.len() % 2 == 1);
        if !done {
            for cl in &mut classes {
                cl.reset();
            }
        }
        let mut it = SquareRoots { degree: p.degree(), classes, offsets: Vec::new(), pairs: Vec::new(), done };
        it.load_pairs();
        it
    }

    fn load_pairs(&mut self) {
        self.pairs.clear();
        for (ci, cl) in self.classes.iter().enumerate() {
            for (a, b) in cl.decode() {
                if let Some(b) = b {
                    self.pairs.push((ci, a, b));
                }
            }
        }
        self.offsets = vec![0; self.pairs.len()];
    }

    fn build(&self) -> Permutation {
        let mut images = vec![0u16; self.degree];
        let mut pair_idx = 0;
        for (ci, cl) in self.classes.iter().enumerate() {
            let m = cl.len;
            for (a, b) in cl.decode() {
                let ca = &cl.cycles[a];
                match b {
                    None => {
                        let step = m.div_ceil(2);
                        for i in 0..m {
                            images[ca[i]] = ca[(i + step) % m] as u16;
                        }
                    }
                    Some(b) => {
                        debug_assert_eq!(self.pairs[pair_idx].0, ci);
                        let j = self.offsets[pair_idx];
                        pair_idx += 1;
                        let cb = &cl.cycles[b];
                        for i in 0..m {
                            images[ca[i]] = cb[(i + j) % m] as u16;
                            images[cb[(i + j) % m]] = ca[(i + 1) % m] as u16;
                        }
                    }
                }
            }
        }
        Permutation { images }
    }

    fn advance(&mut self) {
        for i in (0..self.offsets.len()).rev() {
            let m = self.classes[self.pairs[i].0].len;
            if self.offsets[i] + 1 < m {
                self.offsets[i] += 1;
                return;
            }
            self.offsets[i] = 0;
        }
        for ci in (0..self.classes.len()).rev() {
            if self.classes[ci].advance() {
                for later in &mut self.classes[ci + 1..] {
                    later.reset();
                }
                self.load_pairs();
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for SquareRoots {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.done {
            return None;
        }
        let root = self.build();
        self.advance();
        Some(root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashMap};

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn all_perms(d: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        for parts in Partition::all(d) {
            out.extend(conjugacy_class(&parts));
        }
        out
    }

    #[test]
    fn right_action_product() {
        let a = p("(1 2 3)");
        let b = p("(1 2)(3)");
        assert_eq!((&a * &b).to_string(), "(1)(2 3)");
        assert_eq!(a.compose(&p("(1 2)")), Err(Error::DegreeMismatch(3, 2)));
    }

    #[test]
    fn conjugation_relabels() {
        let c = p("(1 2)(3)").conjugate(&p("(1 3)(2)")).unwrap();
        assert_eq!(c.to_string(), "(1)(2 3)");
    }

    #[test]
    fn round_trip_keeps_fixed_points() {
        let s = "(1 2 3 4 5 6)(7)(8)(9)";
        assert_eq!(p(s).to_string(), s);
        assert_eq!(Permutation::parse_with_degree("(1 2)", Some(4)).unwrap().to_string(), "(1 2)(3)(4)");
        assert!("(1 2)(2 3)".parse::<Permutation>().is_err());
        assert!("(0 1)".parse::<Permutation>().is_err());
        assert!(Permutation::parse_with_degree("(1 5)", Some(4)).is_err());
    }

    #[test]
    fn defect_and_structure() {
        let a = p("(1 2 3 4 5 6)(7)(8)(9)");
        assert_eq!(a.defect(), 5);
        assert_eq!(a.cycle_structure().parts(), &[6, 1, 1, 1]);
        assert_eq!(Permutation::canonical(&a.cycle_structure()), a);
    }

    #[test]
    fn square_roots_examples() {
        let roots: Vec<String> = p("(1 2 3)(4 5 6)").square_roots().map(|r| r.to_string()).collect();
        assert!(roots.contains(&"(1 3 2)(4 6 5)".to_string()));
        assert!(roots.contains(&"(1 4 2 5 3 6)".to_string()));
        assert_eq!(roots.len(), 4);
        assert_eq!(p("(1 2)(3)").square_roots().count(), 0);
        assert_eq!(p("(1 2)(3 4)").square_roots().count(), 2);
    }

    #[test]
    fn class_enumeration_sizes() {
        assert_eq!(conjugacy_class(&Partition::new(vec![2, 2, 2, 2, 1]).unwrap()).len(), 945);
        assert_eq!(conjugacy_class(&Partition::new(vec![3, 2, 2, 1, 1]).unwrap()).len(), 7560);
        let cls = conjugacy_class(&Partition::new(vec![3, 1]).unwrap());
        assert!(cls.windows(2).all(|w| w[0] < w[1]));
    }

    /// Brute force: square every element of S_d and bucket by the square.
    #[test]
    fn square_roots_match_brute_force_up_to_degree_7() {
        for d in 1..=7 {
            let perms = all_perms(d);
            let mut by_square: HashMap<Permutation, BTreeSet<Permutation>> = HashMap::new();
            for w in &perms {
                by_square.entry(w * w).or_default().insert(w.clone());
            }
            for q in &perms {
                let listed: Vec<Permutation> = q.square_roots().collect();
                let set: BTreeSet<Permutation> = listed.iter().cloned().collect();
                assert_eq!(set.len(), listed.len(), "duplicate roots of {q}");
                let expected = by_square.remove(q).unwrap_or_default();
                assert_eq!(set, expected, "roots of {q}");
            }
        }
    }
}
