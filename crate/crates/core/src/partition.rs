//! Partitions, branch data and their product decompositions.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition of `d`, stored with parts in non-increasing order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("a partition needs at least one part"));
        }
        if parts.contains(&0) {
            return Err(Error::invalid(format!("zero part in {parts:?}")));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    /// `[1, …, 1]`.
    pub fn trivial(d: usize) -> Self {
        Partition { parts: vec![1; d] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn degree(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Degree minus number of parts.
    pub fn nu(&self) -> usize {
        self.degree() - self.parts.len()
    }

    pub fn gcd(&self) -> usize {
        self.parts.iter().fold(0, |g, &p| gcd(g, p))
    }

    pub fn is_trivial(&self) -> bool {
        self.parts[0] == 1
    }

    /// Number of parts equal to 1.
    pub fn ones(&self) -> usize {
        self.parts.iter().filter(|&&p| p == 1).count()
    }

    pub fn multiplicity(&self, part: usize) -> usize {
        self.parts.iter().filter(|&&p| p == part).count()
    }

    /// Multiplies every part by `k`.
    pub fn scaled(&self, k: usize) -> Self {
        Partition { parts: self.parts.iter().map(|p| p * k).collect() }
    }

    /// `[2, …, 2, 1]` of odd degree.
    pub fn is_two_two_one(&self) -> bool {
        let (last, rest) = self.parts.split_last().expect("non-empty");
        *last == 1 && rest.iter().all(|&p| p == 2) && !rest.is_empty()
    }

    /// All partitions of `n` in lexicographically decreasing order.
    pub fn all(n: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        all_rec(n, n, &mut cur, &mut out);
        out
    }
}

fn all_rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if rem == 0 {
        out.push(Partition { parts: cur.clone() });
        return;
    }
    for p in (1..=max.min(rem)).rev() {
        cur.push(p);
        all_rec(rem - p, p, cur, out);
        cur.pop();
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| !n.is_multiple_of(p))
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Vec<usize> {
        p.parts
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::parse(format!("expected [..] around {s:?}")))?;
        let parts = inner
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::parse(format!("bad part {t:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts).map_err(|e| Error::parse(e.to_string()))
    }
}

/// Canonical order of partitions inside a datum: larger defect first, then
/// lexicographically larger parts first.
pub fn canonical_cmp(a: &Partition, b: &Partition) -> Ordering {
    b.nu().cmp(&a.nu()).then_with(|| b.parts.cmp(&a.parts))
}

/// A collection of non-trivial partitions of a common degree, held in
/// canonical order. `original_order[i]` is the input position of
/// `partitions()[i]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BranchDatum {
    d: usize,
    partitions: Vec<Partition>,
    original_order: Vec<usize>,
}

impl BranchDatum {
    pub fn new(d: usize, partitions: Vec<Partition>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("degree must be positive"));
        }
        if partitions.is_empty() {
            return Err(Error::invalid("a branch datum needs at least one partition"));
        }
        for p in &partitions {
            if p.degree() != d {
                return Err(Error::invalid(format!("{p} is not a partition of {d}")));
            }
            if p.is_trivial() {
                return Err(Error::invalid(format!("{p} is trivial")));
            }
        }
        let mut order: Vec<usize> = (0..partitions.len()).collect();
        order.sort_by(|&i, &j| canonical_cmp(&partitions[i], &partitions[j]).then(i.cmp(&j)));
        let sorted = order.iter().map(|&i| partitions[i].clone()).collect();
        Ok(BranchDatum { d, partitions: sorted, original_order: order })
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn k(&self) -> usize {
        self.partitions.len()
    }

    pub fn original_order(&self) -> &[usize] {
        &self.original_order
    }

    pub fn total_defect(&self) -> usize {
        self.partitions.iter().map(Partition::nu).sum()
    }

    /// Realizable as branch datum of a covering of the projective plane by a
    /// closed surface (total defect at least `d - 1` and even).
    pub fn is_admissible_rp2(&self) -> bool {
        let nu = self.total_defect();
        nu + 1 >= self.d && nu.is_multiple_of(2)
    }

    pub fn is_minimal_defect(&self) -> bool {
        self.minimal_defect_violation().is_none()
    }

    /// The first failing clause of the minimal-defect hypothesis.
    pub fn minimal_defect_violation(&self) -> Option<String> {
        if self.d.is_multiple_of(2) {
            return Some("d must be odd for minimal defect".into());
        }
        let nu = self.total_defect();
        if nu + 1 != self.d {
            return Some(format!("total defect must equal d - 1 = {} (got {nu})", self.d - 1));
        }
        None
    }

    pub fn require_minimal_defect(&self) -> Result<()> {
        match self.minimal_defect_violation() {
            Some(msg) => Err(Error::Hypothesis(msg)),
            None => Ok(()),
        }
    }
}

impl fmt::Display for BranchDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} {{", self.d)?;
        for (i, p) in self.partitions.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for BranchDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Serialize, Deserialize)]
struct DatumJson {
    d: usize,
    partitions: Vec<Partition>,
}

impl Serialize for BranchDatum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DatumJson { d: self.d, partitions: self.partitions.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BranchDatum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DatumJson::deserialize(d)?;
        BranchDatum::new(raw.d, raw.partitions).map_err(serde::de::Error::custom)
    }
}

/// One way of writing a partition `D` of `u*w` as `U.W`: the part `U[j]`
/// scales the partition `ws[j]` of `w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductDecomposition {
    pub u_part: Partition,
    pub ws: Vec<Partition>,
}

impl ProductDecomposition {
    pub fn product(&self) -> Partition {
        let parts = self
            .u_part
            .parts()
            .iter()
            .zip(&self.ws)
            .flat_map(|(&u, w)| w.parts().iter().map(move |&p| u * p))
            .collect();
        Partition::new(parts).expect("non-empty")
    }
}

/// Every decomposition `D = U.W` with `U` a partition of `u` and each
/// `W_j` a partition of `w`, up to reordering of the `(U_j, W_j)` pairs.
/// Pairs are listed by decreasing `U_j`, ties by decreasing `W_j`.
pub fn product_partition_decompositions(d: &Partition, u: usize, w: usize) -> Result<Vec<ProductDecomposition>> {
    if u == 0 || w == 0 || u * w != d.degree() {
        return Err(Error::hypothesis(format!("u * w = {} must equal the degree {} of {d}", u * w, d.degree())));
    }
    let mut counts = vec![0usize; d.degree() + 1];
    for &p in d.parts() {
        counts[p] += 1;
    }
    let ws = Partition::all(w);
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    decomp_rec(&mut counts, u, &ws, &mut chosen, &mut out);
    Ok(out)
}

fn decomp_rec(
    counts: &mut [usize],
    rem_u: usize,
    ws: &[Partition],
    chosen: &mut Vec<(usize, usize)>,
    out: &mut Vec<ProductDecomposition>,
) {
    if rem_u == 0 {
        if counts.iter().all(|&c| c == 0) {
            out.push(ProductDecomposition {
                u_part: Partition { parts: chosen.iter().map(|&(a, _)| a).collect() },
                ws: chosen.iter().map(|&(_, i)| ws[i].clone()).collect(),
            });
        }
        return;
    }
    // `ws` is in decreasing order, so a larger index means a smaller W.
    let (max_a, min_wi) = chosen.last().copied().unwrap_or((rem_u, 0));
    for a in (1..=max_a.min(rem_u)).rev() {
        let start = if a == max_a && !chosen.is_empty() { min_wi } else { 0 };
        for wi in start..ws.len() {
            let parts = ws[wi].parts();
            if !take(counts, parts, a) {
                continue;
            }
            chosen.push((a, wi));
            decomp_rec(counts, rem_u - a, ws, chosen, out);
            chosen.pop();
            for &p in parts {
                counts[a * p] += 1;
            }
        }
    }
}

/// Removes `a * p` for every `p` in `parts`, or leaves `counts` untouched
/// and returns false if some scaled part is missing.
fn take(counts: &mut [usize], parts: &[usize], a: usize) -> bool {
    for (i, &p) in parts.iter().enumerate() {
        let v = a * p;
        if v >= counts.len() || counts[v] == 0 {
            for &q in &parts[..i] {
                counts[a * q] += 1;
            }
            return false;
        }
        counts[v] -= 1;
    }
    true
}

/// An algebraic factorization `D = U.W` of a whole datum with common
/// `(u, w)`. `us[i]` and `ws[i]` decompose the `i`-th partition of the datum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    pub u: usize,
    pub w: usize,
    #[serde(rename = "U_list")]
    pub us: Vec<Partition>,
    #[serde(rename = "W_list")]
    pub ws: Vec<Vec<Partition>>,
}

impl Factorization {
    pub fn nu_u(&self) -> usize {
        self.us.iter().map(Partition::nu).sum()
    }

    /// Defect of the collection of all `W_ij`.
    pub fn nu_w(&self) -> usize {
        self.ws.iter().flatten().map(Partition::nu).sum()
    }

    pub fn decomposition(&self, i: usize) -> ProductDecomposition {
        ProductDecomposition { u_part: self.us[i].clone(), ws: self.ws[i].clone() }
    }

    /// The first factor is a non-trivial datum of degree `u` with defect `u - 1`.
    pub fn has_minimal_first_factor(&self) -> bool {
        self.u > 1 && self.nu_u() + 1 == self.u
    }

    /// Checks that the factorization reproduces `datum` position by position.
    pub fn check_against(&self, datum: &BranchDatum) -> Result<()> {
        if self.u * self.w != datum.degree() {
            return Err(Error::invalid(format!("u * w = {} but d = {}", self.u * self.w, datum.degree())));
        }
        if self.us.len() != datum.k() || self.ws.len() != datum.k() {
            return Err(Error::invalid("factorization length differs from the datum"));
        }
        for (i, d) in datum.partitions().iter().enumerate() {
            let dec = self.decomposition(i);
            if dec.u_part.degree() != self.u || dec.ws.len() != dec.u_part.len() {
                return Err(Error::invalid(format!("U_{} is not a partition of {} matched to W", i + 1, self.u)));
            }
            if dec.ws.iter().any(|w| w.degree() != self.w) {
                return Err(Error::invalid(format!("some W_{}j is not a partition of {}", i + 1, self.w)));
            }
            if &dec.product() != d {
                return Err(Error::invalid(format!("U.W at position {} gives {} not {d}", i + 1, dec.product())));
            }
        }
        Ok(())
    }
}

fn divisor_pairs(d: usize) -> Vec<(usize, usize)> {
    (2..d).filter(|u| d.is_multiple_of(*u)).map(|u| (u, d / u)).collect()
}

/// All algebraic factorizations of a datum with `1 < u, w < d`, grouped by
/// increasing `u`. Two factorizations are identified when the multisets of
/// `(D_i, U_i, W_i)` triples agree.
pub fn algebraic_factorizations(datum: &BranchDatum) -> Result<Vec<Factorization>> {
    let mut out = Vec::new();
    for (u, w) in divisor_pairs(datum.degree()) {
        factorizations_for(datum, u, w, &mut out, |_| true)?;
    }
    Ok(out)
}

fn factorizations_for(
    datum: &BranchDatum,
    u: usize,
    w: usize,
    out: &mut Vec<Factorization>,
    keep: impl Fn(&Factorization) -> bool,
) -> Result<()> {
    let per: Vec<Vec<ProductDecomposition>> =
        datum.partitions().iter().map(|p| product_partition_decompositions(p, u, w)).collect::<Result<_>>()?;
    if per.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let mut seen = BTreeSet::new();
    let mut idx = vec![0usize; per.len()];
    loop {
        let f = Factorization {
            u,
            w,
            us: idx.iter().enumerate().map(|(i, &j)| per[i][j].u_part.clone()).collect(),
            ws: idx.iter().enumerate().map(|(i, &j)| per[i][j].ws.clone()).collect(),
        };
        let mut key: Vec<(&Partition, usize)> = datum.partitions().iter().zip(idx.iter().copied()).collect();
        key.sort();
        if keep(&f) && seen.insert(key.into_iter().map(|(p, j)| (p.clone(), j)).collect::<Vec<_>>()) {
            out.push(f);
        }
        let mut pos = per.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < per[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// A factorization whose first factor is a non-trivial datum of degree `u`
/// with minimal defect, if one exists. Such a factorization is exactly what
/// a decomposable realization induces.
pub fn has_decomposable_realization(datum: &BranchDatum) -> Result<Option<Factorization>> {
    datum.require_minimal_defect()?;
    for (u, w) in divisor_pairs(datum.degree()) {
        let mut found = Vec::new();
        factorizations_for(datum, u, w, &mut found, Factorization::has_minimal_first_factor)?;
        if let Some(f) = found.into_iter().next() {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// Streams every minimal-defect datum of degree `d` with `k` partitions, in
/// lexicographic order of the canonically ordered tuple.
pub fn enumerate_minimal_data(d: usize, k: usize) -> Result<MinimalData> {
    if d.is_multiple_of(2) {
        return Err(Error::hypothesis("d must be odd for minimal defect"));
    }
    if k == 0 {
        return Err(Error::hypothesis("k must be at least 1"));
    }
    let mut parts: Vec<Partition> = Partition::all(d).into_iter().filter(|p| !p.is_trivial()).collect();
    parts.sort_by(canonical_cmp);
    let nus = parts.iter().map(Partition::nu).collect();
    Ok(MinimalData { d, k, parts, nus, stack: Vec::new(), cursor: 0, finished: false })
}

pub struct MinimalData {
    d: usize,
    k: usize,
    parts: Vec<Partition>,
    nus: Vec<usize>,
    stack: Vec<usize>,
    cursor: usize,
    finished: bool,
}

impl MinimalData {
    fn remaining(&self) -> usize {
        (self.d - 1) - self.stack.iter().map(|&i| self.nus[i]).sum::<usize>()
    }
}

impl Iterator for MinimalData {
    type Item = BranchDatum;

    fn next(&mut self) -> Option<BranchDatum> {
        while !self.finished {
            let level = self.stack.len();
            if level == self.k {
                let datum = BranchDatum::new(self.d, self.stack.iter().map(|&i| self.parts[i].clone()).collect())
                    .expect("enumerated data are valid");
                self.cursor = self.stack.pop().expect("k >= 1") + 1;
                return Some(datum);
            }
            let rem = self.remaining();
            let slots = self.k - level;
            let mut advanced = false;
            while self.cursor < self.parts.len() {
                let nu = self.nus[self.cursor];
                if nu * slots < rem {
                    break;
                }
                if nu + (slots - 1) <= rem {
                    self.stack.push(self.cursor);
                    advanced = true;
                    break;
                }
                self.cursor += 1;
            }
            if !advanced {
                match self.stack.pop() {
                    Some(i) => self.cursor = i + 1,
                    None => self.finished = true,
                }
            }
        }
        None
    }
}
