//! Explicit realizations of minimal-defect branch data.
//!
//! Every realization is a tuple `a_1, …, a_k, w` with `a_i` of cycle type
//! `D_i` and `w^2 = a_1 ⋯ a_k` (right-action product in datum order).
//! Indecomposable realizations come from direct constructions; decomposable
//! ones from a search constrained to a block skeleton.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{is_transitive, BlockSystem, GeneratedGroup, Primitivity};
use crate::partition::{gcd, is_prime, BranchDatum, Factorization, Partition, ProductDecomposition};
use crate::perm::{conjugacy_class, Permutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Primitive,
    Imprimitive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WitnessJson")]
pub struct RealizationWitness {
    pub datum: BranchDatum,
    pub alphas: Vec<Permutation>,
    pub omega: Permutation,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlockSystem>,
}

#[derive(Deserialize)]
struct WitnessJson {
    #[serde(default)]
    datum: Option<BranchDatum>,
    alphas: Vec<Permutation>,
    omega: Permutation,
    verdict: Verdict,
    #[serde(default)]
    blocks: Option<BlockSystem>,
}

impl TryFrom<WitnessJson> for RealizationWitness {
    type Error = Error;

    fn try_from(raw: WitnessJson) -> Result<Self> {
        let datum = match raw.datum {
            Some(d) => d,
            None => {
                let d = raw.omega.degree();
                BranchDatum::new(d, raw.alphas.iter().map(Permutation::cycle_structure).collect())?
            }
        };
        Ok(RealizationWitness { datum, alphas: raw.alphas, omega: raw.omega, verdict: raw.verdict, blocks: raw.blocks })
    }
}

impl RealizationWitness {
    /// Packages generators after computing the primitivity verdict.
    pub fn from_generators(datum: BranchDatum, alphas: Vec<Permutation>, omega: Permutation) -> Result<Self> {
        let mut gens = alphas.clone();
        gens.push(omega.clone());
        let (verdict, blocks) = match GeneratedGroup::new(gens)?.is_primitive()? {
            Primitivity::Primitive => (Verdict::Primitive, None),
            Primitivity::Imprimitive(bs) => (Verdict::Imprimitive, Some(bs)),
        };
        Ok(RealizationWitness { datum, alphas, omega, verdict, blocks })
    }

    pub fn group(&self) -> GeneratedGroup {
        let mut gens = self.alphas.clone();
        gens.push(self.omega.clone());
        GeneratedGroup::new(gens).expect("witness generators share a degree")
    }
}

/// Right-action product `a_1 a_2 ⋯ a_k`.
pub fn product(perms: &[Permutation]) -> Permutation {
    let mut it = perms.iter();
    let first = it.next().expect("at least one permutation").clone();
    it.fold(first, |acc, p| acc.then(p))
}

fn cycle_perm(d: usize, cycles: &[Vec<usize>]) -> Result<Permutation> {
    Permutation::from_cycles(d, cycles)
}

fn non_trivial_parts(p: &Partition) -> Vec<usize> {
    p.parts().iter().copied().filter(|&e| e > 1).collect()
}

/// Builds `(a, b)` with `a` of type `d1`, `b` of type `d2` and `ab` of type
/// `[d - 2y, y, y]`, one `y`-cycle of `ab` being a cycle of `a` untouched by
/// `b`. Needs a minimal-defect pair with `nu(d1) >= nu(d2)`, `d1` not
/// `[2,…,2,1]`, and either `y = 1` with a fixed point in `d1` or `y` a part
/// of `d1` smaller than some other part and no fixed points in `d1`.
pub fn construct_three_cycle_product(d1: &Partition, d2: &Partition, y: usize) -> Result<(Permutation, Permutation)> {
    let d = d1.degree();
    if d2.degree() != d {
        return Err(Error::DegreeMismatch(d, d2.degree()));
    }
    if d.is_multiple_of(2) || d1.nu() + d2.nu() + 1 != d {
        return Err(Error::hypothesis("{D1, D2} must have minimal defect with d odd"));
    }
    if d1.nu() < d2.nu() {
        return Err(Error::hypothesis("nu(D1) >= nu(D2) is required"));
    }
    if d1.is_two_two_one() {
        return Err(Error::hypothesis("D1 must not be [2,...,2,1]"));
    }
    let x = d1.parts()[0];
    let has_ones = d1.ones() > 0;
    if has_ones && y != 1 {
        return Err(Error::hypothesis("y must be 1 when D1 has fixed points"));
    }
    if !has_ones && (y < 2 || d1.multiplicity(y) == 0) {
        return Err(Error::hypothesis(format!("y = {y} must be a part of D1")));
    }
    if x <= y.max(if has_ones { 2 } else { 1 }) {
        return Err(Error::hypothesis(format!("D1 needs a part larger than y = {y} (and than 2 if y = 1)")));
    }

    // a = g_x k_1 … k_{n-2} g_y on consecutive points.
    let mut lens = vec![x];
    let mut rest: Vec<usize> = d1.parts()[1..].to_vec();
    let yi = rest.iter().rposition(|&p| p == y).expect("y is a part");
    rest.remove(yi);
    lens.extend(rest);
    lens.push(y);
    let mut cyc: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    for &l in &lens {
        cyc.push((next..next + l).collect());
        next += l;
    }
    let n = cyc.len();
    let alpha = cycle_perm(d, &cyc)?;
    let gx = &cyc[0];
    let es = non_trivial_parts(d2);
    let s = es.len();
    if n - 1 != d2.nu() {
        return Err(Error::hypothesis("number of cycles of D1 must be nu(D2) + 1"));
    }

    let mut beta_cycles: Vec<Vec<usize>> = Vec::new();
    if s == 1 {
        let mut b = vec![gx[y], gx[0]];
        b.extend((1..=es[0] - 2).map(|j| cyc[j][0]));
        beta_cycles.push(b);
    } else {
        let mut b1 = vec![gx[0]];
        b1.extend((1..es[0]).map(|j| cyc[j][0]));
        let mut used: Vec<bool> = vec![false; d];
        for &p in &b1 {
            used[p] = true;
        }
        let mut cur = alpha.then(&cycle_perm(d, &[b1.clone()])?);
        beta_cycles.push(b1);
        let (star, target) = if y == 1 { (gx[1], gx[2]) } else { (gx[x - y + 1], cyc[1][1]) };
        let mut segment = vec![star];
        while segment.len() <= y {
            segment.push(cur.image(*segment.last().expect("non-empty")));
        }
        if segment[y] != target {
            return Err(Error::invalid("three-cycle segment not found"));
        }
        let mut protected = vec![false; d];
        for &p in &segment {
            protected[p] = true;
        }
        let mut next_cycle = es[0];
        for &e in &es[1..s - 1] {
            let c = orbit_of(&cur, gx[0])
                .into_iter()
                .filter(|&p| !used[p] && !protected[p])
                .min()
                .ok_or_else(|| Error::SearchExhausted("no free point to attach a cycle".into()))?;
            let mut bj = vec![c];
            bj.extend((next_cycle..next_cycle + e - 1).map(|j| cyc[j][0]));
            next_cycle += e - 1;
            for &p in &bj {
                used[p] = true;
            }
            cur = cur.then(&cycle_perm(d, &[bj.clone()])?);
            beta_cycles.push(bj);
        }
        let es_last = es[s - 1];
        if next_cycle + es_last - 2 != n - 1 {
            return Err(Error::invalid("cycle count mismatch in three-cycle construction"));
        }
        let mut last = vec![star];
        last.extend((next_cycle..n - 1).map(|j| cyc[j][0]));
        last.push(target);
        beta_cycles.push(last);
    }
    let beta = cycle_perm(d, &beta_cycles)?;
    if &beta.cycle_structure() != d2 {
        return Err(Error::invalid(format!("constructed b has type {} not {d2}", beta.cycle_structure())));
    }
    let want = Partition::new(vec![d - 2 * y, y, y])?;
    if alpha.then(&beta).cycle_structure() != want {
        return Err(Error::invalid(format!("ab has type {} not {want}", alpha.then(&beta).cycle_structure())));
    }
    Ok((alpha, beta))
}

fn orbit_of(p: &Permutation, x: usize) -> Vec<usize> {
    let mut out = vec![x];
    let mut y = p.image(x);
    while y != x {
        out.push(y);
        y = p.image(y);
    }
    out
}

/// A square root of `p` of type `[d - 2y, y, y]` that interleaves the two
/// `y`-cycles: `w = pi_1^((d-2y+1)/2) * Delta` with `Delta^2 = pi_2 pi_3`.
pub fn omega_from_three_cycles(p: &Permutation, y: usize) -> Result<Permutation> {
    let d = p.degree();
    if y == 0 || 2 * y >= d {
        return Err(Error::hypothesis(format!("y = {y} must satisfy 0 < 2y < d")));
    }
    let long = d - 2 * y;
    if long == y {
        return Err(Error::hypothesis("d - 2y must differ from y to single out the long cycle"));
    }
    let cycles = p.cycles();
    let want = Partition::new(vec![long, y, y])?;
    if p.cycle_structure() != want {
        return Err(Error::hypothesis(format!("p must have type {want}")));
    }
    omega_pairing(p, &cycles.iter().find(|c| c.len() == long).expect("long cycle")[0])
}

/// Square root of a three-cycle permutation pairing the two cycles that do
/// not contain `anchor`; the cycle through `anchor` must have odd length.
fn omega_pairing(p: &Permutation, anchor: &usize) -> Result<Permutation> {
    let cycles = p.cycles();
    let (long, others): (Vec<_>, Vec<_>) = cycles.into_iter().partition(|c| c.contains(anchor));
    let pi1 = &long[0];
    if others.len() != 2 || others[0].len() != others[1].len() || pi1.len() % 2 == 0 {
        return Err(Error::hypothesis("p must be one odd cycle and two cycles of equal length"));
    }
    let mut images: Vec<usize> = (0..p.degree()).collect();
    let m = pi1.len();
    let step = m.div_ceil(2);
    for i in 0..m {
        images[pi1[i]] = pi1[(i + step) % m];
    }
    let (a, b) = (&others[0], &others[1]);
    let y = a.len();
    for i in 0..y {
        images[a[i]] = b[i];
        images[b[i]] = a[(i + 1) % y];
    }
    let w = Permutation::from_images(&images)?;
    debug_assert_eq!(&w.then(&w), p);
    Ok(w)
}

/// Chains the cycles of `alpha` with cycles of lengths `es`: the `j`-th
/// cycle of the result meets `es[j]` consecutive cycles of `alpha`, sharing
/// exactly one with its predecessor. A shared cycle contributes two
/// consecutive points.
fn consecutive_chain(alpha: &Permutation, es: &[usize]) -> Result<Permutation> {
    let mut cyc = alpha.cycles();
    cyc.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let needed = 1 + es.iter().map(|e| e - 1).sum::<usize>();
    if needed != cyc.len() {
        return Err(Error::hypothesis("number of cycles of D1 must be nu(D2) + 1"));
    }
    let mut uses = vec![0usize; cyc.len()];
    let mut out = Vec::new();
    let mut start = 0;
    for &e in es {
        let mut c = Vec::with_capacity(e);
        for (i, u) in uses.iter_mut().enumerate().skip(start).take(e) {
            if *u >= cyc[i].len() {
                return Err(Error::invalid("cycle too short to chain"));
            }
            c.push(cyc[i][*u]);
            *u += 1;
        }
        out.push(c);
        start += e - 1;
    }
    cycle_perm(alpha.degree(), &out)
}

/// `b` of type `d2` linking consecutive cycles of `alpha`, so that `ab` is a
/// `d`-cycle and `<alpha, b>` is primitive. Needs every part of the type of
/// `alpha` to be at least 3, gcd 1, and minimal defect with `d2`.
pub fn construct_consecutive_beta(alpha: &Permutation, d2: &Partition) -> Result<Permutation> {
    let d1 = alpha.cycle_structure();
    let d = d1.degree();
    if d2.degree() != d {
        return Err(Error::DegreeMismatch(d, d2.degree()));
    }
    if d.is_multiple_of(2) || d1.nu() + d2.nu() + 1 != d {
        return Err(Error::hypothesis("{D1, D2} must have minimal defect with d odd"));
    }
    if d1.parts().iter().any(|&p| p < 3) {
        return Err(Error::hypothesis("every part of D1 must be at least 3"));
    }
    if d1.gcd() != 1 {
        return Err(Error::hypothesis("gcd(D1) must be 1"));
    }
    let beta = consecutive_chain(alpha, &non_trivial_parts(d2))?;
    let ab = alpha.then(&beta);
    if ab.num_cycles() != 1 {
        return Err(Error::invalid("ab is not a d-cycle"));
    }
    match GeneratedGroup::new(vec![alpha.clone(), beta.clone()])?.is_primitive()? {
        Primitivity::Primitive => Ok(beta),
        Primitivity::Imprimitive(_) => Err(Error::invalid("consecutive construction gave an imprimitive pair")),
    }
}

/// Which construction produced a two-point realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoPointRoute {
    /// `ab` of type `[d-2y, y, y]` with `gcd(y, d) = 1`.
    ThreeCycles { y: usize },
    /// `ab` a `d`-cycle with `<a, b>` primitive.
    Consecutive,
}

/// The route used for a two-point datum, or the failing hypothesis.
pub fn two_point_route(datum: &BranchDatum) -> Result<TwoPointRoute> {
    datum.require_minimal_defect()?;
    if datum.k() != 2 {
        return Err(Error::hypothesis("exactly two partitions are required"));
    }
    let d = datum.degree();
    let (d1, d2) = (&datum.partitions()[0], &datum.partitions()[1]);
    if d1.gcd() != 1 || d2.gcd() != 1 {
        return Err(Error::hypothesis("gcd(D1) = gcd(D2) = 1 is required"));
    }
    if d1.is_two_two_one() && d2.is_two_two_one() {
        return Err(Error::hypothesis("the pair {[2,...,2,1], [2,...,2,1]} is excluded"));
    }
    let x = d1.parts()[0];
    if d1.ones() > 0 {
        if x > 2 {
            return Ok(TwoPointRoute::ThreeCycles { y: 1 });
        }
        return Err(Error::hypothesis("D1 with fixed points needs a part larger than 2"));
    }
    let mut ys: Vec<usize> = d1.parts().to_vec();
    ys.sort_unstable();
    ys.dedup();
    if let Some(&y) = ys.iter().find(|&&y| gcd(y, d) == 1 && x > y.max(2)) {
        return Ok(TwoPointRoute::ThreeCycles { y });
    }
    Ok(TwoPointRoute::Consecutive)
}

/// A primitive realization of a two-point minimal-defect datum with
/// `gcd(D1) = gcd(D2) = 1` other than `{[2,…,2,1], [2,…,2,1]}`.
pub fn realize_two_point(datum: &BranchDatum) -> Result<RealizationWitness> {
    let route = two_point_route(datum)?;
    let d = datum.degree();
    let (d1, d2) = (&datum.partitions()[0], &datum.partitions()[1]);
    let (alpha, beta, omega) = match route {
        TwoPointRoute::ThreeCycles { y } => {
            let (alpha, beta) = construct_three_cycle_product(d1, d2, y)?;
            let omega = omega_from_three_cycles(&alpha.then(&beta), y)?;
            (alpha, beta, omega)
        }
        TwoPointRoute::Consecutive => {
            let alpha = Permutation::canonical(d1);
            let beta = construct_consecutive_beta(&alpha, d2)?;
            let omega = alpha.then(&beta).pow((d as i64 + 1) / 2);
            (alpha, beta, omega)
        }
    };
    primitive_witness(datum.clone(), vec![alpha, beta], omega)
}

fn primitive_witness(datum: BranchDatum, alphas: Vec<Permutation>, omega: Permutation) -> Result<RealizationWitness> {
    let w = RealizationWitness::from_generators(datum, alphas, omega)?;
    let report = verify_witness(&w);
    if !report.ok || w.verdict != Verdict::Primitive {
        return Err(Error::invalid(format!("construction failed verification: {}", report.summary())));
    }
    Ok(w)
}

/// Realizes `(first, second)` in this order: returns `(a, b, w)` with
/// `w^2 = ab` and `<a, b, w>` primitive.
fn realize_ordered_pair(first: &Partition, second: &Partition) -> Result<(Permutation, Permutation, Permutation)> {
    let datum = BranchDatum::new(first.degree(), vec![first.clone(), second.clone()])?;
    let w = realize_two_point(&datum)?;
    if datum.original_order() == [0, 1] {
        Ok((w.alphas[0].clone(), w.alphas[1].clone(), w.omega))
    } else {
        // w^2 = ba, so (a w a^-1)^2 = ab.
        let a = w.alphas[1].clone();
        let omega = w.omega.conjugate(&a)?;
        Ok((a, w.alphas[0].clone(), omega))
    }
}

/// A primitive realization of a minimal-defect datum with `k >= 3` and
/// every `gcd(D_i) = 1`.
///
/// `a_2, …, a_k` are chained so that their product `L` has defect
/// `sum nu(D_i)`; the pair `{D1, L}` is realized primitively and the chain
/// is conjugated onto the second generator of that realization.
pub fn realize_k_point(datum: &BranchDatum) -> Result<RealizationWitness> {
    datum.require_minimal_defect()?;
    if datum.k() < 3 {
        return Err(Error::hypothesis("k >= 3 is required"));
    }
    if let Some(p) = datum.partitions().iter().find(|p| p.gcd() != 1) {
        return Err(Error::hypothesis(format!("gcd({p}) must be 1")));
    }
    let d1 = &datum.partitions()[0];
    let chain = build_chain(datum)?;
    let lambda_chain = product(&chain);
    let l = lambda_chain.cycle_structure();
    if l.gcd() != 1 || (d1.is_two_two_one() && l.is_two_two_one()) {
        return Err(Error::invalid(format!("chained product has unusable type {l}")));
    }
    let (delta, lambda, omega) = realize_ordered_pair(d1, &l)?;
    let eta = matching_conjugator(&lambda_chain, &lambda)?;
    let eta_inv = eta.inverse();
    let mut alphas = vec![delta];
    for a in &chain {
        alphas.push(a.conjugate(&eta_inv)?);
    }
    debug_assert_eq!(product(&alphas[1..]), lambda);
    debug_assert_eq!(alphas.len(), datum.k());
    primitive_witness(datum.clone(), alphas, omega)
}

/// `a_2, …, a_k` whose product has defect equal to the sum of their
/// defects. Each new cycle joins the largest available cycles of the running
/// product; when `nu(D1) < (d-1)/2` one fixed point of `a_2` is never used.
fn build_chain(datum: &BranchDatum) -> Result<Vec<Permutation>> {
    let d = datum.degree();
    let parts = datum.partitions();
    let a2 = Permutation::canonical(&parts[1]);
    let reserved = if 2 * parts[0].nu() < d - 1 {
        Some((0..d).rev().find(|&x| a2.image(x) == x).ok_or_else(|| Error::invalid("a_2 has no fixed point"))?)
    } else {
        None
    };
    let mut running = a2.clone();
    let mut chain = vec![a2];
    for part in &parts[2..] {
        let mut used = vec![false; d];
        let mut cycles = Vec::new();
        for e in non_trivial_parts(part) {
            let mut avail: Vec<(usize, usize)> = running
                .cycles()
                .into_iter()
                .filter(|c| reserved.is_none_or(|r| !c.contains(&r)))
                .filter_map(|c| c.iter().copied().filter(|&p| !used[p]).min().map(|p| (c.len(), p)))
                .collect();
            avail.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            if avail.len() < e {
                return Err(Error::SearchExhausted("not enough cycles to chain".into()));
            }
            let c: Vec<usize> = avail[..e].iter().map(|&(_, p)| p).collect();
            for &p in &c {
                used[p] = true;
            }
            running = running.then(&cycle_perm(d, std::slice::from_ref(&c))?);
            cycles.push(c);
        }
        chain.push(cycle_perm(d, &cycles)?);
    }
    Ok(chain)
}

/// `eta` with `eta^-1 from eta = to`, pairing cycles of equal length in order.
fn matching_conjugator(from: &Permutation, to: &Permutation) -> Result<Permutation> {
    let mut a = from.cycles();
    let mut b = to.cycles();
    a.sort_by_key(|c| (c.len(), c[0]));
    b.sort_by_key(|c| (c.len(), c[0]));
    let mut images = vec![0; from.degree()];
    for (ca, cb) in a.iter().zip(&b) {
        if ca.len() != cb.len() {
            return Err(Error::invalid("cycle types differ"));
        }
        for (x, y) in ca.iter().zip(cb) {
            images[*x] = *y;
        }
    }
    let eta = Permutation::from_images(&images)?;
    debug_assert_eq!(&from.conjugate(&eta.inverse())?, to);
    Ok(eta)
}

/// Dispatches to the construction that fits: a `d`-cycle for `{[d]}` with
/// `d` prime, a dihedral pair for the excluded two-point datum at prime
/// degree, otherwise the two-point or `k`-point constructions.
pub fn realize_indecomposable(datum: &BranchDatum) -> Result<RealizationWitness> {
    datum.require_minimal_defect()?;
    let d = datum.degree();
    match datum.k() {
        1 => {
            if !is_prime(d) {
                return Err(Error::hypothesis("{[d]} is indecomposable only for d prime"));
            }
            let alpha = Permutation::canonical(&datum.partitions()[0]);
            let omega = alpha.pow((d as i64 + 1) / 2);
            primitive_witness(datum.clone(), vec![alpha], omega)
        }
        2 => {
            let (d1, d2) = (&datum.partitions()[0], &datum.partitions()[1]);
            if d1.is_two_two_one() && d2.is_two_two_one() {
                if !is_prime(d) {
                    return Err(Error::hypothesis(
                        "the pair {[2,...,2,1], [2,...,2,1]} is decomposable for d non-prime",
                    ));
                }
                let alpha = Permutation::canonical(d1);
                let beta = consecutive_chain(&alpha, &non_trivial_parts(d2))?;
                let omega = alpha.then(&beta).pow((d as i64 + 1) / 2);
                return primitive_witness(datum.clone(), vec![alpha, beta], omega);
            }
            realize_two_point(datum)
        }
        _ => realize_k_point(datum),
    }
}

/// The block system of a transitive pair whose first type has
/// `g = gcd(D1) > 1`: the orbits of `(ab)^g`, giving `g` blocks of size `d/g`.
pub fn imprimitivity_witness(alpha: &Permutation, beta: &Permutation) -> Result<BlockSystem> {
    let d = alpha.degree();
    if beta.degree() != d {
        return Err(Error::DegreeMismatch(d, beta.degree()));
    }
    let g = alpha.cycle_structure().gcd();
    if g == 1 || g == d {
        return Err(Error::hypothesis("gcd of the type of alpha must be a proper divisor of d"));
    }
    if !is_transitive(d, &[alpha.clone(), beta.clone()]) {
        return Err(Error::hypothesis("<alpha, beta> must be transitive"));
    }
    let ab = alpha.then(beta);
    if ab.num_cycles() != 1 {
        return Err(Error::hypothesis("alpha beta must be a d-cycle"));
    }
    let bs = BlockSystem::new(ab.pow(g as i64).cycles())?;
    if !bs.is_preserved_by(alpha) || !bs.is_preserved_by(beta) {
        return Err(Error::invalid("orbits of (alpha beta)^g are not blocks"));
    }
    Ok(bs)
}

/// Point layout of a factorization: `u` blocks of size `w` read off the
/// first generator.
struct Skeleton {
    u: usize,
    w: usize,
    blocks: Vec<Vec<usize>>,
}

impl Skeleton {
    /// Cluster `(a, W)` of `a_1` takes cycles of lengths `a * W`; the point at
    /// position `i` of such a cycle lies in the cluster's block `i mod a`.
    fn from_first(alpha: &Permutation, dec: &ProductDecomposition, u: usize, w: usize) -> Result<Self> {
        let mut pool = alpha.cycles();
        pool.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let mut taken = vec![false; pool.len()];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (&a, wpart) in dec.u_part.parts().iter().zip(&dec.ws) {
            let base = blocks.len();
            blocks.extend(std::iter::repeat_with(Vec::new).take(a));
            for &wm in wpart.parts() {
                let ci = (0..pool.len())
                    .find(|&i| !taken[i] && pool[i].len() == a * wm)
                    .ok_or_else(|| Error::invalid("factorization does not match the first partition"))?;
                taken[ci] = true;
                for (pos, &x) in pool[ci].iter().enumerate() {
                    blocks[base + pos % a].push(x);
                }
            }
        }
        for b in &mut blocks {
            b.sort_unstable();
        }
        debug_assert!(blocks.len() == u && blocks.iter().all(|b| b.len() == w));
        Ok(Skeleton { u, w, blocks })
    }

    fn system(&self) -> BlockSystem {
        BlockSystem::new(self.blocks.clone()).expect("skeleton blocks partition the points")
    }

    /// Every permutation that moves blocks by a `u`-permutation of type `U`
    /// and whose return map over a block cycle of length `U_j` has type `W_j`.
    fn candidates(&self, dec: &ProductDecomposition, sw: &[Permutation]) -> Vec<Permutation> {
        let d = self.u * self.w;
        let mut out = Vec::new();
        for gbar in conjugacy_class(&dec.u_part) {
            let gcycles = gbar.cycles();
            for assignment in cluster_assignments(&gcycles, dec) {
                // Per block cycle: every admissible list of fiber maps.
                let per_cycle: Vec<Vec<Vec<Permutation>>> =
                    gcycles.iter().zip(&assignment).map(|(c, wpart)| fiber_options(c.len(), wpart, sw)).collect();
                let mut idx = vec![0usize; per_cycle.len()];
                loop {
                    let mut images = vec![0usize; d];
                    for (ci, c) in gcycles.iter().enumerate() {
                        let maps = &per_cycle[ci][idx[ci]];
                        for (pos, &b) in c.iter().enumerate() {
                            let target = gbar.image(b);
                            for (q, &x) in self.blocks[b].iter().enumerate() {
                                images[x] = self.blocks[target][maps[pos].image(q)];
                            }
                        }
                    }
                    out.push(Permutation::from_images(&images).expect("block maps are bijective"));
                    let mut pos = per_cycle.len();
                    let mut advanced = false;
                    while pos > 0 {
                        pos -= 1;
                        idx[pos] += 1;
                        if idx[pos] < per_cycle[pos].len() {
                            advanced = true;
                            break;
                        }
                        idx[pos] = 0;
                    }
                    if !advanced {
                        break;
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn block_map(&self, g: &Permutation) -> Option<Permutation> {
        let mut of = vec![0; self.u * self.w];
        for (i, b) in self.blocks.iter().enumerate() {
            for &x in b {
                of[x] = i;
            }
        }
        let mut images = vec![0; self.u];
        for (i, b) in self.blocks.iter().enumerate() {
            let t = of[g.image(b[0])];
            if b.iter().any(|&x| of[g.image(x)] != t) {
                return None;
            }
            images[i] = t;
        }
        Permutation::from_images(&images).ok()
    }
}

/// Distinct ways to hand the `W_j` of each length class to block cycles.
fn cluster_assignments(gcycles: &[Vec<usize>], dec: &ProductDecomposition) -> Vec<Vec<Partition>> {
    let mut out = vec![vec![None; gcycles.len()]];
    let mut lengths: Vec<usize> = dec.u_part.parts().to_vec();
    lengths.dedup();
    for len in lengths {
        let mut ws: Vec<Partition> =
            dec.u_part.parts().iter().zip(&dec.ws).filter(|(&a, _)| a == len).map(|(_, w)| w.clone()).collect();
        ws.sort();
        let slots: Vec<usize> = (0..gcycles.len()).filter(|&i| gcycles[i].len() == len).collect();
        let mut perms = Vec::new();
        multiset_permutations(&mut ws, 0, &mut perms);
        let mut next = Vec::new();
        for base in &out {
            for p in &perms {
                let mut b = base.clone();
                for (slot, w) in slots.iter().zip(p) {
                    b[*slot] = Some(w.clone());
                }
                next.push(b);
            }
        }
        out = next;
    }
    out.into_iter().map(|v| v.into_iter().map(|w| w.expect("every cycle assigned")).collect()).collect()
}

fn multiset_permutations(items: &mut Vec<Partition>, k: usize, out: &mut Vec<Vec<Partition>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    let mut seen: Vec<Partition> = Vec::new();
    for i in k..items.len() {
        if seen.contains(&items[i]) {
            continue;
        }
        seen.push(items[i].clone());
        items.swap(k, i);
        multiset_permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Lists `(f_1, …, f_m)` of fiber maps whose product has type `wpart`.
fn fiber_options(m: usize, wpart: &Partition, sw: &[Permutation]) -> Vec<Vec<Permutation>> {
    let sigmas: Vec<&Permutation> = sw.iter().filter(|s| &s.cycle_structure() == wpart).collect();
    let mut prefixes: Vec<Vec<Permutation>> = vec![vec![]];
    for _ in 1..m {
        prefixes = prefixes
            .into_iter()
            .flat_map(|p| {
                sw.iter().map(move |f| {
                    let mut p = p.clone();
                    p.push(f.clone());
                    p
                })
            })
            .collect();
    }
    let w = sw[0].degree();
    let mut out = Vec::new();
    for pre in prefixes {
        let acc = pre.iter().fold(Permutation::identity(w), |a, f| a.then(f));
        let inv = acc.inverse();
        for s in &sigmas {
            let mut maps = pre.clone();
            maps.push(inv.then(s));
            out.push(maps);
        }
    }
    out
}

/// Default number of generator tuples examined by [`realize_decomposable`].
pub const DEFAULT_DECOMPOSABLE_BUDGET: u64 = 10_000_000;

/// An imprimitive realization inducing the factorization `f`: the first
/// generator is canonical, the others range over permutations respecting the
/// block skeleton of `f`, and `w` is a block-preserving square root making
/// the group transitive. Tuples are tried in a fixed order; the first hit is
/// returned.
pub fn realize_decomposable(datum: &BranchDatum, f: &Factorization, budget: u64) -> Result<RealizationWitness> {
    datum.require_minimal_defect()?;
    f.check_against(datum)?;
    if !f.has_minimal_first_factor() {
        return Err(Error::hypothesis("the first factor must be non-trivial with defect u - 1"));
    }
    let alpha = Permutation::canonical(&datum.partitions()[0]);
    let sk = Skeleton::from_first(&alpha, &f.decomposition(0), f.u, f.w)?;
    let bs = sk.system();
    let sw: Vec<Permutation> = Partition::all(f.w).iter().flat_map(conjugacy_class).collect();
    let cands: Vec<Vec<Permutation>> = (1..datum.k()).map(|i| sk.candidates(&f.decomposition(i), &sw)).collect();
    if cands.iter().any(Vec::is_empty) {
        return Err(Error::SearchExhausted("no block-preserving candidates".into()));
    }
    let abar = sk.block_map(&alpha).expect("a_1 preserves its skeleton");
    let mut idx = vec![0usize; cands.len()];
    let mut examined = 0u64;
    loop {
        if examined >= budget {
            return Err(Error::BudgetExceeded(budget));
        }
        examined += 1;
        let mut alphas = vec![alpha.clone()];
        alphas.extend(idx.iter().enumerate().map(|(i, &j)| cands[i][j].clone()));
        if let Some(omega) = skeleton_root(&sk, &abar, &alphas) {
            let mut gens = alphas.clone();
            gens.push(omega.clone());
            debug_assert!(gens.iter().all(|g| bs.is_preserved_by(g)));
            let w = RealizationWitness {
                datum: datum.clone(),
                alphas,
                omega,
                verdict: Verdict::Imprimitive,
                blocks: Some(bs.clone()),
            };
            let report = verify_witness(&w);
            if !report.ok {
                return Err(Error::invalid(format!(
                    "decomposable search produced a bad witness: {}",
                    report.summary()
                )));
            }
            return Ok(w);
        }
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return Err(Error::SearchExhausted(format!(
                    "no block-preserving realization for this factorization after {examined} tuples"
                )));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cands[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// A block-preserving square root of the product making the group
/// transitive, checked first on blocks.
fn skeleton_root(sk: &Skeleton, abar: &Permutation, alphas: &[Permutation]) -> Option<Permutation> {
    let p = product(alphas);
    let pbar = sk.block_map(&p)?;
    let mut bar_gens = vec![abar.clone()];
    bar_gens.extend(alphas[1..].iter().map(|g| sk.block_map(g).expect("candidates preserve blocks")));
    let bar_ok = pbar.square_roots().any(|r| {
        let mut gens = bar_gens.clone();
        gens.push(r);
        is_transitive(sk.u, &gens)
    });
    if !bar_ok {
        return None;
    }
    let mut gens = alphas.to_vec();
    gens.push(p.clone());
    p.square_roots().find(|r| {
        if sk.block_map(r).is_none() {
            return false;
        }
        *gens.last_mut().expect("non-empty") = r.clone();
        is_transitive(p.degree(), &gens)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub ok: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recomputed_verdict: Option<Verdict>,
}

impl WitnessReport {
    pub fn summary(&self) -> String {
        let failed: Vec<String> =
            self.checks.iter().filter(|c| !c.ok).map(|c| format!("{}: {}", c.name, c.detail)).collect();
        if failed.is_empty() {
            "all checks passed".into()
        } else {
            failed.join("; ")
        }
    }
}

/// Re-checks a witness from scratch: cycle types, `w^2 = a_1 ⋯ a_k`,
/// transitivity, the primitivity verdict and any declared block system.
pub fn verify_witness(w: &RealizationWitness) -> WitnessReport {
    let mut checks = Vec::new();
    let push = |checks: &mut Vec<Check>, name: &str, ok: bool, detail: String| {
        checks.push(Check { name: name.into(), ok, detail })
    };
    let d = w.datum.degree();
    let degrees_ok = w.omega.degree() == d && w.alphas.iter().all(|a| a.degree() == d);
    push(&mut checks, "degree", degrees_ok, if degrees_ok { String::new() } else { format!("expected degree {d}") });
    if !degrees_ok {
        return WitnessReport { ok: false, checks, recomputed_verdict: None };
    }
    let count_ok = w.alphas.len() == w.datum.k();
    push(
        &mut checks,
        "count",
        count_ok,
        if count_ok { String::new() } else { format!("{} generators for {} partitions", w.alphas.len(), w.datum.k()) },
    );
    if count_ok {
        for (i, (a, p)) in w.alphas.iter().zip(w.datum.partitions()).enumerate() {
            let got = a.cycle_structure();
            push(
                &mut checks,
                &format!("type of alpha_{}", i + 1),
                &got == p,
                if &got == p { String::new() } else { format!("has type {got}, expected {p}") },
            );
        }
    }
    let prod = product(&w.alphas);
    let sq = w.omega.then(&w.omega);
    push(
        &mut checks,
        "square",
        sq == prod,
        if sq == prod { String::new() } else { format!("omega^2 = {sq} but the product is {prod}") },
    );
    let g = w.group();
    let transitive = g.is_transitive();
    push(
        &mut checks,
        "transitive",
        transitive,
        if transitive { String::new() } else { format!("{} orbits", g.orbits().len()) },
    );
    let mut recomputed = None;
    if transitive {
        let v = match g.is_primitive().expect("transitive") {
            Primitivity::Primitive => Verdict::Primitive,
            Primitivity::Imprimitive(_) => Verdict::Imprimitive,
        };
        recomputed = Some(v);
        push(
            &mut checks,
            "verdict",
            v == w.verdict,
            if v == w.verdict { String::new() } else { format!("group is {v:?}, witness says {:?}", w.verdict) },
        );
    }
    if let Some(bs) = &w.blocks {
        let ok = bs.degree() == d && !bs.is_trivial() && g.generators().iter().all(|x| bs.is_preserved_by(x));
        push(
            &mut checks,
            "blocks",
            ok,
            if ok { String::new() } else { "declared blocks are not a non-trivial block system".into() },
        );
    } else if w.verdict == Verdict::Imprimitive {
        push(&mut checks, "blocks", false, "imprimitive verdict without blocks".into());
    }
    let ok = checks.iter().all(|c| c.ok);
    WitnessReport { ok, checks, recomputed_verdict: recomputed }
}
