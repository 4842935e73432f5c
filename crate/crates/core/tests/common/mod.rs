//! Exhaustive and sampled checks shared by the property tests and the
//! acceptance runner. Each check returns a one-line summary on success and a
//! description of the first counterexample on failure.

#![allow(dead_code)]

use std::collections::BTreeMap;

use branchcov::group::{GeneratedGroup, Primitivity, TwoPointVerdict};
use branchcov::oracle::{scan_tuples, DEFAULT_BUDGET};
use branchcov::partition::{algebraic_factorizations, enumerate_minimal_data, BranchDatum, Partition};
use branchcov::realization::{construct_three_cycle_product, omega_from_three_cycles, product};
use branchcov::Permutation;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Outcome = Result<String, String>;

pub fn part(p: &[usize]) -> Partition {
    Partition::new(p.to_vec()).unwrap()
}

pub fn datum(d: usize, ps: &[&[usize]]) -> BranchDatum {
    BranchDatum::new(d, ps.iter().map(|p| part(p)).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_perm(d: usize, rng: &mut impl Rng) -> Permutation {
    let mut images: Vec<usize> = (0..d).collect();
    images.shuffle(rng);
    Permutation::from_images(&images).unwrap()
}

/// A uniformly random element of the conjugacy class of type `p`.
pub fn random_of_type(p: &Partition, rng: &mut impl Rng) -> Permutation {
    Permutation::canonical(p).conjugate(&random_perm(p.degree(), rng)).unwrap()
}

/// All of `S_d` by Heap's algorithm.
pub fn all_perms(d: usize) -> Vec<Permutation> {
    let mut a: Vec<usize> = (0..d).collect();
    let mut c = vec![0usize; d];
    let mut out = vec![Permutation::from_images(&a).unwrap()];
    let mut i = 0;
    while i < d {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(Permutation::from_images(&a).unwrap());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn square(w: &Permutation) -> Permutation {
    w.compose(w).unwrap()
}

fn transitive(gens: &[Permutation]) -> bool {
    GeneratedGroup::new(gens.to_vec()).unwrap().is_transitive()
}

/// `square_roots(p)` equals the set of `w` with `w^2 = p`, for every `p` in
/// `S_d`, `d <= max_d`.
pub fn square_roots_complete(max_d: usize) -> Outcome {
    let mut checked = 0usize;
    for d in 1..=max_d {
        let all = all_perms(d);
        let mut roots: BTreeMap<Permutation, Vec<Permutation>> = all.iter().map(|p| (p.clone(), vec![])).collect();
        for w in &all {
            roots.get_mut(&square(w)).unwrap().push(w.clone());
        }
        for (p, mut want) in roots {
            let mut got: Vec<Permutation> = p.square_roots().collect();
            got.sort();
            want.sort();
            if got != want {
                return Err(format!("{p}: square_roots gave {} roots, full scan {}", got.len(), want.len()));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} permutations"))
}

/// For minimal two-point data, `<a, b>` is transitive exactly when `ab` is a
/// `d`-cycle. Exhaustive over every datum of degree `d`.
pub fn d_cycle_exhaustive(d: usize) -> Outcome {
    let mut pairs = 0u64;
    let mut transitive_pairs = 0u64;
    for dt in enumerate_minimal_data(d, 2).unwrap() {
        let scan = scan_tuples(
            &dt,
            u64::MAX,
            || Ok((0u64, 0u64)),
            |acc: &mut Result<(u64, u64), String>, t| {
                let Ok((n, tr)) = acc else { return };
                let tra = transitive(t);
                let cyc = t[0].compose(&t[1]).unwrap().num_cycles() == 1;
                if tra != cyc {
                    *acc = Err(format!("{dt}: a = {}, b = {}: transitive {tra}, d-cycle {cyc}", t[0], t[1]));
                    return;
                }
                *n += 1;
                *tr += tra as u64;
            },
            |a, b| match (a, b) {
                (Ok(x), Ok(y)) => Ok((x.0 + y.0, x.1 + y.1)),
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
        );
        let (n, tr) = scan.acc?;
        pairs += n;
        transitive_pairs += tr;
    }
    Ok(format!("{pairs} pairs at d={d}, {transitive_pairs} transitive"))
}

/// The same biconditional on `samples` random pairs of random minimal data.
pub fn d_cycle_sampled(d: usize, samples: usize, seed: u64) -> Outcome {
    let data: Vec<BranchDatum> = enumerate_minimal_data(d, 2).unwrap().collect();
    let mut rng = rng(seed);
    let mut transitive_pairs = 0;
    for _ in 0..samples {
        let dt = data.choose(&mut rng).unwrap();
        let a = random_of_type(&dt.partitions()[0], &mut rng);
        let b = random_of_type(&dt.partitions()[1], &mut rng);
        let tra = transitive(&[a.clone(), b.clone()]);
        let cyc = a.compose(&b).unwrap().num_cycles() == 1;
        if tra != cyc {
            return Err(format!("{dt}: a = {a}, b = {b}: transitive {tra}, d-cycle {cyc}"));
        }
        transitive_pairs += tra as usize;
    }
    Ok(format!("{samples} pairs at d={d}, {transitive_pairs} transitive"))
}

/// Every `(datum, y)` accepted by the three-cycle construction.
pub fn three_cycle_instances(d: usize) -> Vec<(BranchDatum, usize)> {
    let mut out = Vec::new();
    for dt in enumerate_minimal_data(d, 2).unwrap() {
        let d1 = &dt.partitions()[0];
        if d1.is_two_two_one() {
            continue;
        }
        let x = d1.parts()[0];
        if d1.ones() > 0 {
            if x > 2 {
                out.push((dt.clone(), 1));
            }
            continue;
        }
        let mut ys: Vec<usize> = d1.parts().iter().copied().filter(|&y| y < x).collect();
        ys.dedup();
        out.extend(ys.into_iter().map(|y| (dt.clone(), y)));
    }
    out
}

/// Output of the three-cycle construction for one instance: types, the
/// product type `[d-2y, y, y]`, an untouched `y`-cycle of `a`, and a square
/// root of `ab` making the group transitive.
pub fn check_three_cycle(dt: &BranchDatum, y: usize) -> Result<(), String> {
    let d = dt.degree();
    let (d1, d2) = (&dt.partitions()[0], &dt.partitions()[1]);
    let ctx = || format!("{dt} y={y}");
    let (a, b) = construct_three_cycle_product(d1, d2, y).map_err(|e| format!("{}: {e}", ctx()))?;
    if &a.cycle_structure() != d1 || &b.cycle_structure() != d2 {
        return Err(format!("{}: wrong generator types", ctx()));
    }
    let ab = a.compose(&b).unwrap();
    if ab.cycle_structure() != part(&[d - 2 * y, y, y]) {
        return Err(format!("{}: ab has type {}", ctx(), ab.cycle_structure()));
    }
    let untouched = ab.cycles().into_iter().filter(|c| c.len() == y).any(|c| {
        c.iter().all(|&p| b.image(p) == p)
            && a.cycles().iter().any(|ac| {
                let mut s = ac.clone();
                let mut t = c.clone();
                s.sort_unstable();
                t.sort_unstable();
                s == t
            })
    });
    if !untouched {
        return Err(format!("{}: no y-cycle of ab is an untouched cycle of a", ctx()));
    }
    let omega = if d - 2 * y != y {
        Some(omega_from_three_cycles(&ab, y).map_err(|e| format!("{}: {e}", ctx()))?)
    } else {
        ab.square_roots().find(|w| transitive(&[a.clone(), b.clone(), w.clone()]))
    };
    let Some(omega) = omega else {
        return Err(format!("{}: no square root of ab gives a transitive group", ctx()));
    };
    if square(&omega) != ab || !transitive(&[a, b, omega]) {
        return Err(format!("{}: omega is not a transitive square root of ab", ctx()));
    }
    Ok(())
}

pub fn three_cycle_exhaustive(d: usize) -> Outcome {
    let inst = three_cycle_instances(d);
    for (dt, y) in &inst {
        check_three_cycle(dt, *y)?;
    }
    Ok(format!("{} instances at d={d}", inst.len()))
}

pub fn three_cycle_sampled(d: usize, samples: usize, seed: u64) -> Outcome {
    let inst = three_cycle_instances(d);
    let mut rng = rng(seed);
    let picked: Vec<&(BranchDatum, usize)> = inst.choose_multiple(&mut rng, samples).collect();
    for (dt, y) in &picked {
        check_three_cycle(dt, *y)?;
    }
    Ok(format!("{} of {} instances at d={d}", picked.len(), inst.len()))
}

/// Orbit count of `<a_1, …, a_k>` built one cycle at a time, returning the
/// final count and the number of multi-intersections of each `a_i`, `i >= 2`.
fn orbit_bookkeeping(d: usize, alphas: &[Permutation]) -> (usize, Vec<usize>) {
    let mut uf: Vec<usize> = (0..d).collect();
    fn find(uf: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        uf[x] = r;
        r
    }
    let mut orbits = d;
    let mut multi = Vec::new();
    for (i, a) in alphas.iter().enumerate() {
        let mut n_i = 0;
        let mut supp = 0;
        for c in a.cycles().into_iter().filter(|c| c.len() > 1) {
            supp += c.len();
            let mut roots: Vec<usize> = c.iter().map(|&p| find(&mut uf, p)).collect();
            roots.sort_unstable();
            roots.dedup();
            n_i += roots.len();
            for r in &roots[1..] {
                uf[*r] = roots[0];
            }
            orbits -= roots.len() - 1;
        }
        if i > 0 {
            multi.push(supp - n_i);
        }
    }
    (orbits, multi)
}

#[derive(Default)]
struct CountTally {
    realizations: u64,
    formula_checked: u64,
    failure: Option<String>,
}

/// Whenever `<a_1, …, a_k>` has `t > 1` orbits and some square root of the
/// product makes the group transitive, the product has `2t - 1` cycles.
/// When `D1` has no fixed points the orbit count also equals the number of
/// multi-intersections plus one. Exhaustive over all data of degree `d`.
pub fn orbit_cycle_count(d: usize, k: usize) -> Outcome {
    let mut total = CountTally::default();
    let mut data = 0;
    for dt in enumerate_minimal_data(d, k).unwrap() {
        data += 1;
        let no_ones = dt.partitions()[0].ones() == 0;
        let scan = scan_tuples(
            &dt,
            u64::MAX,
            CountTally::default,
            |acc: &mut CountTally, t| {
                if acc.failure.is_some() {
                    return;
                }
                let (orbits, multi) = orbit_bookkeeping(d, t);
                if orbits == 1 {
                    return;
                }
                let p = product(t);
                let mut gens = t.to_vec();
                gens.push(p.clone());
                let realized = p.square_roots().any(|w| {
                    *gens.last_mut().unwrap() = w;
                    transitive(&gens)
                });
                if !realized {
                    return;
                }
                acc.realizations += 1;
                let list = t.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
                if p.num_cycles() != 2 * orbits - 1 {
                    acc.failure =
                        Some(format!("{dt}: [{list}] has t={orbits} but product has {} cycles", p.num_cycles()));
                } else if no_ones {
                    acc.formula_checked += 1;
                    if multi.iter().sum::<usize>() + 1 != orbits {
                        acc.failure = Some(format!("{dt}: [{list}] has t={orbits}, multi-intersections {multi:?}"));
                    }
                }
            },
            |mut a, b| {
                a.realizations += b.realizations;
                a.formula_checked += b.formula_checked;
                a.failure = a.failure.or(b.failure);
                a
            },
        );
        if let Some(f) = scan.acc.failure {
            return Err(f);
        }
        total.realizations += scan.acc.realizations;
        total.formula_checked += scan.acc.formula_checked;
    }
    Ok(format!(
        "{} realizations with intransitive <a_i> over {data} data (d={d}, k={k}); orbit formula on {}",
        total.realizations, total.formula_checked
    ))
}

/// Counting identities for minimal two-point data written as
/// `D1 = [c_1..c_r, 1^l1]`, `D2 = [e_1..e_s, 1^l2]` with `nu(D1) >= nu(D2)`.
pub fn two_point_arithmetic(d: usize) -> Outcome {
    let mut n = 0;
    for dt in enumerate_minimal_data(d, 2).unwrap() {
        let (d1, d2) = (&dt.partitions()[0], &dt.partitions()[1]);
        let (l1, l2) = (d1.ones(), d2.ones());
        let (r, s) = (d1.len() - l1, d2.len() - l2);
        let c_sum: usize = d1.parts()[..r].iter().sum();
        let fail = |what: &str| Err(format!("{dt}: {what}"));
        if r + l1 + s + l2 != d + 1 {
            return fail("r + l1 + s + l2 != d + 1");
        }
        if l2 < 1 {
            return fail("l2 = 0");
        }
        if r + l1 != d2.nu() + 1 || s + l2 != d1.nu() + 1 {
            return fail("cycle counts do not match the other defect");
        }
        if l1 + 2 * r > c_sum + 1 {
            return fail("l1 > sum c_i - 2r + 1");
        }
        let tight = l1 + 2 * r == c_sum + 1;
        let balanced = d1.nu() == (d - 1) / 2 && d2.nu() == (d - 1) / 2;
        if tight != balanced {
            return fail("equality in the fixed-point bound differs from nu(D1) = nu(D2)");
        }
        if l1 == 0 && d1.parts().iter().any(|&c| c > l2) {
            return fail("l1 = 0 but some c_i > l2");
        }
        n += 1;
    }
    Ok(format!("{n} data at d={d}"))
}

/// Every factorization reproduces its datum and satisfies
/// `nu(D) = nu(W) + w * nu(U)`. Covers every `k` at degree `d`.
pub fn factorization_defects(d: usize) -> Outcome {
    let (mut data, mut facts) = (0usize, 0usize);
    for k in 1..d {
        for dt in enumerate_minimal_data(d, k).unwrap() {
            data += 1;
            for f in algebraic_factorizations(&dt).unwrap() {
                facts += 1;
                for (i, p) in dt.partitions().iter().enumerate() {
                    if &f.decomposition(i).product() != p {
                        return Err(format!("{dt}: factorization {f:?} does not rebuild {p}"));
                    }
                }
                if dt.total_defect() != f.nu_w() + f.w * f.nu_u() {
                    return Err(format!("{dt}: defect identity fails for {f:?}"));
                }
            }
        }
    }
    Ok(format!("{facts} factorizations of {data} data at d={d}"))
}

/// On realizations with `gcd(D_i) != 1` for some `i` and `<a, b>`
/// intransitive, some pair of point stabilizers generates a proper subgroup.
/// Checks up to `per_datum` realizations of each datum.
pub fn two_point_stabilizers(d: usize, per_datum: usize) -> Outcome {
    let mut checked = 0;
    for dt in enumerate_minimal_data(d, 2).unwrap() {
        if dt.partitions().iter().all(|p| p.gcd() == 1) {
            continue;
        }
        let scan = scan_tuples(
            &dt,
            DEFAULT_BUDGET,
            Vec::new,
            |acc: &mut Vec<Vec<Permutation>>, t| {
                if acc.len() >= per_datum || transitive(t) {
                    return;
                }
                let p = product(t);
                let mut gens = t.to_vec();
                gens.push(p.clone());
                for w in p.square_roots() {
                    *gens.last_mut().unwrap() = w;
                    if transitive(&gens) {
                        acc.push(gens.clone());
                        break;
                    }
                }
            },
            |mut a, b| {
                a.extend(b);
                a
            },
        );
        for gens in scan.acc.into_iter().take(per_datum) {
            let g = GeneratedGroup::new(gens.clone()).unwrap();
            let found = (0..d).any(|x| {
                (x + 1..d).any(|y| g.two_point_generation_test(x, y, 10_000_000).unwrap() == TwoPointVerdict::Proper)
            });
            if !found {
                let list = gens.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
                return Err(format!("{dt}: no proper pair of stabilizers for [{list}]"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} realizations at d={d}"))
}

/// Brute-force primitivity: some subset through point 0 of proper
/// non-singleton size has an orbit of pairwise equal or disjoint images.
pub fn has_block_by_subsets(d: usize, gens: &[Permutation]) -> bool {
    let image =
        |g: &Permutation, mask: u32| (0..d).filter(|&i| mask >> i & 1 == 1).fold(0u32, |m, i| m | 1 << g.image(i));
    (0u32..1 << d).any(|mask| {
        let size = mask.count_ones() as usize;
        if mask & 1 == 0 || size < 2 || size == d || !d.is_multiple_of(size) {
            return false;
        }
        let mut orbit = vec![mask];
        let mut i = 0;
        while i < orbit.len() {
            for g in gens {
                let img = image(g, orbit[i]);
                if orbit.iter().any(|&m| m != img && m & img != 0) {
                    return false;
                }
                if !orbit.contains(&img) {
                    orbit.push(img);
                }
            }
            i += 1;
        }
        true
    })
}

pub fn is_primitive_by_subsets(d: usize, gens: &[Permutation]) -> bool {
    !has_block_by_subsets(d, gens)
}

pub fn primitivity_of(gens: &[Permutation]) -> Option<bool> {
    let g = GeneratedGroup::new(gens.to_vec()).unwrap();
    if !g.is_transitive() {
        return None;
    }
    Some(g.is_primitive().unwrap() == Primitivity::Primitive)
}
