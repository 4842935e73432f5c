//! Exhaustive search over realizations of a datum.
//!
//! The first generator is fixed to the canonical representative of `D1`;
//! the others run over their full conjugacy classes in lexicographic image
//! order, and every square root of the product is tried. Work is split over
//! the second generator and merged in index order, so results do not depend
//! on the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::group::{is_transitive, GeneratedGroup, Primitivity};
use crate::partition::BranchDatum;
use crate::perm::{conjugacy_class, Permutation};
use crate::realization::{product, RealizationWitness};

/// Default cap on examined generator tuples.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Outcome of a budgeted scan.
pub struct Scan<A> {
    pub acc: A,
    pub examined: u64,
    pub total: u64,
}

impl<A> Scan<A> {
    pub fn complete(&self) -> bool {
        self.examined == self.total
    }
}

/// Visits the first `budget` tuples `(a_1, …, a_k)` in canonical order.
/// Each worker folds into its own accumulator; accumulators are merged left
/// to right in tuple order.
pub fn scan_tuples<A, I, V, M>(datum: &BranchDatum, budget: u64, init: I, visit: V, merge: M) -> Scan<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &[Permutation]) + Sync,
    M: Fn(A, A) -> A,
{
    let alpha = Permutation::canonical(&datum.partitions()[0]);
    let classes: Vec<Vec<Permutation>> = datum.partitions()[1..].iter().map(conjugacy_class).collect();
    let sizes: Vec<u64> = classes.iter().map(|c| c.len() as u64).collect();
    let total = sizes.iter().fold(1u64, |a, &b| a.saturating_mul(b));
    if classes.is_empty() {
        let mut acc = init();
        if budget >= 1 {
            visit(&mut acc, &[alpha]);
        }
        return Scan { acc, examined: budget.min(1), total: 1 };
    }
    let chunk: u64 = sizes[1..].iter().fold(1u64, |a, &b| a.saturating_mul(b));
    let parts: Vec<(A, u64)> = (0..classes[0].len())
        .into_par_iter()
        .map(|i| {
            let mut acc = init();
            let start = (i as u64).saturating_mul(chunk);
            let limit = budget.saturating_sub(start).min(chunk);
            let mut done = 0u64;
            if limit > 0 {
                let mut tuple = vec![alpha.clone(), classes[0][i].clone()];
                tuple.extend(classes[1..].iter().map(|c| c[0].clone()));
                let mut idx = vec![0usize; classes.len() - 1];
                loop {
                    visit(&mut acc, &tuple);
                    done += 1;
                    if done == limit || !advance(&mut idx, &classes[1..], &mut tuple[2..]) {
                        break;
                    }
                }
            }
            (acc, done)
        })
        .collect();
    let mut examined = 0;
    let mut acc: Option<A> = None;
    for (a, n) in parts {
        examined += n;
        acc = Some(match acc {
            None => a,
            Some(prev) => merge(prev, a),
        });
    }
    Scan { acc: acc.unwrap_or_else(init), examined, total }
}

fn advance(idx: &mut [usize], classes: &[Vec<Permutation>], slots: &mut [Permutation]) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < classes[pos].len() {
            slots[pos] = classes[pos][idx[pos]].clone();
            return true;
        }
        idx[pos] = 0;
        slots[pos] = classes[pos][0].clone();
    }
    false
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleResult {
    pub complete: bool,
    pub tuples_examined: u64,
    pub tuples_total: u64,
    /// Tuples whose generators alone act transitively.
    pub transitive_tuples: u64,
    /// Of those, the ones acting primitively.
    pub primitive_tuples: u64,
    /// `(tuple, w)` pairs with a transitive group.
    pub realizations: u64,
    pub primitive_realizations: u64,
    pub imprimitive_realizations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primitive_witness: Option<RealizationWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imprimitive_witness: Option<RealizationWitness>,
}

impl OracleResult {
    pub fn has_primitive(&self) -> bool {
        self.primitive_realizations > 0
    }

    pub fn has_imprimitive(&self) -> bool {
        self.imprimitive_realizations > 0
    }

    fn merge(mut self, other: OracleResult) -> OracleResult {
        self.transitive_tuples += other.transitive_tuples;
        self.primitive_tuples += other.primitive_tuples;
        self.realizations += other.realizations;
        self.primitive_realizations += other.primitive_realizations;
        self.imprimitive_realizations += other.imprimitive_realizations;
        self.primitive_witness = self.primitive_witness.or(other.primitive_witness);
        self.imprimitive_witness = self.imprimitive_witness.or(other.imprimitive_witness);
        self
    }
}

/// Counts primitive and imprimitive realizations of `datum` and keeps the
/// first witness of each kind. A result with `complete == false` stopped at
/// the budget; its counts cover only the examined prefix.
pub fn oracle_classify(datum: &BranchDatum, budget: u64) -> Result<OracleResult> {
    let d = datum.degree();
    let scan = scan_tuples(
        datum,
        budget,
        OracleResult::default,
        |acc, alphas| {
            if is_transitive(d, alphas) {
                acc.transitive_tuples += 1;
                let sub = GeneratedGroup::new(alphas.to_vec()).expect("same degree");
                if sub.is_primitive().expect("transitive") == Primitivity::Primitive {
                    acc.primitive_tuples += 1;
                }
            }
            let p = product(alphas);
            let mut gens = alphas.to_vec();
            gens.push(p.clone());
            for omega in p.square_roots() {
                *gens.last_mut().expect("non-empty") = omega;
                if !is_transitive(d, &gens) {
                    continue;
                }
                acc.realizations += 1;
                let group = GeneratedGroup::new(gens.clone()).expect("same degree");
                let omega = gens.last().expect("non-empty").clone();
                match group.is_primitive().expect("transitive") {
                    Primitivity::Primitive => {
                        acc.primitive_realizations += 1;
                        if acc.primitive_witness.is_none() {
                            acc.primitive_witness = Some(RealizationWitness {
                                datum: datum.clone(),
                                alphas: alphas.to_vec(),
                                omega,
                                verdict: crate::realization::Verdict::Primitive,
                                blocks: None,
                            });
                        }
                    }
                    Primitivity::Imprimitive(bs) => {
                        acc.imprimitive_realizations += 1;
                        if acc.imprimitive_witness.is_none() {
                            acc.imprimitive_witness = Some(RealizationWitness {
                                datum: datum.clone(),
                                alphas: alphas.to_vec(),
                                omega,
                                verdict: crate::realization::Verdict::Imprimitive,
                                blocks: Some(bs),
                            });
                        }
                    }
                }
            }
        },
        OracleResult::merge,
    );
    let complete = scan.complete();
    Ok(OracleResult { complete, tuples_examined: scan.examined, tuples_total: scan.total, ..scan.acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Partition;

    fn datum(d: usize, ps: &[&[usize]]) -> BranchDatum {
        BranchDatum::new(d, ps.iter().map(|p| Partition::new(p.to_vec()).unwrap()).collect()).unwrap()
    }

    #[test]
    fn one_point_data() {
        let r = oracle_classify(&datum(9, &[&[9]]), DEFAULT_BUDGET).unwrap();
        assert!(r.complete);
        assert_eq!(r.realizations, 1);
        assert!(r.has_imprimitive() && !r.has_primitive());
        let r = oracle_classify(&datum(7, &[&[7]]), DEFAULT_BUDGET).unwrap();
        assert!(r.has_primitive());
    }

    #[test]
    fn budget_marks_partial_results() {
        let dt = datum(9, &[&[3, 2, 2, 1, 1], &[3, 2, 2, 1, 1]]);
        let r = oracle_classify(&dt, 100).unwrap();
        assert!(!r.complete);
        assert_eq!(r.tuples_examined, 100);
        assert_eq!(r.tuples_total, 7560);
    }

    #[test]
    fn results_are_independent_of_thread_count() {
        let dt = datum(9, &[&[4, 2, 1, 1, 1], &[3, 1, 1, 1, 1, 1, 1], &[2, 1, 1, 1, 1, 1, 1, 1]]);
        let run = |n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            pool.install(|| serde_json::to_string(&oracle_classify(&dt, DEFAULT_BUDGET).unwrap()).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
