//! Decides which kinds of realization a minimal-defect datum admits, and
//! cross-checks those decisions against the exhaustive oracle.

use serde::Serialize;

use crate::error::Result;
use crate::oracle::{oracle_classify, OracleResult};
use crate::partition::{
    algebraic_factorizations, enumerate_minimal_data, has_decomposable_realization, is_prime, BranchDatum,
    Factorization,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// `{[d]}`: indecomposable exactly when `d` is prime.
    OnePointPrime,
    /// Two partitions: indecomposable iff both gcds are 1 and the datum is
    /// not `{[2,…,2,1], [2,…,2,1]}`.
    ThmIff2pt,
    /// Three or more partitions: indecomposable iff every gcd is 1.
    ThmFinal,
    /// Prime degree: every transitive group is primitive.
    PrimeDegreeTrivial,
    /// `{[2,…,2,1], [2,…,2,1]}` at non-prime degree.
    ExcludedPair,
    /// Some partition has gcd greater than 1.
    GcdObstruction,
}

/// Why no decomposable realization exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Absence {
    /// `d` has no proper divisor.
    PrimeDegree,
    /// No common `(u, w)` decomposes every partition.
    NoFactorization,
    /// Factorizations exist but none has a minimal-defect first factor.
    NoMinimalFactor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub indecomposable_realizable: bool,
    pub reason: Reason,
    pub decomposable_realizable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factorization: Option<Factorization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absence: Option<Absence>,
    pub coexistence: bool,
}

pub fn classify(datum: &BranchDatum) -> Result<Classification> {
    datum.require_minimal_defect()?;
    let d = datum.degree();
    let parts = datum.partitions();
    let prime = is_prime(d);
    let (indecomposable, reason) = match datum.k() {
        1 => (prime, Reason::OnePointPrime),
        _ if prime => (true, Reason::PrimeDegreeTrivial),
        2 if parts.iter().any(|p| p.gcd() != 1) => (false, Reason::GcdObstruction),
        2 if parts[0].is_two_two_one() && parts[1].is_two_two_one() => (false, Reason::ExcludedPair),
        2 => (true, Reason::ThmIff2pt),
        _ if parts.iter().any(|p| p.gcd() != 1) => (false, Reason::GcdObstruction),
        _ => (true, Reason::ThmFinal),
    };
    let factorization = has_decomposable_realization(datum)?;
    let decomposable = factorization.is_some();
    let absence = match () {
        _ if decomposable => None,
        _ if prime => Some(Absence::PrimeDegree),
        _ if algebraic_factorizations(datum)?.is_empty() => Some(Absence::NoFactorization),
        _ => Some(Absence::NoMinimalFactor),
    };
    debug_assert!(indecomposable || decomposable, "{datum} admits no realization kind");
    Ok(Classification {
        indecomposable_realizable: indecomposable,
        reason,
        decomposable_realizable: decomposable,
        factorization,
        absence,
        coexistence: indecomposable && decomposable,
    })
}

/// One line of a classification sweep.
#[derive(Clone, Debug, Serialize)]
pub struct DatumReport {
    pub datum: BranchDatum,
    pub classify: Classification,
    pub oracle: OracleResult,
    /// Classifier and oracle agree on both flags. For a partial oracle run
    /// this only means no found witness contradicts the classifier.
    pub agree: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl DatumReport {
    pub fn build(datum: &BranchDatum, budget: u64) -> Result<Self> {
        let classify = classify(datum)?;
        let oracle = oracle_classify(datum, budget)?;
        let agree = if oracle.complete {
            classify.indecomposable_realizable == oracle.has_primitive()
                && classify.decomposable_realizable == oracle.has_imprimitive()
        } else {
            (classify.indecomposable_realizable || !oracle.has_primitive())
                && (classify.decomposable_realizable || !oracle.has_imprimitive())
        };
        let mut notes = Vec::new();
        let parts = datum.partitions();
        if datum.k() == 2 && is_prime(datum.degree()) && parts[0].is_two_two_one() && parts[1].is_two_two_one() {
            notes.push(
                "prime degree: {[2,...,2,1],[2,...,2,1]} has a primitive (dihedral) realization; \
                 the exclusion applies to non-prime d only"
                    .into(),
            );
        }
        if !oracle.complete {
            notes.push(format!("oracle stopped after {} of {} tuples", oracle.tuples_examined, oracle.tuples_total));
        }
        Ok(DatumReport { datum: datum.clone(), classify, oracle, agree, notes })
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DiscrepancyReport {
    pub d: usize,
    pub k: usize,
    pub data: usize,
    pub skipped: usize,
    pub discrepancies: Vec<DatumReport>,
    pub partial: Vec<DatumReport>,
    pub notes: Vec<String>,
}

impl DiscrepancyReport {
    pub fn is_empty(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Compares [`classify`] with the oracle over every minimal datum of
/// degree `d` with `k` partitions, skipping the first `skip`. Each per-datum
/// report is passed to `sink` as it is produced.
pub fn verify_theorems_with(
    d: usize,
    k: usize,
    budget: u64,
    skip: usize,
    mut sink: impl FnMut(&DatumReport),
) -> Result<DiscrepancyReport> {
    let mut report = DiscrepancyReport { d, k, skipped: skip, ..Default::default() };
    for datum in enumerate_minimal_data(d, k)?.skip(skip) {
        let line = DatumReport::build(&datum, budget)?;
        sink(&line);
        report.data += 1;
        report.notes.extend(line.notes.iter().map(|n| format!("{datum}: {n}")));
        if !line.agree {
            report.discrepancies.push(line);
        } else if !line.oracle.complete {
            report.partial.push(line);
        }
    }
    Ok(report)
}

pub fn verify_theorems(d: usize, k: usize, budget: u64) -> Result<DiscrepancyReport> {
    verify_theorems_with(d, k, budget, 0, |_| {})
}
