//! Realization and decomposability of branch data for branched coverings
//! of the real projective plane by itself.
//!
//! A branch datum of degree `d` is a collection of non-trivial partitions
//! of `d`. It is realized by permutations `a_1, …, a_k` of the given cycle
//! types together with `w` such that `w^2 = a_1 ⋯ a_k` and the group
//! `<a_1, …, a_k, w>` is transitive. The realization is decomposable exactly
//! when that group is imprimitive.

pub mod classify;
pub mod error;
pub mod group;
pub mod oracle;
pub mod partition;
pub mod perm;
pub mod realization;

pub use error::{Error, Result};
pub use group::{BlockSystem, GeneratedGroup, Primitivity, TwoPointVerdict};
pub use partition::{BranchDatum, Factorization, Partition};
pub use perm::Permutation;
