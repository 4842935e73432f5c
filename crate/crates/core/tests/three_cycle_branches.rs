//! One case per branch of the three-cycle construction: a single or several
//! non-trivial cycles in `D2`, smallest such cycle of length 2 or more, and
//! `D1` with or without fixed points.

mod common;

use branchcov::group::{GeneratedGroup, Primitivity};
use branchcov::realization::{construct_three_cycle_product, omega_from_three_cycles};
use common::*;

fn case(d: usize, d1: &[usize], d2: &[usize], y: usize) {
    let dt = datum(d, &[d1, d2]);
    assert_eq!(dt.partitions()[0], part(d1), "first partition must have the larger defect");
    check_three_cycle(&dt, y).unwrap();
    let (a, b) = construct_three_cycle_product(&part(d1), &part(d2), y).unwrap();
    let w = omega_from_three_cycles(&a.compose(&b).unwrap(), y).unwrap();
    let g = GeneratedGroup::new(vec![a, b, w]).unwrap();
    assert_eq!(g.is_primitive().unwrap(), Primitivity::Primitive);
}

#[test]
fn single_cycle_with_fixed_points() {
    case(9, &[6, 1, 1, 1], &[4, 1, 1, 1, 1, 1], 1);
}

#[test]
fn single_transposition_without_fixed_points() {
    case(9, &[5, 4], &[2, 1, 1, 1, 1, 1, 1, 1], 4);
}

#[test]
fn several_cycles_ending_in_transposition_with_fixed_points() {
    case(9, &[5, 1, 1, 1, 1], &[4, 2, 1, 1, 1], 1);
}

#[test]
fn several_long_cycles_with_fixed_points() {
    case(9, &[5, 1, 1, 1, 1], &[3, 3, 1, 1, 1], 1);
}

#[test]
fn several_cycles_ending_in_transposition_without_fixed_points() {
    case(15, &[5, 4, 2, 2, 2], &[4, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1], 2);
}

#[test]
fn several_long_cycles_without_fixed_points() {
    case(15, &[5, 4, 2, 2, 2], &[3, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1], 2);
}

#[test]
fn rejects_y_without_larger_part() {
    assert!(construct_three_cycle_product(&part(&[3, 3, 3]), &part(&[3, 1, 1, 1, 1, 1, 1]), 3).is_err());
    assert!(construct_three_cycle_product(&part(&[2, 2, 2, 2, 1]), &part(&[2, 2, 2, 2, 1]), 1).is_err());
}
