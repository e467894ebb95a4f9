//! Desk-scale instances shared by the integration tests.

#![allow(dead_code)]

use lemip::bfl::{brute_force_oracle, Oracle3SatInstance};
use lemip::fields::{BoolTable, FieldSpec};
use lemip::runtime::{derive_seed, Seeds};
use lemip::zk_protocol::ZkConfig;

pub fn f65521() -> FieldSpec {
    FieldSpec::prime(65521).unwrap()
}

pub fn zk_cfg() -> ZkConfig {
    ZkConfig { field: f65521(), sigma: 8 }
}

pub fn seeds(base: u64, j: u64) -> Seeds {
    Seeds::from_master(derive_seed(base, j))
}

/// r = 1, s = 1: (z1 or t1) and (!b1 or t2 or !t3).
pub fn sat_small() -> Oracle3SatInstance {
    Oracle3SatInstance::new(1, 1, vec![vec![1, 5], vec![-2, 6, -7]]).unwrap()
}

/// r = 2, s = 2, forcing A(b) = b_1 through the first two blocks.
pub fn sat_desk() -> Oracle3SatInstance {
    let clauses = vec![vec![-3, 9], vec![3, -9], vec![-5, 10], vec![5, -10], vec![1, -7, 11]];
    Oracle3SatInstance::new(2, 2, clauses).unwrap()
}

/// r = 0, s = 1: A must be constantly 1 and constantly 0.
pub fn unsat_small() -> Oracle3SatInstance {
    Oracle3SatInstance::new(0, 1, vec![vec![4], vec![-5]]).unwrap()
}

/// r = 1, s = 2: A(b) = b_1 from block one, yet A(b) = 0 whenever b_1 = 1
/// from block two.
pub fn unsat_desk() -> Oracle3SatInstance {
    Oracle3SatInstance::new(1, 2, vec![vec![-2, 8], vec![2, -8], vec![-4, -9]]).unwrap()
}

/// One clause over s = 1: (!b1 or t1), so A(1) = 1.
pub fn one_clause() -> Oracle3SatInstance {
    Oracle3SatInstance::new(0, 1, vec![vec![-1, 4]]).unwrap()
}

pub fn witness(inst: &Oracle3SatInstance) -> BoolTable {
    brute_force_oracle(inst).unwrap().expect("satisfiable")
}

pub fn satisfiable() -> Vec<(&'static str, Oracle3SatInstance)> {
    vec![("sat-small", sat_small()), ("sat-desk", sat_desk())]
}

pub fn unsatisfiable() -> Vec<(&'static str, Oracle3SatInstance)> {
    vec![("unsat-small", unsat_small()), ("unsat-desk", unsat_desk())]
}
