//! Shared fixtures for the criterion benches: representative problems at
//! qubit and qutrit scale so the benched paths match real usage.

use thermch::exemplars::{average_energy_problem, replacer_problem};
use thermch::maxent::MaxEntProblem;
use thermch::qcore::random_channel;
use thermch::{ChoiMatrix, HermitianOperator};

/// A one-constraint qubit replacer problem with an interior target.
pub fn qubit_replacer() -> MaxEntProblem {
    let h = HermitianOperator::from_real_diag(&[0.0, 1.0]);
    replacer_problem(&h, 0.3)
}

/// The qutrit average-energy problem, the heaviest exemplar in the suite.
pub fn qutrit_average_energy() -> MaxEntProblem {
    let h = HermitianOperator::from_real_diag(&[0.0, 1.0, 2.0]);
    average_energy_problem(&h)
}

/// A reproducible random qubit channel for the entropy benches.
pub fn random_qubit_channel() -> ChoiMatrix {
    random_channel(42, 2, 2).expect("random channel generation succeeds")
}
