#![allow(dead_code)]

use dvqe::{QuboProblem, UcInstance};

pub const EXAMPLES: [&str; 5] = [
    include_str!("../../data/example1.json"),
    include_str!("../../data/example2.json"),
    include_str!("../../data/example3.json"),
    include_str!("../../data/example4.json"),
    include_str!("../../data/example5.json"),
];

pub const SCENARIOS: [&str; 3] = [
    include_str!("../../data/uc_scenario1.json"),
    include_str!("../../data/uc_scenario2.json"),
    include_str!("../../data/uc_scenario3.json"),
];

/// QPU layouts used for the unit-commitment scenarios.
pub const SCENARIO_QPUS: [&[usize]; 3] = [&[3, 1, 1], &[4, 1, 1], &[4, 3, 1]];

pub fn example(i: usize) -> QuboProblem {
    QuboProblem::from_json(EXAMPLES[i - 1]).unwrap()
}

pub fn scenario(i: usize) -> UcInstance {
    UcInstance::from_json(SCENARIOS[i - 1]).unwrap()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
