//! Benchmark fixtures shared by the criterion targets.

use couette::{
    build_initial_state, BoundaryCondition, Grid, InitialConditionSpec, Parameters, State, Stepper,
};

/// Stepper and a mid-transient homogeneous state on `n` cells.
pub fn homogeneous_fixture(n: usize, dt: f64) -> (Stepper, State) {
    let grid = Grid::new(n).expect("grid");
    let bc = BoundaryCondition::new(0.0).expect("bc");
    let state = build_initial_state(&InitialConditionSpec::homogeneous_sine(), &grid, &bc)
        .expect("initial state");
    let stepper = Stepper::new(Parameters::default(), bc, grid, dt).expect("stepper");
    (stepper, state)
}
