//! Analytic tables and the λ-measure versus Born-rule cross-check.

use serde::Serialize;

use crate::die::{hidden_measurement_probability, lambda_grid_measure, state_vector_of, DieState, RollDirection};
use crate::hilbert::{born_probability, projector_for, Sign, TOLERANCE};

pub const GRID_POINTS: u32 = 1_000_000;
pub const GRID_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BornEntry {
    pub state: DieState,
    pub direction: RollDirection,
    pub reading: Sign,
    pub probability: f64,
}

impl BornEntry {
    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.state, self.direction, self.reading)
    }
}

/// Every (state, direction, reading) cell, in state-major order.
pub fn cells() -> impl Iterator<Item = (DieState, RollDirection, Sign)> {
    DieState::ALL.into_iter().flat_map(|s| {
        RollDirection::ALL
            .into_iter()
            .flat_map(move |d| Sign::ALL.into_iter().map(move |r| (s, d, r)))
    })
}

/// `⟨ψ|P_{d,r}|ψ⟩` for every cell.
pub fn born_table() -> Vec<BornEntry> {
    cells()
        .map(|(state, direction, reading)| BornEntry {
            state,
            direction,
            reading,
            probability: born_probability(&state_vector_of(state), &projector_for(direction, reading)),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCell {
    pub state: DieState,
    pub direction: RollDirection,
    pub reading: Sign,
    pub closed_form: f64,
    pub born: f64,
    pub grid: f64,
    pub pass: bool,
}

/// Compares the closed-form λ-measure with the Born rule (to [`TOLERANCE`])
/// and with a `grid_points` sweep of λ (to [`GRID_TOLERANCE`]).
pub fn oracle_sweep(grid_points: u32) -> Vec<OracleCell> {
    cells()
        .map(|(state, direction, reading)| {
            let closed_form = hidden_measurement_probability(state, direction, reading);
            let born = born_probability(&state_vector_of(state), &projector_for(direction, reading));
            let grid = lambda_grid_measure(state, direction, reading, grid_points);
            OracleCell {
                state,
                direction,
                reading,
                closed_form,
                born,
                grid,
                pass: (closed_form - born).abs() <= TOLERANCE && (grid - closed_form).abs() <= GRID_TOLERANCE,
            }
        })
        .collect()
}
