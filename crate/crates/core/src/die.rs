//! The single die as a hidden-measurement machine.
//!
//! A die rests with its upper face pointing along z or x and showing `+` or
//! `−`. Shooting it along the axis its upper face already points to makes it
//! glide: nothing changes and the reading is certain. Shooting it along the
//! other axis makes it roll, and the final upper face is fixed by the impulse
//! `λ`, which the experimenter does not control. Each run selects one
//! deterministic interaction at random, and the spread over `λ` reproduces the
//! Born probabilities of [`crate::hilbert`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Sign, StateVector};
use crate::rng::UniformSource;

pub use crate::hilbert::Axis as RollDirection;

/// Impulses below this value send a rolling die to the `+` face.
pub const ROLL_THRESHOLD: f64 = 0.5;

/// The four preparable configurations of a die on the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DieState {
    #[serde(rename = "+z")]
    PlusZ,
    #[serde(rename = "-z")]
    MinusZ,
    #[serde(rename = "+x")]
    PlusX,
    #[serde(rename = "-x")]
    MinusX,
}

impl DieState {
    pub const ALL: [DieState; 4] = [
        DieState::PlusZ,
        DieState::MinusZ,
        DieState::PlusX,
        DieState::MinusX,
    ];

    pub fn new(axis: RollDirection, sign: Sign) -> Self {
        match (axis, sign) {
            (RollDirection::Z, Sign::Plus) => DieState::PlusZ,
            (RollDirection::Z, Sign::Minus) => DieState::MinusZ,
            (RollDirection::X, Sign::Plus) => DieState::PlusX,
            (RollDirection::X, Sign::Minus) => DieState::MinusX,
        }
    }

    /// Axis the upper face points along.
    pub fn axis(self) -> RollDirection {
        match self {
            DieState::PlusZ | DieState::MinusZ => RollDirection::Z,
            DieState::PlusX | DieState::MinusX => RollDirection::X,
        }
    }

    /// Symbol on the upper face.
    pub fn sign(self) -> Sign {
        match self {
            DieState::PlusZ | DieState::PlusX => Sign::Plus,
            DieState::MinusZ | DieState::MinusX => Sign::Minus,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            DieState::PlusZ => "+z",
            DieState::MinusZ => "-z",
            DieState::PlusX => "+x",
            DieState::MinusX => "-x",
        }
    }

    /// Ket label, e.g. `|+⟩_x`.
    pub fn ket(self) -> String {
        format!("|{}⟩_{}", if self.sign() == Sign::Plus { "+" } else { "−" }, self.axis())
    }
}

impl fmt::Display for DieState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for DieState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        DieState::ALL
            .into_iter()
            .find(|d| d.token().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown die state `{s}` (expected one of +z, -z, +x, -x)"))
    }
}

/// The shooter's impulse, `λ ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HiddenVariable(f64);

impl HiddenVariable {
    pub fn new(lambda: f64) -> Result<Self> {
        if (0.0..1.0).contains(&lambda) {
            Ok(HiddenVariable(lambda))
        } else {
            Err(Error::LambdaOutOfRange(lambda))
        }
    }

    pub fn lambda(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RollOutcome {
    pub reading: Sign,
    pub final_state: DieState,
}

/// Outcome of one roll given the impulse.
///
/// Gliding (upper face already along `dir`) leaves the die untouched. Rolling
/// lands on the `+` face iff `λ < 1/2`.
pub fn deterministic_roll(state: DieState, dir: RollDirection, h: HiddenVariable) -> RollOutcome {
    if state.axis() == dir {
        return RollOutcome {
            reading: state.sign(),
            final_state: state,
        };
    }
    let reading = if h.lambda() < ROLL_THRESHOLD {
        Sign::Plus
    } else {
        Sign::Minus
    };
    RollOutcome {
        reading,
        final_state: DieState::new(dir, reading),
    }
}

/// Draws one impulse from `rng` and rolls. Always consumes exactly one draw.
pub fn sample_roll<R>(state: DieState, dir: RollDirection, rng: &mut R) -> RollOutcome
where
    R: UniformSource + ?Sized,
{
    let lambda = rng.next_uniform();
    let h = HiddenVariable::new(lambda).expect("uniform source produced a draw outside [0, 1)");
    deterministic_roll(state, dir, h)
}

pub fn state_vector_of(state: DieState) -> StateVector {
    StateVector::eigenstate(state.axis(), state.sign())
}

/// Lebesgue measure of the impulses that produce `reading`, in closed form.
pub fn hidden_measurement_probability(state: DieState, dir: RollDirection, reading: Sign) -> f64 {
    if state.axis() == dir {
        if reading == state.sign() {
            1.0
        } else {
            0.0
        }
    } else {
        match reading {
            Sign::Plus => ROLL_THRESHOLD,
            Sign::Minus => 1.0 - ROLL_THRESHOLD,
        }
    }
}

/// Fraction of the grid `λ_k = k/points`, `k = 0..points`, that produces `reading`.
pub fn lambda_grid_measure(state: DieState, dir: RollDirection, reading: Sign, points: u32) -> f64 {
    assert!(points > 0, "grid needs at least one point");
    let hits = (0..points)
        .filter(|&k| {
            let h = HiddenVariable(f64::from(k) / f64::from(points));
            deterministic_roll(state, dir, h).reading == reading
        })
        .count();
    hits as f64 / f64::from(points)
}

/// Observes the face that is already up, without shooting.
pub fn read_upper_face(state: DieState) -> Sign {
    state.sign()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{born_probability, projector_for, TOLERANCE};
    use crate::rng::derive_substream;

    fn lambda(v: f64) -> HiddenVariable {
        HiddenVariable::new(v).unwrap()
    }

    #[test]
    fn roll_examples() {
        assert_eq!(
            deterministic_roll(DieState::PlusZ, RollDirection::Z, lambda(0.73)),
            RollOutcome { reading: Sign::Plus, final_state: DieState::PlusZ }
        );
        assert_eq!(
            deterministic_roll(DieState::PlusX, RollDirection::Z, lambda(0.2)),
            RollOutcome { reading: Sign::Plus, final_state: DieState::PlusZ }
        );
        assert_eq!(
            deterministic_roll(DieState::PlusX, RollDirection::Z, lambda(0.9)),
            RollOutcome { reading: Sign::Minus, final_state: DieState::MinusZ }
        );
        // Tie goes to the minus branch.
        assert_eq!(
            deterministic_roll(DieState::MinusX, RollDirection::Z, lambda(0.5)).reading,
            Sign::Minus
        );
    }

    #[test]
    fn hidden_variable_range() {
        assert!(HiddenVariable::new(0.0).is_ok());
        assert!(HiddenVariable::new(1.0).is_err());
        assert!(HiddenVariable::new(-0.1).is_err());
        assert!(HiddenVariable::new(f64::NAN).is_err());
    }

    #[test]
    fn glide_law_and_eigenstate_closure() {
        for state in DieState::ALL {
            for dir in RollDirection::ALL {
                for v in [0.0, 0.25, 0.5, 0.999] {
                    let out = deterministic_roll(state, dir, lambda(v));
                    assert_eq!(out.final_state == state, state.axis() == dir);
                    assert_eq!(out.final_state.axis(), dir);
                    assert_eq!(out.reading, out.final_state.sign());
                }
            }
        }
    }

    #[test]
    fn state_vectors() {
        assert_eq!(state_vector_of(DieState::PlusZ).components(), [1.0, 0.0]);
        let mx = state_vector_of(DieState::MinusX).components();
        assert!((mx[0] - 0.5_f64.sqrt()).abs() < TOLERANCE);
        assert!((mx[1] + 0.5_f64.sqrt()).abs() < TOLERANCE);
        for s in DieState::ALL {
            assert!((state_vector_of(s).norm() - 1.0).abs() < TOLERANCE);
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(hidden_measurement_probability(DieState::PlusZ, RollDirection::Z, Sign::Plus), 1.0);
        assert_eq!(hidden_measurement_probability(DieState::PlusX, RollDirection::Z, Sign::Minus), 0.5);
        assert_eq!(hidden_measurement_probability(DieState::PlusZ, RollDirection::Z, Sign::Minus), 0.0);
    }

    #[test]
    fn closed_form_matches_born_rule_on_every_cell() {
        for state in DieState::ALL {
            for dir in RollDirection::ALL {
                for reading in Sign::ALL {
                    let measure = hidden_measurement_probability(state, dir, reading);
                    let born = born_probability(&state_vector_of(state), &projector_for(dir, reading));
                    assert!((measure - born).abs() < TOLERANCE, "{state} {dir} {reading}");
                    let grid = lambda_grid_measure(state, dir, reading, 10_000);
                    assert!((grid - measure).abs() < 1e-3);
                }
            }
        }
    }

    #[test]
    fn sampling_consumes_one_draw_and_replays() {
        let mut a = derive_substream(9, 0);
        let mut b = derive_substream(9, 0);
        let left: Vec<_> = (0..500).map(|_| sample_roll(DieState::PlusX, RollDirection::Z, &mut a)).collect();
        let right: Vec<_> = (0..500).map(|_| sample_roll(DieState::PlusX, RollDirection::Z, &mut b)).collect();
        assert_eq!(left, right);

        let mut glide = derive_substream(9, 0);
        let mut reference = derive_substream(9, 0);
        sample_roll(DieState::PlusZ, RollDirection::Z, &mut glide);
        reference.next_uniform();
        assert_eq!(glide.next_uniform(), reference.next_uniform());
    }

    #[test]
    fn eigenstate_sampling_is_certain() {
        let mut rng = derive_substream(1, 2);
        for _ in 0..1000 {
            let out = sample_roll(DieState::PlusZ, RollDirection::Z, &mut rng);
            assert_eq!(out.reading, Sign::Plus);
            assert_eq!(out.final_state, DieState::PlusZ);
        }
    }

    #[test]
    fn superposition_frequency_within_three_sigma() {
        let n = 100_000;
        let mut rng = derive_substream(2024, 0);
        let plus = (0..n)
            .filter(|_| sample_roll(DieState::PlusX, RollDirection::Z, &mut rng).reading == Sign::Plus)
            .count();
        let p_hat = plus as f64 / n as f64;
        let bound = 3.0 * (0.25 / n as f64).sqrt();
        assert!((p_hat - 0.5).abs() <= bound, "{p_hat}");
    }

    #[test]
    fn upper_face_reading_is_passive() {
        assert_eq!(read_upper_face(DieState::PlusZ), Sign::Plus);
        assert_eq!(read_upper_face(DieState::MinusX), Sign::Minus);
        let s = DieState::PlusX;
        assert_eq!(read_upper_face(s), read_upper_face(s));
        assert_eq!(s, DieState::PlusX);
    }

    #[test]
    fn tokens_parse() {
        for s in DieState::ALL {
            assert_eq!(s.token().parse::<DieState>().unwrap(), s);
        }
        assert!("+y".parse::<DieState>().is_err());
        assert_eq!(serde_json::to_string(&DieState::MinusX).unwrap(), "\"-x\"");
    }
}
