//! Two dice joined by a rod, and the CHSH quantity of their coincidence
//! experiments.
//!
//! Each player either shoots an x-roll and reads the upper face (`Roll`) or
//! checks whether the x-facing face is flat (`FlatCheck`). A joint roll turns
//! the pair over as one piece and creates anti-correlated faces. A single roll
//! knocks the rod off and every single-die experiment then reads `+1`. The
//! outcome tables are encoded directly.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::die::{read_upper_face, DieState};
use crate::error::{Error, Result};
use crate::hilbert::{Sign, TOLERANCE};
use crate::rng::UniformSource;

/// Bound obeyed by every local model.
pub const LOCAL_BOUND: f64 = 2.0;
/// Largest value any CHSH quantity can take.
pub const ALGEBRAIC_MAX: f64 = 4.0;

/// Largest CHSH value reachable with Hilbert-space observables, `2√2`.
pub fn tsirelson_bound() -> f64 {
    2.0 * std::f64::consts::SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentChoice {
    /// x-roll, then read the upper face (`e_a`, `e_b`).
    Roll,
    /// Inspect the x-facing face for flatness (`e_a'`, `e_b'`).
    FlatCheck,
}

impl fmt::Display for ExperimentChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentChoice::Roll => "roll",
            ExperimentChoice::FlatCheck => "flat-check",
        })
    }
}

/// The four coincidence experiments, in CHSH order: `ab`, `ab'`, `a'b`, `a'b'`.
pub const CHSH_PAIRS: [(ExperimentChoice, ExperimentChoice); 4] = [
    (ExperimentChoice::Roll, ExperimentChoice::Roll),
    (ExperimentChoice::Roll, ExperimentChoice::FlatCheck),
    (ExperimentChoice::FlatCheck, ExperimentChoice::Roll),
    (ExperimentChoice::FlatCheck, ExperimentChoice::FlatCheck),
];

/// Short label for a CHSH pair, e.g. `ab'`.
pub fn pair_label(a: ExperimentChoice, b: ExperimentChoice) -> &'static str {
    match (a, b) {
        (ExperimentChoice::Roll, ExperimentChoice::Roll) => "ab",
        (ExperimentChoice::Roll, ExperimentChoice::FlatCheck) => "ab'",
        (ExperimentChoice::FlatCheck, ExperimentChoice::Roll) => "a'b",
        (ExperimentChoice::FlatCheck, ExperimentChoice::FlatCheck) => "a'b'",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointOutcome {
    pub o_a: Sign,
    pub o_b: Sign,
}

impl JointOutcome {
    pub const ALL: [JointOutcome; 4] = [
        JointOutcome { o_a: Sign::Plus, o_b: Sign::Plus },
        JointOutcome { o_a: Sign::Plus, o_b: Sign::Minus },
        JointOutcome { o_a: Sign::Minus, o_b: Sign::Plus },
        JointOutcome { o_a: Sign::Minus, o_b: Sign::Minus },
    ];

    pub fn new(o_a: Sign, o_b: Sign) -> Self {
        JointOutcome { o_a, o_b }
    }

    pub fn product(self) -> i8 {
        self.o_a.value() * self.o_b.value()
    }

    fn index(self) -> usize {
        match (self.o_a, self.o_b) {
            (Sign::Plus, Sign::Plus) => 0,
            (Sign::Plus, Sign::Minus) => 1,
            (Sign::Minus, Sign::Plus) => 2,
            (Sign::Minus, Sign::Minus) => 3,
        }
    }
}

impl fmt::Display for JointOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.o_a, self.o_b)
    }
}

/// Probabilities of the four joint outcomes, stored in [`JointOutcome::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    probabilities: [f64; 4],
}

impl OutcomeDistribution {
    pub fn new(probabilities: [f64; 4]) -> Result<Self> {
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidDistribution(format!("probability {p} outside [0, 1]")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > TOLERANCE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(OutcomeDistribution { probabilities })
    }

    pub fn point(outcome: JointOutcome) -> Self {
        let mut probabilities = [0.0; 4];
        probabilities[outcome.index()] = 1.0;
        OutcomeDistribution { probabilities }
    }

    pub fn get(&self, outcome: JointOutcome) -> f64 {
        self.probabilities[outcome.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (JointOutcome, f64)> + '_ {
        JointOutcome::ALL.into_iter().zip(self.probabilities)
    }

    pub fn is_point_mass(&self) -> bool {
        self.probabilities.contains(&1.0)
    }

    /// Marginal distribution of player A's reading.
    pub fn marginal_a(&self, reading: Sign) -> f64 {
        self.iter().filter(|(o, _)| o.o_a == reading).map(|(_, p)| p).sum()
    }

    pub fn marginal_b(&self, reading: Sign) -> f64 {
        self.iter().filter(|(o, _)| o.o_b == reading).map(|(_, p)| p).sum()
    }

    /// Inverse-CDF draw over [`JointOutcome::ALL`]; consumes one uniform.
    pub fn sample<R: UniformSource + ?Sized>(&self, rng: &mut R) -> JointOutcome {
        let u = rng.next_uniform();
        let mut cumulative = 0.0;
        for (outcome, p) in self.iter() {
            cumulative += p;
            if u < cumulative {
                return outcome;
            }
        }
        // u fell in the rounding gap below 1.0
        self.iter()
            .filter(|(_, p)| *p > 0.0)
            .last()
            .map(|(o, _)| o)
            .expect("a valid distribution has positive mass")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RodState {
    Connected,
    Detached,
}

/// The four correlation functions and `I = |E_ab − E_ab'| + |E_a'b' + E_a'b|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshReport {
    pub e_ab: f64,
    pub e_ab_prime: f64,
    pub e_aprime_b: f64,
    pub e_aprime_bprime: f64,
    pub i_value: f64,
}

impl ChshReport {
    pub fn from_expectations(e_ab: f64, e_ab_prime: f64, e_aprime_b: f64, e_aprime_bprime: f64) -> Self {
        ChshReport {
            e_ab,
            e_ab_prime,
            e_aprime_b,
            e_aprime_bprime,
            i_value: (e_ab - e_ab_prime).abs() + (e_aprime_bprime + e_aprime_b).abs(),
        }
    }

    /// Expectations in [`CHSH_PAIRS`] order.
    pub fn expectations(&self) -> [f64; 4] {
        [self.e_ab, self.e_ab_prime, self.e_aprime_b, self.e_aprime_bprime]
    }

    pub fn violates_local_bound(&self) -> bool {
        self.i_value > LOCAL_BOUND + TOLERANCE
    }
}

pub fn coincidence_distribution(choice_a: ExperimentChoice, choice_b: ExperimentChoice) -> OutcomeDistribution {
    match (choice_a, choice_b) {
        (ExperimentChoice::Roll, ExperimentChoice::Roll) => OutcomeDistribution {
            probabilities: [0.0, 0.5, 0.5, 0.0],
        },
        _ => OutcomeDistribution::point(JointOutcome::new(Sign::Plus, Sign::Plus)),
    }
}

/// The rod falls off iff exactly one player shoots.
pub fn rod_after(choice_a: ExperimentChoice, choice_b: ExperimentChoice) -> RodState {
    if (choice_a == ExperimentChoice::Roll) != (choice_b == ExperimentChoice::Roll) {
        RodState::Detached
    } else {
        RodState::Connected
    }
}

pub fn sample_coincidence<R>(
    choice_a: ExperimentChoice,
    choice_b: ExperimentChoice,
    rng: &mut R,
) -> (JointOutcome, RodState)
where
    R: UniformSource + ?Sized,
{
    let outcome = coincidence_distribution(choice_a, choice_b).sample(rng);
    (outcome, rod_after(choice_a, choice_b))
}

/// `Σ P(o_a, o_b) · o_a · o_b`
pub fn expectation_of(dist: &OutcomeDistribution) -> f64 {
    dist.iter().map(|(o, p)| p * f64::from(o.product())).sum()
}

pub fn chsh_value<F>(mut dist_source: F) -> Result<ChshReport>
where
    F: FnMut(ExperimentChoice, ExperimentChoice) -> Result<OutcomeDistribution>,
{
    let mut e = [0.0; 4];
    for (slot, (a, b)) in e.iter_mut().zip(CHSH_PAIRS) {
        *slot = expectation_of(&dist_source(a, b)?);
    }
    Ok(ChshReport::from_expectations(e[0], e[1], e[2], e[3]))
}

/// Outcome table when `Roll` is replaced by reading the face already up.
///
/// Nothing is rolled, so no correlation is created: every pair is a point
/// mass on pre-existing values.
pub fn discovery_variant_distribution(
    prepared: (DieState, DieState),
    choice_a: ExperimentChoice,
    choice_b: ExperimentChoice,
) -> OutcomeDistribution {
    let read = |choice, die| match choice {
        ExperimentChoice::Roll => read_upper_face(die),
        ExperimentChoice::FlatCheck => Sign::Plus,
    };
    OutcomeDistribution::point(JointOutcome::new(
        read(choice_a, prepared.0),
        read(choice_b, prepared.1),
    ))
}

/// Pre-existing values `(o_a, o_a', o_b, o_b')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeterministicAssignment {
    pub o_a: Sign,
    pub o_a_prime: Sign,
    pub o_b: Sign,
    pub o_b_prime: Sign,
}

impl DeterministicAssignment {
    /// All 16 assignments, enumerated in binary order with `+` before `−`.
    pub fn all() -> Vec<DeterministicAssignment> {
        (0u8..16)
            .map(|bits| {
                let s = |k: u8| if bits >> (3 - k) & 1 == 0 { Sign::Plus } else { Sign::Minus };
                DeterministicAssignment {
                    o_a: s(0),
                    o_a_prime: s(1),
                    o_b: s(2),
                    o_b_prime: s(3),
                }
            })
            .collect()
    }

    pub fn chsh(&self) -> ChshReport {
        let p = |x: Sign, y: Sign| x.as_f64() * y.as_f64();
        ChshReport::from_expectations(
            p(self.o_a, self.o_b),
            p(self.o_a, self.o_b_prime),
            p(self.o_a_prime, self.o_b),
            p(self.o_a_prime, self.o_b_prime),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicChshSummary {
    pub min_i: f64,
    pub max_i: f64,
    pub count: usize,
}

/// Exhausts every deterministic local assignment.
pub fn enumerate_deterministic_chsh() -> DeterministicChshSummary {
    let values: Vec<f64> = DeterministicAssignment::all().iter().map(|a| a.chsh().i_value).collect();
    DeterministicChshSummary {
        min_i: values.iter().copied().fold(f64::INFINITY, f64::min),
        max_i: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        count: values.len(),
    }
}

/// CHSH report of a convex mixture of the 16 deterministic assignments.
///
/// `weights` are normalized internally; they must be non-negative with a
/// positive sum.
pub fn mixture_chsh(weights: &[f64; 16]) -> Result<ChshReport> {
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || total <= 0.0 {
        return Err(Error::InvalidDistribution("mixture weights must be non-negative with positive sum".into()));
    }
    let mut e = [0.0; 4];
    for (w, a) in weights.iter().zip(DeterministicAssignment::all()) {
        for (slot, v) in e.iter_mut().zip(a.chsh().expectations()) {
            *slot += w / total * v;
        }
    }
    Ok(ChshReport::from_expectations(e[0], e[1], e[2], e[3]))
}
