use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("{labels} labels given for a {points}-point space")]
    LabelCount { labels: usize, points: usize },
    #[error("{what} has {n} points; dense storage is capped at {cap}")]
    TooLarge { what: &'static str, n: usize, cap: usize },
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("edge {edge} ({u}, {v}) is invalid: {reason}")]
    InvalidEdge {
        edge: usize,
        u: usize,
        v: usize,
        reason: &'static str,
    },
    #[error("graph is disconnected: `{a}` and `{b}` lie in different components")]
    Disconnected { a: String, b: String },
    #[error("map is not short at ({i}, {j}): image distance {image} > source distance {base}")]
    NotShort { i: usize, j: usize, image: f64, base: f64 },
    #[error("correspondence does not cover the spaces (uncovered left {left:?}, right {right:?})")]
    NotCovering { left: Vec<usize>, right: Vec<usize> },
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("ε schedule must be strictly decreasing with at least {min_len} entries")]
    BadSchedule { min_len: usize },
    #[error("scale ε = {eps} is below the smallest positive distance {min_distance}; the sample cannot resolve it")]
    ScaleUnresolved { eps: f64, min_distance: f64 },
    #[error("monotonicity violated for pair ({i}, {j}): {coarse} at the coarser scale, {fine} at ε = {eps}")]
    NotMonotone {
        i: usize,
        j: usize,
        eps: f64,
        coarse: f64,
        fine: f64,
    },
    #[error("exact packing is capped at {cap} points (got {n}); use greedy mode")]
    PackCap { n: usize, cap: usize },
    #[error("target dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("maps differ by {distance} ≥ δ = {delta} at point {point}")]
    MapsTooFar { point: usize, distance: f64, delta: f64 },
    #[error("map has {got} points, expected {expected}")]
    MapSize { got: usize, expected: usize },
    #[error("levels out of order: m = {m} < n = {n}")]
    LevelOrder { m: usize, n: usize },
    #[error("level {level} does not exist (system has {levels})")]
    NoSuchLevel { level: usize, levels: usize },
    #[error("bonding map {level} is not short at ({i}, {j}): {image} > {base}")]
    BondingNotShort {
        level: usize,
        i: usize,
        j: usize,
        image: f64,
        base: f64,
    },
    #[error("schedule violated at level {level}: {reason} ({value} vs bound {bound})")]
    ScheduleViolation {
        level: usize,
        reason: &'static str,
        value: f64,
        bound: f64,
    },
    #[error("domain of length {given} is too short; the crooked pattern needs {required}")]
    DomainTooShort { given: f64, required: f64 },
    #[error("map at level {level} is not {eps}-crooked (worst defect {defect})")]
    NotCrooked { level: usize, eps: f64, defect: f64 },
    #[error("level {level} would need {needed} vertices, over the budget of {budget}")]
    Intractable { level: usize, needed: f64, budget: usize },
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
}
