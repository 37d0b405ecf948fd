//! Nonautonomous iterated function systems: map families per generation,
//! words addressing compositions, Bowen metrics, derived systems and factor maps.

mod factor;
mod maps;
mod orbit;
mod schedule;
mod word;

pub use factor::{check_semiconjugacy, FactorMap, Fibers, Projection, SemiconjugacyReport, System};
pub use maps::MapSpec;
pub use orbit::{bowen_distance, compose, sup_bowen_distance, sup_distance_profile, Orbits};
pub use schedule::{Generation, Schedule, ScheduleSpec};
pub use word::{enumerate_words, Word, WordMode, WordSet};

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
