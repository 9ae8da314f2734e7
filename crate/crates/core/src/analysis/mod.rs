//! Graph analyses over resolved models: change impact, interaction
//! pattern classification and loop facts.

pub mod classify;
pub mod impact;
pub mod loops;

pub use classify::{classify, classify_all, Pattern, PatternClass, PatternRule};
pub use impact::{impact, Direction, ImpactGraph, ImpactReport, Relation};
pub use loops::{loop_facts, LoopExit, LoopFact};
