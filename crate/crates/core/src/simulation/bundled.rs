//! Scenario scripts shipped with the crate.

use super::script::{parse_scenario, ScenarioScript};

/// `(name, JSON source)` for every bundled scenario.
pub const SCENARIOS: [(&str, &str); 6] = [
    ("ride_service", include_str!("../../scenarios/ride_service.json")),
    ("maintenance_timeout", include_str!("../../scenarios/maintenance_timeout.json")),
    ("reward_transport", include_str!("../../scenarios/reward_transport.json")),
    ("escrow_dispute", include_str!("../../scenarios/escrow_dispute.json")),
    ("chess_bet", include_str!("../../scenarios/chess_bet.json")),
    ("fridge_commitment", include_str!("../../scenarios/fridge_commitment.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SCENARIOS.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Option<ScenarioScript> {
    source(name).map(|s| parse_scenario(s).expect("bundled scenarios parse"))
}

pub fn all() -> Vec<ScenarioScript> {
    names().map(|n| load(n).expect("listed")).collect()
}
