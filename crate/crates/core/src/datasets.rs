//! Small reference datasets bundled with the crate.

/// Air lead concentrations (ug/m^3) measured at 15 laboratory locations.
pub const AIR_LEAD: &[f64] = &[
    200.0, 120.0, 15.0, 7.0, 86.0, 48.0, 61.0, 380.0, 80.0, 29.0, 1000.0, 350.0, 1400.0, 110.0,
    37.0,
];

/// Relative potency (%) of 25 batches from five manufacturing campaigns,
/// listed campaign by campaign.
pub const POTENCY: &[f64] = &[
    95.661, 102.259, 103.135, 99.827, // campaign 1
    98.830, 94.887, 103.362, 94.117, // campaign 2
    96.665, 106.234, 103.735, 104.317, 101.807, // campaign 3
    98.198, 98.186, 107.872, 99.987, 103.051, 106.445, // campaign 4
    95.922, 102.956, 101.596, 96.806, 107.041, 92.589, // campaign 5
];

/// Looks up a bundled dataset by name (`air-lead` or `potency`).
pub fn by_name(name: &str) -> Option<&'static [f64]> {
    match name {
        "air-lead" => Some(AIR_LEAD),
        "potency" => Some(POTENCY),
        _ => None,
    }
}
