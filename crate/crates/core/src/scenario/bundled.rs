use super::ScenarioConfig;

/// Metropolitan Region (Chile) scenario source.
pub const CHILE_SCENARIO: &str = include_str!("../../scenarios/chile.scenario");

/// China scenario source; its rate parameters are placeholders.
pub const CHINA_SCENARIO: &str = include_str!("../../scenarios/china.scenario");

pub fn chile_config() -> ScenarioConfig {
    ScenarioConfig::parse(CHILE_SCENARIO).expect("bundled Chile scenario parses")
}

/// Parses but does not validate: building it fails until the placeholder
/// parameters are filled in.
pub fn china_config() -> ScenarioConfig {
    ScenarioConfig::parse(CHINA_SCENARIO).expect("bundled China scenario parses")
}
