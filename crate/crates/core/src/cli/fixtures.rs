//! The gallery of versioned fixtures shipped with the binary.

use serde::Deserialize;

use super::config::{parse, ConfigError, ExperimentConfig};

pub const FIXTURE_VERSION: u32 = 1;

const SOURCES: [(&str, &str); 4] = [
    ("c0_partial_sums", include_str!("../../fixtures/c0_partial_sums.json")),
    ("c0_averaging", include_str!("../../fixtures/c0_averaging.json")),
    ("polya_urn", include_str!("../../fixtures/polya_urn.json")),
    ("dyadic_closed_martingale", include_str!("../../fixtures/dyadic_closed_martingale.json")),
];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub version: u32,
    pub name: String,
    pub description: String,
    pub experiment: ExperimentConfig,
}

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Result<Fixture, ConfigError> {
    let text = source(name).ok_or_else(|| {
        ConfigError::new("", format!("unknown fixture {name:?}; known: {}", names().collect::<Vec<_>>().join(", ")))
    })?;
    let fixture: Fixture = parse(text).map_err(|e| ConfigError::new(format!("fixture {name}: {}", e.path), e.message))?;
    if fixture.version != FIXTURE_VERSION {
        return Err(ConfigError::new("", format!("fixture {name} has version {}", fixture.version)));
    }
    Ok(fixture)
}
