use std::path::Path;

use refswarm::swarm::{BlackoutConfig, SwarmConfig};
use serde::Deserialize;

/// Contents of a `--config` TOML file. Every key is optional; command-line
/// flags override whatever is set here.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub swarm: SwarmConfig,
    pub blackout: BlackoutConfig,
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub alpha: Option<f64>,
    pub exclude_authors: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use refswarm::swarm::Mode;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: FileConfig = toml::from_str(
            r#"
            threads = 3
            [swarm]
            decay = 0.2
            mode = "expectation"
            [blackout]
            enabled = true
            [evaluate]
            alpha = 0.01
            "#,
        )
        .unwrap();
        assert_eq!(cfg.threads, Some(3));
        assert_eq!(cfg.swarm.decay, 0.2);
        assert_eq!(cfg.swarm.mode, Mode::Expectation);
        assert_eq!(
            cfg.swarm.particles_per_reference,
            SwarmConfig::default().particles_per_reference
        );
        assert!(cfg.blackout.enabled);
        assert_eq!(cfg.blackout.steps, 2);
        assert_eq!(cfg.evaluate.alpha, Some(0.01));
        assert_eq!(cfg.evaluate.exclude_authors, None);
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(
            toml::from_str::<FileConfig>("").unwrap(),
            FileConfig::default()
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("[swarm]\ndecya = 0.1\n").is_err());
    }
}
