use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LanguagePair {
    #[serde(rename = "en-de")]
    EnDe,
    #[serde(rename = "en-zh")]
    EnZh,
}

impl LanguagePair {
    pub fn as_str(self) -> &'static str {
        match self {
            LanguagePair::EnDe => "en-de",
            LanguagePair::EnZh => "en-zh",
        }
    }

    pub fn source_name(self) -> &'static str {
        "English"
    }

    pub fn target_name(self) -> &'static str {
        match self {
            LanguagePair::EnDe => "German",
            LanguagePair::EnZh => "Chinese",
        }
    }

    /// Latency and BLEU are scored per word for German and per character for Chinese.
    pub fn default_unit(self) -> crate::eval::Unit {
        match self {
            LanguagePair::EnDe => crate::eval::Unit::Word,
            LanguagePair::EnZh => crate::eval::Unit::Char,
        }
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguagePair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en-de" => Ok(LanguagePair::EnDe),
            "en-zh" => Ok(LanguagePair::EnZh),
            other => Err(format!("unknown language pair `{other}` (expected en-de or en-zh)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatencyRegime {
    Low,
    High,
}

impl LatencyRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            LatencyRegime::Low => "low",
            LatencyRegime::High => "high",
        }
    }
}

impl FromStr for LatencyRegime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(LatencyRegime::Low),
            "high" => Ok(LatencyRegime::High),
            other => Err(format!("unknown latency regime `{other}` (expected low or high)")),
        }
    }
}

/// StreamLAAL ceiling of a latency regime, in milliseconds.
pub fn regime_threshold_ms(pair: LanguagePair, regime: LatencyRegime) -> u64 {
    match (pair, regime) {
        (LanguagePair::EnDe, LatencyRegime::Low) => 2000,
        (LanguagePair::EnZh, LatencyRegime::Low) => 2500,
        (_, LatencyRegime::High) => 4000,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyRegimeConfig {
    pub language_pair: LanguagePair,
    pub regime: LatencyRegime,
    pub threshold_ms: u64,
}

impl LatencyRegimeConfig {
    pub fn new(language_pair: LanguagePair, regime: LatencyRegime) -> Self {
        Self {
            language_pair,
            regime,
            threshold_ms: regime_threshold_ms(language_pair, regime),
        }
    }

    pub fn admits(&self, stream_laal_ms: f64) -> bool {
        stream_laal_ms <= self.threshold_ms as f64
    }
}
