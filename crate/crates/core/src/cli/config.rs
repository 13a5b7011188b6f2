use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::params::{ProblemParams, RhoFn};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Game,
    Fairness,
    BetaCurve,
    ForallExhaustive,
    DeciderAccuracy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub metric: String,
    pub c: f64,
    pub r: f64,
    pub queries: u64,
    pub delta: f64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            metric: "hamming".into(),
            c: 2.0,
            r: 2.0,
            queries: 100,
            delta: 1e-3,
        }
    }
}

impl ProblemSection {
    pub fn params(&self) -> Result<ProblemParams> {
        let metric = crate::io::parse_metric(&self.metric)?;
        ProblemParams::new(metric, self.c, self.r, self.queries, self.delta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// Uniform random points.
    Random,
    /// Uniform random points with one point at distance `floor(r)` from a query.
    Planted,
    /// Points read from `path`.
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub source: Source,
    pub n: usize,
    pub dim: usize,
    pub path: Option<PathBuf>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            source: Source::Random,
            n: 256,
            dim: 32,
            path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameSection {
    pub searcher: String,
    pub adversary: String,
    pub games: u64,
    /// Annulus count for the annuli searcher.
    pub annuli_k: usize,
    /// Insert a random point after every this many rounds (0 = never).
    pub insert_every: u64,
    /// Delete the oldest live point after every this many rounds (0 = never).
    pub delete_every: u64,
}

impl Default for GameSection {
    fn default() -> Self {
        Self {
            searcher: "fair".into(),
            adversary: "oblivious-random".into(),
            games: 100,
            annuli_k: 2,
            insert_every: 0,
            delete_every: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FairnessSection {
    pub instances: u64,
    pub ball_sizes: Vec<usize>,
    pub trials: u64,
}

impl Default for FairnessSection {
    fn default() -> Self {
        Self {
            instances: 20,
            ball_sizes: vec![2, 3, 5],
            trials: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetaSection {
    pub c_min: f64,
    pub c_max: f64,
    pub step: f64,
    pub rho: Vec<RhoFn>,
}

impl Default for BetaSection {
    fn default() -> Self {
        Self {
            c_min: 1.5,
            c_max: 20.0,
            step: 0.5,
            rho: RhoFn::ALL.to_vec(),
        }
    }
}

impl BetaSection {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.c_min > 1.0 && self.c_max >= self.c_min && self.step > 0.0) {
            return Err(Error::InvalidParameter(
                "beta range needs 1 < c_min <= c_max and step > 0".into(),
            ));
        }
        let count = ((self.c_max - self.c_min) / self.step + 1e-9).floor() as u64 + 1;
        if count > 1_000_000 {
            return Err(Error::InvalidParameter(format!("beta range has {count} points")));
        }
        Ok((0..count).map(|i| self.c_min + i as f64 * self.step).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForallSection {
    pub dims: Vec<usize>,
    pub n: usize,
    pub builds: u64,
}

impl Default for ForallSection {
    fn default() -> Self {
        Self {
            dims: vec![6, 8],
            n: 32,
            builds: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeciderSection {
    pub games: u64,
    pub adversary: String,
}

impl Default for DeciderSection {
    fn default() -> Self {
        Self {
            games: 1000,
            adversary: "replay-worst".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("robann-out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub game: GameSection,
    #[serde(default)]
    pub fairness: FairnessSection,
    #[serde(default)]
    pub beta: BetaSection,
    #[serde(default)]
    pub forall: ForallSection,
    #[serde(default)]
    pub decider: DeciderSection,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub output: OutputSection,
}

pub const SEARCHERS: [&str; 9] = [
    "fair",
    "classic",
    "classic-single",
    "decider",
    "bucketed",
    "annuli",
    "forall",
    "oracle",
    "bottom",
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self.kind {
            Kind::BetaCurve => {
                self.beta.grid()?;
            }
            _ => {
                self.problem.params()?;
            }
        }
        if self.data.source == Source::File && self.data.path.is_none() {
            return bad("data.path is required when data.source = \"file\"".into());
        }
        if self.kind == Kind::Game {
            if !SEARCHERS.contains(&self.game.searcher.as_str()) {
                return bad(format!(
                    "game.searcher: unknown searcher {:?}; expected one of {}",
                    self.game.searcher,
                    SEARCHERS.join(", ")
                ));
            }
            if crate::harness::make_adversary(&self.game.adversary, 0).is_none() {
                return bad(format!("game.adversary: unknown strategy {:?}", self.game.adversary));
            }
        }
        if self.kind == Kind::DeciderAccuracy && crate::harness::make_adversary(&self.decider.adversary, 0).is_none() {
            return bad(format!(
                "decider.adversary: unknown strategy {:?}",
                self.decider.adversary
            ));
        }
        if self.kind == Kind::Fairness && self.fairness.ball_sizes.iter().any(|&b| b == 0 || b > self.data.n) {
            return bad("fairness.ball_sizes must lie in 1..=data.n".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = ExperimentConfig::parse("kind = \"beta-curve\"").unwrap();
        assert_eq!(cfg.kind, Kind::BetaCurve);
        assert_eq!(cfg.constants, Constants::default());
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = ExperimentConfig::parse("kind = \"game\"\n[constants]\nfoo_bar = 1\n").unwrap_err();
        assert!(e.to_string().contains("foo_bar"), "{e}");
        let e = ExperimentConfig::parse("kind = \"game\"\nsed = 1\n").unwrap_err();
        assert!(e.to_string().contains("sed"), "{e}");
    }

    #[test]
    fn overrides_apply() {
        let cfg = ExperimentConfig::parse(
            "kind = \"decider-accuracy\"\n[constants]\ndecider_l = 64\ndecider_ksub = 64\nannuli_eta = 0.05\n",
        )
        .unwrap();
        assert_eq!(cfg.constants.decider_l, Some(64));
        assert_eq!(cfg.constants.annuli_eta, 0.05);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::parse("kind = \"game\"\n[game]\nsearcher = \"magic\"\n").is_err());
        assert!(ExperimentConfig::parse("kind = \"game\"\n[problem]\nc = 0.5\n").is_err());
        assert!(ExperimentConfig::parse("kind = \"nope\"\n").is_err());
    }
}
