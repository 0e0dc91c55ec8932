//! Closed-form ranking functions.
//!
//! Every model scores a document as a sum of per-term contributions, each a
//! function of the term statistics in [`TermStats`]. Terms absent from the
//! document (tf = 0) contribute nothing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown retrieval model {0:?}")]
    Unknown(String),
    #[error("invalid parameter for {model}: {msg}")]
    InvalidParameter { model: &'static str, msg: String },
}

/// Everything a per-term score may depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermStats {
    /// Occurrences of the term in the document.
    pub tf: f64,
    /// Document length in tokens.
    pub dl: f64,
    /// Documents containing the term.
    pub df: f64,
    /// Occurrences of the term in the collection.
    pub ctf: f64,
    /// Number of documents.
    pub n: f64,
    /// Tokens in the collection.
    pub total: f64,
    pub avgdl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum RetrievalModel {
    Bm25 { k1: f64, b: f64 },
    ClassicTfIdf,
    Dfi,
    DfrH3 { mu: f64 },
    DfrZ { z: f64 },
    IbLl,
    IbSpl,
    LmDirichlet { mu: f64 },
    LmJelinek { lambda: f64 },
}

impl Default for RetrievalModel {
    fn default() -> Self {
        RetrievalModel::DfrZ { z: 0.30 }
    }
}

impl RetrievalModel {
    pub const fn bm25() -> Self {
        RetrievalModel::Bm25 { k1: 1.2, b: 0.75 }
    }

    /// The eleven configurations compared in the retrieval evaluation.
    pub fn all_variants() -> Vec<RetrievalModel> {
        vec![
            RetrievalModel::bm25(),
            RetrievalModel::ClassicTfIdf,
            RetrievalModel::Dfi,
            RetrievalModel::DfrH3 { mu: 800.0 },
            RetrievalModel::DfrZ { z: 0.30 },
            RetrievalModel::IbLl,
            RetrievalModel::IbSpl,
            RetrievalModel::LmDirichlet { mu: 2000.0 },
            RetrievalModel::LmJelinek { lambda: 0.05 },
            RetrievalModel::LmJelinek { lambda: 0.10 },
            RetrievalModel::LmJelinek { lambda: 0.20 },
        ]
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |model, msg: &str| {
            Err(ModelError::InvalidParameter {
                model,
                msg: msg.to_string(),
            })
        };
        match *self {
            RetrievalModel::Bm25 { k1, b } => {
                if !(k1 >= 0.0 && k1.is_finite()) {
                    return bad("bm25", "k1 must be >= 0");
                }
                if !(0.0..=1.0).contains(&b) {
                    return bad("bm25", "b must lie in [0, 1]");
                }
            }
            RetrievalModel::DfrH3 { mu } | RetrievalModel::LmDirichlet { mu } => {
                if !(mu > 0.0 && mu.is_finite()) {
                    return bad("dirichlet", "mu must be > 0");
                }
            }
            RetrievalModel::DfrZ { z } => {
                if !(z > 0.0 && z < 0.5) {
                    return bad("dfr_z", "z must lie in (0, 0.5)");
                }
            }
            RetrievalModel::LmJelinek { lambda } => {
                if !(lambda > 0.0 && lambda < 1.0) {
                    return bad("lm_jelinek", "lambda must lie in (0, 1)");
                }
            }
            RetrievalModel::ClassicTfIdf
            | RetrievalModel::Dfi
            | RetrievalModel::IbLl
            | RetrievalModel::IbSpl => {}
        }
        Ok(())
    }

    /// Contribution of one query term to a document score.
    pub fn term_score(&self, s: &TermStats) -> f64 {
        if s.tf <= 0.0 {
            return 0.0;
        }
        match *self {
            RetrievalModel::Bm25 { k1, b } => {
                let idf = (1.0 + (s.n - s.df + 0.5) / (s.df + 0.5)).ln();
                idf * s.tf * (k1 + 1.0) / (s.tf + k1 * (1.0 - b + b * s.dl / s.avgdl))
            }
            RetrievalModel::ClassicTfIdf => {
                let idf = 1.0 + (s.n / (s.df + 1.0)).ln();
                s.tf.sqrt() * idf * idf / s.dl.sqrt()
            }
            RetrievalModel::Dfi => {
                let expected = s.dl * s.ctf / s.total;
                if s.tf > expected {
                    (1.0 + (s.tf - expected) / expected.sqrt()).log2()
                } else {
                    0.0
                }
            }
            RetrievalModel::DfrH3 { mu } => {
                let tfn = (s.tf + mu * s.ctf / s.total) * s.avgdl / (s.dl + mu);
                dfr_if_b(tfn, s)
            }
            RetrievalModel::DfrZ { z } => {
                let tfn = s.tf * ((1.0 + s.avgdl) / (1.0 + s.dl)).powf(z);
                dfr_if_b(tfn, s)
            }
            RetrievalModel::IbLl => {
                let (lambda, tfn) = ib_params(s);
                -(lambda / (lambda + tfn)).ln()
            }
            RetrievalModel::IbSpl => {
                let (lambda, tfn) = ib_params(s);
                -((lambda.powf(tfn / (tfn + 1.0)) - lambda) / (1.0 - lambda)).ln()
            }
            RetrievalModel::LmDirichlet { mu } => {
                let p = s.ctf / s.total;
                let score = (1.0 + s.tf / (mu * p)).ln() + (mu / (s.dl + mu)).ln();
                score.max(0.0)
            }
            RetrievalModel::LmJelinek { lambda } => {
                let p = s.ctf / s.total;
                (1.0 + ((1.0 - lambda) / lambda) * (s.tf / s.dl) / p).ln()
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            RetrievalModel::Bm25 { .. } => "bm25".into(),
            RetrievalModel::ClassicTfIdf => "classic".into(),
            RetrievalModel::Dfi => "dfi".into(),
            RetrievalModel::DfrH3 { .. } => "dfr_h3".into(),
            RetrievalModel::DfrZ { .. } => "dfr_z".into(),
            RetrievalModel::IbLl => "ib_ll".into(),
            RetrievalModel::IbSpl => "ib_spl".into(),
            RetrievalModel::LmDirichlet { .. } => "lm_dirichlet".into(),
            RetrievalModel::LmJelinek { lambda } => format!("lm_jelinek_{lambda:.2}"),
        }
    }
}

/// Divergence from randomness with basic model I(F) and after-effect B.
fn dfr_if_b(tfn: f64, s: &TermStats) -> f64 {
    let inf = tfn * (1.0 + (s.n + 1.0) / (s.ctf + 0.5)).log2();
    let after_effect = (s.ctf + 1.0) / (s.df * (tfn + 1.0));
    inf * after_effect
}

/// Information-based models: λ = df/N and H2 length normalization.
fn ib_params(s: &TermStats) -> (f64, f64) {
    let mut lambda = s.df / s.n;
    // λ = 1 makes the smoothed power law degenerate.
    if lambda >= 1.0 {
        lambda = 0.99;
    }
    let tfn = s.tf * (1.0 + s.avgdl / s.dl).log2();
    (lambda, tfn)
}

impl fmt::Display for RetrievalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for RetrievalModel {
    type Err = ModelError;

    /// Accepts `bm25`, `classic`, `dfi`, `dfr_h3`, `dfr_z`, `ib_ll`,
    /// `ib_spl`, `lm_dirichlet` and `lm_jelinek[_<lambda>]`, optionally with
    /// a parameter suffix (`bm25:1.5,0.6`, `dfr_z:0.25`, `lm_dirichlet:1500`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase().replace('-', "_");
        let (name, params) = match lower.split_once(':') {
            Some((n, p)) => (n.to_string(), Some(p.to_string())),
            None => (lower.clone(), None),
        };
        let nums = |p: &Option<String>| -> Result<Vec<f64>, ModelError> {
            match p {
                None => Ok(Vec::new()),
                Some(p) => p
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| ModelError::Unknown(s.to_string())))
                    .collect(),
            }
        };
        let args = nums(&params)?;
        let arg = |i: usize, default: f64| args.get(i).copied().unwrap_or(default);
        let model = match name.as_str() {
            "bm25" => RetrievalModel::Bm25 {
                k1: arg(0, 1.2),
                b: arg(1, 0.75),
            },
            "classic" | "tfidf" | "classic_tfidf" => RetrievalModel::ClassicTfIdf,
            "dfi" => RetrievalModel::Dfi,
            "dfr_h3" => RetrievalModel::DfrH3 { mu: arg(0, 800.0) },
            "dfr_z" => RetrievalModel::DfrZ { z: arg(0, 0.30) },
            "ib_ll" => RetrievalModel::IbLl,
            "ib_spl" => RetrievalModel::IbSpl,
            "lm_dirichlet" | "lmdirichlet" => RetrievalModel::LmDirichlet { mu: arg(0, 2000.0) },
            "lm_jelinek" | "lmjelinek" => RetrievalModel::LmJelinek { lambda: arg(0, 0.10) },
            other => match other.strip_prefix("lm_jelinek_") {
                Some(l) => RetrievalModel::LmJelinek {
                    lambda: l.parse().map_err(|_| ModelError::Unknown(s.to_string()))?,
                },
                None => return Err(ModelError::Unknown(s.to_string())),
            },
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(tf: f64, dl: f64) -> TermStats {
        TermStats {
            tf,
            dl,
            df: 2.0,
            ctf: 4.0,
            n: 3.0,
            total: 9.0,
            avgdl: 3.0,
        }
    }

    #[test]
    fn bm25_reference_value() {
        let s = stats(3.0, 3.0);
        let got = RetrievalModel::bm25().term_score(&s);
        let expected = 1.6f64.ln() * 6.6 / 4.2;
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.7386).abs() < 1e-4);
    }

    #[test]
    fn zero_tf_contributes_nothing() {
        for m in RetrievalModel::all_variants() {
            assert_eq!(m.term_score(&stats(0.0, 3.0)), 0.0, "{m}");
        }
    }

    #[test]
    fn names_round_trip() {
        for m in RetrievalModel::all_variants() {
            let parsed: RetrievalModel = m.name().parse().unwrap();
            assert_eq!(parsed, m);
        }
        assert_eq!(
            "bm25:1.5,0.5".parse::<RetrievalModel>().unwrap(),
            RetrievalModel::Bm25 { k1: 1.5, b: 0.5 }
        );
        assert!("okapi".parse::<RetrievalModel>().is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(RetrievalModel::LmJelinek { lambda: 1.0 }.validate().is_err());
        assert!(RetrievalModel::LmDirichlet { mu: 0.0 }.validate().is_err());
        assert!(RetrievalModel::Bm25 { k1: -1.0, b: 0.5 }.validate().is_err());
        assert!(RetrievalModel::Bm25 { k1: 1.0, b: 1.5 }.validate().is_err());
        assert!(RetrievalModel::DfrZ { z: 0.5 }.validate().is_err());
        for m in RetrievalModel::all_variants() {
            m.validate().unwrap();
        }
    }

    #[test]
    fn scores_are_finite_when_term_is_everywhere() {
        let s = TermStats {
            tf: 1.0,
            dl: 1.0,
            df: 3.0,
            ctf: 3.0,
            n: 3.0,
            total: 3.0,
            avgdl: 1.0,
        };
        for m in RetrievalModel::all_variants() {
            assert!(m.term_score(&s).is_finite(), "{m}");
        }
    }
}
