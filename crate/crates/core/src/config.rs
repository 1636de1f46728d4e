//! Run configuration files: TOML with the sections `domain`, `vortices`,
//! `search`, `sweep` and the optional `mfs` and `green`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::TheoremId;
use crate::critical::SearchConfig;
use crate::error::{Error, Result};
use crate::geometry::{CurveTable, DomainSpec, Hole, Point2};
use crate::greens::{GreenModel, MfsConfig};
use crate::validate::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleSection {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// "disk", "ellipse" or "curve".
    pub kind: String,
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
    pub delta: Option<f64>,
    pub alpha: Option<[f64; 2]>,
    /// Closed-curve samples at equispaced parameters.
    pub points: Option<Vec<[f64; 2]>>,
    /// Fixed holes of Ω itself, besides the small hole B(P, ε).
    #[serde(default)]
    pub holes: Vec<HoleSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VorticesSection {
    /// Hole center P.
    pub p: [f64; 2],
    /// Strengths [Λ₁, Λ₂].
    pub lambda: [f64; 2],
    pub eps: Option<f64>,
    /// Partner point y₀ for "t1.9" runs.
    pub y0: Option<[f64; 2]>,
    /// Evaluation point for the `matrices` command (defaults to P).
    pub x: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub id: Option<String>,
    pub theorem: String,
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Hole distances d = 1 − |P| scanned by disk type II runs.
    #[serde(default)]
    pub d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenSection {
    pub trials: usize,
    pub nodes: usize,
    pub seed: u64,
    /// Random interior pairs for the closed-form comparison on disks.
    pub pairs: usize,
    pub tolerance: f64,
}

impl Default for GreenSection {
    fn default() -> Self {
        GreenSection { trials: 8, nodes: 2048, seed: 1, pairs: 100, tolerance: 1e-6 }
    }
}

/// Parsed contents of a run configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub domain: DomainSection,
    pub vortices: Option<VorticesSection>,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub mfs: MfsConfig,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub green: GreenSection,
}

fn pt(a: [f64; 2]) -> Point2 {
    Point2::new(a[0], a[1])
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing {what}")))
}

impl DomainSection {
    pub fn spec(&self) -> Result<DomainSpec> {
        let spec = match self.kind.as_str() {
            "disk" => {
                DomainSpec::Disk { center: pt(self.center.unwrap_or([0.0, 0.0])), radius: need(self.radius, "domain.radius")? }
            }
            "ellipse" => {
                let a = need(self.alpha, "domain.alpha")?;
                DomainSpec::Ellipse { delta: need(self.delta, "domain.delta")?, alpha1: a[0], alpha2: a[1] }
            }
            "curve" => {
                let pts = need(self.points.as_ref(), "domain.points")?;
                DomainSpec::Curve(CurveTable::from_samples(pts.iter().copied().map(pt).collect())?)
            }
            other => return Err(Error::Config(format!("unknown domain kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn holes(&self) -> Vec<Hole> {
        self.holes.iter().map(|h| Hole { center: pt(h.center), radius: h.radius }).collect()
    }
}

impl RunFile {
    pub fn parse(text: &str) -> Result<Self> {
        let rf: RunFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        rf.domain.spec()?;
        rf.search.validate()?;
        if let Some(v) = &rf.vortices {
            if let Some(e) = v.eps {
                if !(e > 0.0 && e < 1.0) {
                    return Err(Error::Config(format!("vortices.eps = {e} must lie in (0, 1)")));
                }
            }
        }
        if let Some(s) = &rf.sweep {
            s.theorem.parse::<TheoremId>()?;
        }
        Ok(rf)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn vortices(&self) -> Result<&VorticesSection> {
        need(self.vortices.as_ref(), "[vortices] section")
    }

    pub fn p(&self) -> Result<Point2> {
        Ok(pt(self.vortices()?.p))
    }

    pub fn strengths(&self) -> Result<(f64, f64)> {
        let l = self.vortices()?.lambda;
        Ok((l[0], l[1]))
    }

    pub fn eps(&self) -> Result<f64> {
        need(self.vortices()?.eps, "vortices.eps")
    }

    pub fn y0(&self) -> Result<Option<Point2>> {
        Ok(self.vortices()?.y0.map(pt))
    }

    pub fn x(&self) -> Result<Point2> {
        let v = self.vortices()?;
        Ok(pt(v.x.unwrap_or(v.p)))
    }

    /// Green model of Ω.
    pub fn outer(&self) -> Result<GreenModel> {
        crate::critical::outer_model(self.domain.spec()?, self.domain.holes(), &self.mfs)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let sw = need(self.sweep.as_ref(), "[sweep] section")?;
        let (lambda1, lambda2) = self.strengths()?;
        Ok(Scenario {
            id: sw.id.clone().unwrap_or_else(|| sw.theorem.clone()),
            domain: self.domain.spec()?,
            holes: self.domain.holes(),
            p: self.p()?,
            lambda1,
            lambda2,
            theorem: sw.theorem.parse()?,
            y0: self.y0()?,
        })
    }

    pub fn sweep_eps(&self) -> Result<Vec<f64>> {
        let sw = need(self.sweep.as_ref(), "[sweep] section")?;
        if sw.eps.is_empty() {
            return Err(Error::Config("sweep.eps is empty".into()));
        }
        Ok(sw.eps.clone())
    }
}
