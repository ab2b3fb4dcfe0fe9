//! Serialized clustering results.
//!
//! The TSV layout is line oriented:
//!
//! ```text
//! #sofa-clusters	v1
//! #param	<key>	<value>        one per run parameter
//! R	<cluster>	<right ids>     space separated, ascending
//! L	<left id>	<clusters>      `-` when unassigned, else comma separated
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactFormat {
    Tsv,
    Json,
}

impl FromStr for ArtifactFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(Self::Tsv),
            "json" | "structured" => Ok(Self::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown artifact format `{other}`"
            ))),
        }
    }
}

/// Parameters a clustering was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub algo: String,
    pub k: usize,
    pub theta: f64,
    pub alpha: f64,
    pub c_max: Option<usize>,
    pub capacity: Option<usize>,
    pub seed: u64,
}

/// Left side of a clustering, in stream order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeftAssignment {
    /// Biclustering: at most one cluster per left vertex.
    Exclusive(Vec<(usize, Option<usize>)>),
    /// BMF: any number of clusters per left vertex, ascending.
    Cover(Vec<(usize, Vec<usize>)>),
}

impl LeftAssignment {
    pub fn mode(&self) -> &'static str {
        match self {
            Self::Exclusive(_) => "bicluster",
            Self::Cover(_) => "bmf",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Exclusive(v) => v.len(),
            Self::Cover(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(left id, clusters)` pairs regardless of mode.
    pub fn memberships(&self) -> Vec<(usize, Vec<usize>)> {
        match self {
            Self::Exclusive(v) => v.iter().map(|&(id, c)| (id, c.into_iter().collect())).collect(),
            Self::Cover(v) => v.clone(),
        }
    }

    /// Left clusters as sets of left ids, `k` of them.
    pub fn left_clusters(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); k];
        for (id, cs) in self.memberships() {
            for c in cs {
                if c < k {
                    out[c].push(id);
                }
            }
        }
        for c in &mut out {
            c.sort_unstable();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringArtifact {
    pub params: RunParams,
    pub right_clusters: Vec<Vec<u32>>,
    pub left: LeftAssignment,
}

impl ClusteringArtifact {
    pub fn k(&self) -> usize {
        self.right_clusters.len()
    }

    /// Checks cluster ids and the exclusive-mode contract.
    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        for (_, cs) in self.left.memberships() {
            if let Some(&c) = cs.iter().find(|&&c| c >= k) {
                return Err(Error::InvalidParameter(format!(
                    "cluster id {c} out of range for k={k}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let p = &self.params;
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        let mut s = String::from("#sofa-clusters\tv1\n");
        for (key, value) in [
            ("algo", p.algo.clone()),
            ("mode", self.left.mode().to_string()),
            ("k", p.k.to_string()),
            ("theta", p.theta.to_string()),
            ("alpha", p.alpha.to_string()),
            ("c_max", opt(p.c_max)),
            ("capacity", opt(p.capacity)),
            ("seed", p.seed.to_string()),
        ] {
            s.push_str(&format!("#param\t{key}\t{value}\n"));
        }
        for (i, c) in self.right_clusters.iter().enumerate() {
            let ids: Vec<String> = c.iter().map(u32::to_string).collect();
            s.push_str(&format!("R\t{i}\t{}\n", ids.join(" ")));
        }
        for (id, cs) in self.left.memberships() {
            let field = if cs.is_empty() {
                "-".to_string()
            } else {
                cs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            };
            s.push_str(&format!("L\t{id}\t{field}\n"));
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let bad = |line: usize, reason: &str| Error::Malformed {
            path: "<artifact>".into(),
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "#sofa-clusters\tv1")) => {}
            _ => return Err(bad(1, "missing `#sofa-clusters` header")),
        }
        let mut params = RunParams {
            algo: String::new(),
            k: 0,
            theta: 0.0,
            alpha: 1.0,
            c_max: None,
            capacity: None,
            seed: 0,
        };
        let mut mode = "bicluster".to_string();
        let mut right: Vec<Vec<u32>> = Vec::new();
        let mut left: Vec<(usize, Vec<usize>)> = Vec::new();
        for (no, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| -> Result<usize> { s.parse().map_err(|_| bad(no, "expected integer")) };
            let opt = |s: &str| -> Result<Option<usize>> {
                if s == "-" {
                    Ok(None)
                } else {
                    num(s).map(Some)
                }
            };
            match fields.as_slice() {
                ["#param", key, value] => match *key {
                    "algo" => params.algo = value.to_string(),
                    "mode" => mode = value.to_string(),
                    "k" => params.k = num(value)?,
                    "theta" => params.theta = value.parse().map_err(|_| bad(no, "bad theta"))?,
                    "alpha" => params.alpha = value.parse().map_err(|_| bad(no, "bad alpha"))?,
                    "c_max" => params.c_max = opt(value)?,
                    "capacity" => params.capacity = opt(value)?,
                    "seed" => params.seed = value.parse().map_err(|_| bad(no, "bad seed"))?,
                    _ => return Err(bad(no, "unknown parameter")),
                },
                ["R", idx, ids] => {
                    if num(idx)? != right.len() {
                        return Err(bad(no, "right clusters out of order"));
                    }
                    let ids = ids
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| bad(no, "bad right id")))
                        .collect::<Result<Vec<u32>>>()?;
                    right.push(ids);
                }
                ["L", id, cs] => {
                    let cs = if *cs == "-" {
                        Vec::new()
                    } else {
                        cs.split(',').map(num).collect::<Result<Vec<_>>>()?
                    };
                    left.push((num(id)?, cs));
                }
                _ => return Err(bad(no, "unrecognized line")),
            }
        }
        let left = match mode.as_str() {
            "bicluster" => LeftAssignment::Exclusive(
                left.into_iter()
                    .map(|(id, cs)| match cs.as_slice() {
                        [] => Ok((id, None)),
                        [c] => Ok((id, Some(*c))),
                        _ => Err(bad(0, "bicluster mode allows one cluster per vertex")),
                    })
                    .collect::<Result<_>>()?,
            ),
            "bmf" => LeftAssignment::Cover(left),
            _ => return Err(bad(0, "unknown mode")),
        };
        let artifact = Self {
            params,
            right_clusters: right,
            left,
        };
        artifact.validate()?;
        Ok(artifact)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(text)?;
        a.validate()?;
        Ok(a)
    }
}

pub fn write_artifact(artifact: &ClusteringArtifact, path: impl AsRef<Path>, format: ArtifactFormat) -> Result<()> {
    artifact.validate()?;
    let body = match format {
        ArtifactFormat::Tsv => artifact.to_tsv(),
        ArtifactFormat::Json => artifact.to_json()?,
    };
    let mut f = fs::File::create(path)?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

pub fn read_artifact(path: impl AsRef<Path>, format: ArtifactFormat) -> Result<ClusteringArtifact> {
    let text = fs::read_to_string(path)?;
    match format {
        ArtifactFormat::Tsv => ClusteringArtifact::from_tsv(&text),
        ArtifactFormat::Json => ClusteringArtifact::from_json(&text),
    }
}
