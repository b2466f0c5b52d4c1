use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use finex_core::oracle::suite::Suite;
use finex_core::prob::parse_rational;
use finex_core::{Exact, NumericMode, PriorAtomsFile};

/// Where the simplex weights come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    Uniform,
    Iid(Vec<Exact>),
    Atoms(PathBuf),
}

impl FromStr for PriorSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(PriorSpec::Uniform);
        }
        if let Some(rest) = s.strip_prefix("iid:") {
            let p = rest
                .split(',')
                .map(|x| parse_rational(x).ok_or_else(|| anyhow!("cannot read probability '{}'", x.trim())))
                .collect::<Result<Vec<_>>>()?;
            return Ok(PriorSpec::Iid(p));
        }
        if let Some(path) = s.strip_prefix("atoms:") {
            if path.is_empty() {
                bail!("atoms prior needs a file path");
            }
            return Ok(PriorSpec::Atoms(path.into()));
        }
        bail!("prior must be 'uniform', 'iid:p1,p2,...' or 'atoms:PATH', got '{s}'")
    }
}

impl PriorSpec {
    pub fn load_atoms(&self) -> Result<Option<PriorAtomsFile>> {
        match self {
            PriorSpec::Atoms(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading atoms file {}", path.display()))?;
                Ok(Some(PriorAtomsFile::parse(&text)?))
            }
            _ => Ok(None),
        }
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorSpec::Uniform => f.write_str("uniform"),
            PriorSpec::Iid(p) => {
                let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                write!(f, "iid:{}", parts.join(","))
            }
            PriorSpec::Atoms(path) => write!(f, "atoms:{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

impl FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            _ => bail!("output must be 'json' or 'text', got '{s}'"),
        }
    }
}

pub fn parse_mode(s: &str) -> Result<NumericMode> {
    match s {
        "rational" => Ok(NumericMode::Rational),
        "float" => Ok(NumericMode::Float),
        _ => bail!("mode must be 'rational' or 'float', got '{s}'"),
    }
}

/// `a=60,b=40` into ordered (group, size) pairs.
pub fn parse_group_sizes(s: &str) -> Result<Vec<(String, u64)>> {
    let mut out: Vec<(String, u64)> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (g, size) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("group size '{part}' is not of the form group=size"))?;
        let g = g.trim().to_string();
        let size: u64 = size
            .trim()
            .parse()
            .with_context(|| format!("group size '{part}' is not a nonnegative integer"))?;
        if out.iter().any(|(h, _)| *h == g) {
            bail!("group '{g}' listed twice");
        }
        out.push((g, size));
    }
    if out.is_empty() {
        bail!("no group sizes given");
    }
    Ok(out)
}

/// `1->1,2->1,3->2` (1-based source and target labels; `→` also accepted)
/// into a zero-based map over `k` source labels.
pub fn parse_merge(s: &str, k: usize) -> Result<Vec<usize>> {
    let mut map = vec![None; k];
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (from, to) = part
            .split_once("->")
            .or_else(|| part.split_once('→'))
            .ok_or_else(|| anyhow!("merge entry '{part}' is not of the form j->j'"))?;
        let from: usize = from.trim().parse().with_context(|| format!("bad source label in '{part}'"))?;
        let to: usize = to.trim().parse().with_context(|| format!("bad target label in '{part}'"))?;
        if from == 0 || from > k {
            bail!("merge source {from} is outside 1..={k}");
        }
        if to == 0 {
            bail!("merge targets are numbered from 1");
        }
        if map[from - 1].replace(to - 1).is_some() {
            bail!("label {from} is merged twice");
        }
    }
    map.into_iter()
        .enumerate()
        .map(|(j, t)| t.ok_or_else(|| anyhow!("label {} has no merge target", j + 1)))
        .collect()
}

/// Everything a command needs besides the survey.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub m: Option<u64>,
    pub group_sizes: Option<Vec<(String, u64)>>,
    pub prior: PriorSpec,
    pub mode: NumericMode,
    pub output: OutputFormat,
    pub seed: Option<u64>,
    pub merge: Option<String>,
    /// Exact rather than HT-approx population prediction.
    pub exact: bool,
    /// Sequence length for `simulate`.
    pub n: Option<u64>,
    pub suite: Option<Suite>,
    pub cases: usize,
    pub explicit_labels: Option<Vec<String>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m: None,
            group_sizes: None,
            prior: PriorSpec::Uniform,
            mode: NumericMode::Rational,
            output: OutputFormat::Json,
            seed: None,
            merge: None,
            exact: false,
            n: None,
            suite: None,
            cases: 20,
            explicit_labels: None,
        }
    }
}
