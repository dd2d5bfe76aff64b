//! Analysis configuration: a single TOML file describing the system, the
//! potential, the analysis to run, and numeric parameters.
//!
//! The full grammar with annotated examples lives in `docs/config-format.md`.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use multifractal::expr::Expr;
use multifractal::potentials::{DiscontinuitySpec, Potential};
use multifractal::systems::{Branch, GluedSystem, PiecewiseConformalMap, SymbolicSystem};
use multifractal::{Map64, Potential64};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub label: Option<String>,
    pub system: SystemSpec,
    pub potential: PotentialSpec,
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub kind: String,
    pub label: Option<String>,
    /// Full shift on this many symbols (`kind = "sft"`).
    pub full_shift: Option<usize>,
    /// Explicit 0/1 transition matrix (`kind = "sft"`).
    pub transition: Option<Vec<Vec<u8>>>,
    /// Piecewise-linear full branches by slope (`kind = "map"`).
    pub slopes: Option<Vec<f64>>,
    /// General branches (`kind = "map"`).
    pub branches: Option<Vec<BranchSpec>>,
    /// Parts of a glued union (`kind = "glued"`).
    pub parts: Option<Vec<PartSpec>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    pub domain: [f64; 2],
    pub map: String,
    pub factor: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub label: Option<String>,
    pub full_shift: Option<usize>,
    pub transition: Option<Vec<Vec<u8>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: String,
    pub depth: Option<usize>,
    /// Dense table of length m^depth, row-major in the word symbols.
    /// TOML `inf` is accepted for +inf entries.
    pub values: Option<Vec<f64>>,
    /// Sparse table: word string (e.g. "01") to value.
    pub table: Option<BTreeMap<String, f64>>,
    /// Formula on [0,1] (`kind = "pointwise"`).
    pub formula: Option<String>,
    /// Per-part depth-1 tables for glued systems.
    pub parts: Option<Vec<PotentialPartSpec>>,
    pub discontinuities: Option<DiscontinuityCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialPartSpec {
    pub depth: Option<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscontinuityCfg {
    pub points: Option<Vec<f64>>,
    pub periodic: Option<bool>,
    pub cylinders: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    pub kind: String,
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
    pub q_step: Option<f64>,
    /// Extend the grid until the boundary secant slopes settle.
    pub auto_extend: Option<bool>,
    /// Extra α points to evaluate.
    pub alphas: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub n_list: Option<Vec<usize>>,
    pub kink_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    pub entropy_usc: Option<bool>,
    pub equilibrium_available: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
}

/// Everything the runner needs, built and validated.
pub struct Scenario {
    pub label: String,
    pub system: BuiltSystem,
    pub potential: BuiltPotential,
    pub analysis: Analysis,
    pub q_min: f64,
    pub q_max: f64,
    pub q_step: f64,
    pub auto_extend: bool,
    pub alphas: Vec<f64>,
    pub epsilon: f64,
    pub n_list: Vec<usize>,
    pub kink_tol: f64,
    pub entropy_usc: bool,
    pub equilibrium_available: Option<bool>,
    pub out_dir: String,
}

pub enum BuiltSystem {
    Sft(SymbolicSystem),
    Map { map: Map64, sft: SymbolicSystem },
    Glued(GluedSystem),
}

impl BuiltSystem {
    pub fn describe(&self) -> String {
        match self {
            BuiltSystem::Sft(s) => format!(
                "subshift {} (alphabet {}, irreducible: {})",
                s.label(),
                s.alphabet_size(),
                s.is_irreducible()
            ),
            BuiltSystem::Map { map, sft } => format!(
                "interval map {} ({} branches, uniformly expanding: {}, itineraries irreducible: {})",
                map.label(),
                map.branch_count(),
                map.is_uniformly_expanding(),
                sft.is_irreducible()
            ),
            BuiltSystem::Glued(g) => format!(
                "glued union of {} parts ({})",
                g.parts().len(),
                g.parts().iter().map(|p| p.label().to_string()).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

pub enum BuiltPotential {
    Single(Potential64),
    PerPart(Vec<Potential64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Pressure,
    Birkhoff,
    Entropy,
    Lyapunov,
    Dimension,
    OracleCompare,
    PhaseReport,
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Pressure => "pressure",
            Analysis::Birkhoff => "birkhoff",
            Analysis::Entropy => "entropy",
            Analysis::Lyapunov => "lyapunov",
            Analysis::Dimension => "dimension",
            Analysis::OracleCompare => "oracle-compare",
            Analysis::PhaseReport => "phase-report",
        }
    }
}

pub fn parse(text: &str) -> Result<ConfigFile> {
    // toml errors carry line/column spans already
    toml::from_str::<ConfigFile>(text).map_err(|e| anyhow!("config parse error:\n{e}"))
}

pub fn build(cfg: &ConfigFile) -> Result<Scenario> {
    let analysis = match cfg.analysis.kind.as_str() {
        "pressure" => Analysis::Pressure,
        "birkhoff" => Analysis::Birkhoff,
        "entropy" => Analysis::Entropy,
        "lyapunov" => Analysis::Lyapunov,
        "dimension" => Analysis::Dimension,
        "oracle-compare" => Analysis::OracleCompare,
        "phase-report" => Analysis::PhaseReport,
        other => bail!("[analysis] kind = {other:?} is not one of pressure | birkhoff | entropy | lyapunov | dimension | oracle-compare | phase-report"),
    };

    let system = build_system(&cfg.system)?;
    let potential = build_potential(&cfg.potential, &system)?;

    // analysis-specific preconditions
    match analysis {
        Analysis::Lyapunov | Analysis::Dimension => {
            if !matches!(system, BuiltSystem::Map { .. }) {
                bail!(
                    "[analysis] kind = {:?} needs a map with a conformal factor, not a bare subshift",
                    analysis.name()
                );
            }
        }
        _ => {}
    }
    if matches!(system, BuiltSystem::Glued(_)) && !matches!(potential, BuiltPotential::PerPart(_))
    {
        bail!("a glued system needs [[potential.parts]] with one table per part");
    }

    let q_min = cfg.analysis.q_min.unwrap_or(-20.0);
    let q_max = cfg.analysis.q_max.unwrap_or(20.0);
    let q_step = cfg.analysis.q_step.unwrap_or(0.01);
    if !(q_step > 0.0) || !(q_max > q_min) {
        bail!("[analysis] needs q_min < q_max and q_step > 0");
    }
    let n_list = cfg.analysis.n_list.clone().unwrap_or_else(|| vec![10, 15, 20]);
    if n_list.iter().any(|&n| n == 0) {
        bail!("[analysis] n_list entries must be >= 1");
    }
    Ok(Scenario {
        label: cfg.label.clone().unwrap_or_else(|| "unnamed analysis".into()),
        system,
        potential,
        analysis,
        q_min,
        q_max,
        q_step,
        auto_extend: cfg.analysis.auto_extend.unwrap_or(false),
        alphas: cfg.analysis.alphas.clone().unwrap_or_default(),
        epsilon: cfg.analysis.epsilon.unwrap_or(0.05),
        n_list,
        kink_tol: cfg.analysis.kink_tol.unwrap_or(1e-3),
        entropy_usc: cfg.flags.entropy_usc.unwrap_or(true),
        equilibrium_available: cfg.flags.equilibrium_available,
        out_dir: cfg.output.dir.clone().unwrap_or_else(|| "out".into()),
    })
}

fn build_system(spec: &SystemSpec) -> Result<BuiltSystem> {
    match spec.kind.as_str() {
        "sft" => {
            let sys = build_sft(spec.full_shift, spec.transition.as_deref(), spec.label.as_deref())?;
            Ok(BuiltSystem::Sft(sys))
        }
        "map" => {
            let label = spec.label.clone().unwrap_or_else(|| "map".into());
            let map = if let Some(slopes) = &spec.slopes {
                PiecewiseConformalMap::from_slopes(label, slopes)?
            } else if let Some(branches) = &spec.branches {
                let mut built = Vec::new();
                for (i, b) in branches.iter().enumerate() {
                    let map_expr = Expr::parse(&b.map)
                        .with_context(|| format!("branch {i} map formula"))?;
                    let factor_expr = Expr::parse(&b.factor)
                        .with_context(|| format!("branch {i} factor formula"))?;
                    built.push(Branch {
                        domain: (b.domain[0], b.domain[1]),
                        map: map_expr,
                        factor: factor_expr,
                    });
                }
                PiecewiseConformalMap::new(label, built, true)?
            } else {
                bail!("[system] kind = \"map\" needs either slopes = [...] or [[system.branches]]");
            };
            let sft = map.symbolic().context("deriving the itinerary subshift")?;
            Ok(BuiltSystem::Map { map, sft })
        }
        "glued" => {
            let parts = spec
                .parts
                .as_ref()
                .ok_or_else(|| anyhow!("[system] kind = \"glued\" needs [[system.parts]]"))?;
            let mut built = Vec::new();
            for (i, p) in parts.iter().enumerate() {
                let label = p.label.clone().unwrap_or_else(|| format!("part-{i}"));
                built.push(build_sft(p.full_shift, p.transition.as_deref(), Some(&label))?);
            }
            Ok(BuiltSystem::Glued(GluedSystem::new(built)?))
        }
        other => bail!("[system] kind = {other:?} is not one of sft | map | glued"),
    }
}

fn build_sft(
    full_shift: Option<usize>,
    transition: Option<&[Vec<u8>]>,
    label: Option<&str>,
) -> Result<SymbolicSystem> {
    match (full_shift, transition) {
        (Some(m), None) => match label {
            Some(l) => Ok(SymbolicSystem::new(l, &vec![vec![1u8; m]; m])?),
            None => Ok(SymbolicSystem::full_shift(m)),
        },
        (None, Some(rows)) => {
            Ok(SymbolicSystem::new(label.unwrap_or("sft"), rows)?)
        }
        (Some(_), Some(_)) => bail!("[system] give either full_shift or transition, not both"),
        (None, None) => bail!("[system] kind = \"sft\" needs full_shift = m or transition = [[...]]"),
    }
}

fn build_potential(spec: &PotentialSpec, system: &BuiltSystem) -> Result<BuiltPotential> {
    let disc = build_discontinuities(spec.discontinuities.as_ref())?;
    match spec.kind.as_str() {
        "locally_constant" => {
            if let BuiltSystem::Glued(g) = system {
                let parts = spec.parts.as_ref().ok_or_else(|| {
                    anyhow!("glued systems need [[potential.parts]] with per-part tables")
                })?;
                if parts.len() != g.parts().len() {
                    bail!(
                        "{} potential parts for {} system parts",
                        parts.len(),
                        g.parts().len()
                    );
                }
                let mut built = Vec::new();
                for (p, sys) in parts.iter().zip(g.parts()) {
                    let depth = p.depth.unwrap_or(1);
                    built.push(Potential::locally_constant(
                        sys.alphabet_size(),
                        depth,
                        p.values.clone(),
                    )?);
                }
                return Ok(BuiltPotential::PerPart(built));
            }
            let m = match system {
                BuiltSystem::Sft(s) => s.alphabet_size(),
                BuiltSystem::Map { sft, .. } => sft.alphabet_size(),
                BuiltSystem::Glued(_) => unreachable!(),
            };
            let depth = spec.depth.unwrap_or(1);
            let values = dense_table(spec, m, depth)?;
            let mut pot = Potential::locally_constant(m, depth, values)?;
            pot = pot.with_discontinuities(disc);
            Ok(BuiltPotential::Single(pot))
        }
        "pointwise" => {
            if !matches!(system, BuiltSystem::Map { .. }) {
                bail!("pointwise potentials need an interval map system");
            }
            let formula = spec
                .formula
                .as_ref()
                .ok_or_else(|| anyhow!("pointwise potential needs formula = \"...\""))?;
            let expr = Expr::parse(formula).context("potential formula")?;
            Ok(BuiltPotential::Single(Potential::pointwise(expr).with_discontinuities(disc)))
        }
        "geometric" => {
            let BuiltSystem::Map { map, .. } = system else {
                bail!("geometric potential (log a) needs an interval map system");
            };
            Ok(BuiltPotential::Single(Potential::log_conformal_factor(map)?))
        }
        other => bail!(
            "[potential] kind = {other:?} is not one of locally_constant | pointwise | geometric"
        ),
    }
}

fn dense_table(spec: &PotentialSpec, m: usize, depth: usize) -> Result<Vec<f64>> {
    if let Some(values) = &spec.values {
        return Ok(values.clone());
    }
    if let Some(table) = &spec.table {
        let size = m
            .checked_pow(depth as u32)
            .ok_or_else(|| anyhow!("m^depth overflows"))?;
        let mut dense = vec![f64::NAN; size];
        for (word, &v) in table {
            let idx = parse_word(word, m)?;
            if idx.len() != depth {
                bail!("table word {word:?} has length {}, expected depth {depth}", idx.len());
            }
            let mut k = 0usize;
            for &s in &idx {
                k = k * m + s as usize;
            }
            dense[k] = v;
        }
        if dense.iter().any(|v| v.is_nan()) {
            bail!("sparse table does not cover every {depth}-word over {m} symbols");
        }
        return Ok(dense);
    }
    bail!("locally_constant potential needs values = [...] or [potential.table]");
}

pub fn parse_word(word: &str, m: usize) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(word.len());
    for c in word.chars() {
        let d = c
            .to_digit(36)
            .ok_or_else(|| anyhow!("bad symbol {c:?} in word {word:?}"))? as usize;
        if d >= m {
            bail!("symbol {c:?} out of range for alphabet of {m}");
        }
        out.push(d as u8);
    }
    if out.is_empty() {
        bail!("empty word in table");
    }
    Ok(out)
}

fn build_discontinuities(cfg: Option<&DiscontinuityCfg>) -> Result<DiscontinuitySpec<f64>> {
    let Some(c) = cfg else {
        return Ok(DiscontinuitySpec::None);
    };
    match (&c.points, &c.cylinders) {
        (Some(points), None) => Ok(DiscontinuitySpec::FinitePoints {
            points: points.clone(),
            periodic: c.periodic.unwrap_or(false),
        }),
        (None, Some(words)) => {
            let parsed: Result<Vec<Vec<u8>>> =
                words.iter().map(|w| parse_word(w, 36)).collect();
            Ok(DiscontinuitySpec::Cylinders { words: parsed? })
        }
        (Some(_), Some(_)) => bail!("[potential.discontinuities] give points or cylinders, not both"),
        (None, None) => Ok(DiscontinuitySpec::None),
    }
}
