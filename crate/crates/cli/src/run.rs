//! Analysis execution and deterministic artifact writers.
//!
//! Outputs per run (in the configured directory):
//! `pressure.csv` (q, value, lo, hi, method), `spectrum.csv` (alpha, value,
//! status), `transitions.txt`, `oracle.csv` (oracle-compare only),
//! `lyapunov.csv` (lyapunov only), and `report.txt` with the assumptions
//! block. Floats are written in shortest round-trip form with `.` decimals
//! and literal `inf` / `-inf`, so identical configs give byte-identical
//! files regardless of thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use multifractal::legendre::{phase_transitions, PhaseTransition, SampledConvexFunction};
use multifractal::potentials::{Potential, RegularityClass, RegularityTag};
use multifractal::spectra::{
    birkhoff_spectrum_direct, birkhoff_spectrum_legendre, dimension_spectrum, entropy_spectrum,
    glued_spectrum, high_entropy_window, lyapunov_spectra, singular_spectrum, OracleEstimate,
    PointStatus, SpectrumCurve, SpectrumOptions,
};
use multifractal::systems::SymbolicSystem;
use multifractal::thermo::{
    auto_extend_grid, linspace, pressure_curve, pressure_curve_glued, pressure_exact_glued,
    pressure_exact_sft, PressureCurve,
};
use multifractal::{Error as MfError, Potential64};

use crate::config::{Analysis, BuiltPotential, BuiltSystem, Scenario};

pub struct RunOutcome {
    pub files: Vec<PathBuf>,
}

/// Format a float for CSV: shortest round-trip, `inf`/`-inf` literals.
fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    files.push(path);
    Ok(())
}

fn pressure_csv(curve: &PressureCurve<f64>) -> String {
    let mut s = String::from("q,value,lo,hi,method\n");
    for i in 0..curve.q_grid.len() {
        let (lo, hi) = curve.method[i].bounds(curve.values[i]);
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt(curve.q_grid[i]),
            fmt(curve.values[i]),
            fmt(lo),
            fmt(hi),
            curve.method[i].tag()
        );
    }
    s
}

fn spectrum_csv(spec: &SpectrumCurve<f64>) -> String {
    let mut s = String::from("alpha,value,status\n");
    for i in 0..spec.len() {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt(spec.alpha_grid[i]),
            fmt(spec.values[i]),
            spec.status[i].tag()
        );
    }
    s
}

fn transitions_txt(transitions: &[PhaseTransition<f64>], tol: f64) -> String {
    if transitions.is_empty() {
        return format!("no phase transition detected above tolerance {}\n", fmt(tol));
    }
    let mut s = String::new();
    for t in transitions {
        let _ = writeln!(
            s,
            "q = {}  D- = {}  D+ = {}  affine-interval = [{}, {}]",
            fmt(t.q),
            fmt(t.d_minus),
            fmt(t.d_plus),
            fmt(t.d_minus),
            fmt(t.d_plus)
        );
    }
    s
}

fn oracle_csv(rows: &[(OracleEstimate<f64>, f64)]) -> String {
    let mut s = String::from("alpha,epsilon,n,count,estimate,legendre,abs_diff\n");
    for (e, leg) in rows {
        let diff = if e.estimate.is_finite() && leg.is_finite() {
            (e.estimate - leg).abs()
        } else if e.estimate == *leg {
            0.0
        } else {
            f64::INFINITY
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt(e.alpha),
            fmt(e.epsilon),
            e.n,
            e.count,
            fmt(e.estimate),
            fmt(*leg),
            fmt(diff)
        );
    }
    s
}

struct ReportCtx<'a> {
    scenario: &'a Scenario,
    regularity: Option<RegularityClass<f64>>,
    equilibrium_auto: Option<bool>,
    transitions: Vec<PhaseTransition<f64>>,
    spectrum: Option<&'a SpectrumCurve<f64>>,
    extra_lines: Vec<String>,
}

fn report_txt(ctx: &ReportCtx) -> String {
    let sc = ctx.scenario;
    let mut s = String::new();
    let _ = writeln!(s, "multifractal analysis report");
    let _ = writeln!(s, "============================");
    let _ = writeln!(s, "label: {}", sc.label);
    let _ = writeln!(s, "system: {}", sc.system.describe());
    if let Some(r) = &ctx.regularity {
        let tag = match r.tag {
            RegularityTag::Continuous => "continuous",
            RegularityTag::ClassAf => "measurable with dynamically negligible discontinuities",
            RegularityTag::BoundedMeasurable => "bounded measurable",
            RegularityTag::SingularAbove => "singular (+inf values, q <= 0 regime)",
        };
        let _ = writeln!(s, "potential regularity: {} (h0 = {})", tag, fmt(r.h0));
    }
    let _ = writeln!(s, "analysis: {}", sc.analysis.name());
    let _ = writeln!(
        s,
        "q grid: [{}, {}] step {}{}",
        fmt(sc.q_min),
        fmt(sc.q_max),
        fmt(sc.q_step),
        if sc.auto_extend { " (auto-extended until boundary slopes settle)" } else { "" }
    );
    let _ = writeln!(s, "assumptions:");
    let _ = writeln!(
        s,
        "  entropy map upper semi-continuous: {} (declared by config, never inferred)",
        sc.entropy_usc
    );
    match (sc.equilibrium_available, ctx.equilibrium_auto) {
        (Some(v), _) => {
            let _ = writeln!(s, "  equilibrium states available: {v} (declared by config)");
        }
        (None, Some(auto)) => {
            let _ = writeln!(
                s,
                "  equilibrium states available: {auto} (automatic: irreducible subshift support)"
            );
        }
        (None, None) => {
            let _ = writeln!(s, "  equilibrium states available: not determined");
        }
    }
    if let Some(r) = &ctx.regularity {
        if r.tag == RegularityTag::BoundedMeasurable {
            let _ = writeln!(
                s,
                "  validity restricted to the high-entropy window above h0 = {}",
                fmt(r.h0)
            );
        }
    }
    if ctx.transitions.is_empty() {
        let _ = writeln!(
            s,
            "phase transitions: none detected above tolerance {} (sampled curves only bound gaps)",
            fmt(sc.kink_tol)
        );
    } else {
        let _ = writeln!(s, "phase transitions:");
        for t in &ctx.transitions {
            let _ = writeln!(
                s,
                "  q = {}: subdifferential gap [{}, {}]",
                fmt(t.q),
                fmt(t.d_minus),
                fmt(t.d_plus)
            );
        }
    }
    if let Some(spec) = ctx.spectrum {
        let _ = writeln!(s, "validity regions (status -> points -> meaning):");
        for status in [
            PointStatus::ProvedEqual,
            PointStatus::GluedExact,
            PointStatus::ConcaveHullUpperBound,
            PointStatus::HighEntropyWindow,
            PointStatus::SingularRegime,
            PointStatus::OutOfDomain,
        ] {
            let count = spec.status.iter().filter(|&&st| st == status).count();
            if count > 0 {
                let _ = writeln!(s, "  {}: {} points -- {}", status.tag(), count, status.description());
            }
        }
    }
    for line in &ctx.extra_lines {
        let _ = writeln!(s, "{line}");
    }
    s
}

fn q_grid(sc: &Scenario, pressure: Option<&dyn Fn(f64) -> f64>) -> Vec<f64> {
    let points = ((sc.q_max - sc.q_min) / sc.q_step).round() as usize + 1;
    if sc.auto_extend {
        if let Some(p) = pressure {
            if let Ok(g) =
                auto_extend_grid(|q| Ok::<f64, MfError>(p(q)), sc.q_min, sc.q_max, sc.q_step)
            {
                return g;
            }
        }
    }
    linspace(sc.q_min, sc.q_max, points.max(2))
}

fn single_potential<'a>(sc: &'a Scenario) -> Result<&'a Potential64> {
    match &sc.potential {
        BuiltPotential::Single(p) => Ok(p),
        BuiltPotential::PerPart(_) => bail!("this analysis does not accept per-part potentials"),
    }
}

pub fn execute(sc: &Scenario, out_dir: &Path, budget: f64) -> Result<RunOutcome> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let mut files = Vec::new();
    match sc.analysis {
        Analysis::Pressure | Analysis::PhaseReport => run_pressure(sc, out_dir, &mut files)?,
        Analysis::Birkhoff => run_birkhoff(sc, out_dir, &mut files, budget)?,
        Analysis::Entropy => run_entropy(sc, out_dir, &mut files)?,
        Analysis::Lyapunov => run_lyapunov(sc, out_dir, &mut files)?,
        Analysis::Dimension => run_dimension(sc, out_dir, &mut files)?,
        Analysis::OracleCompare => run_oracle_compare(sc, out_dir, &mut files, budget)?,
    }
    Ok(RunOutcome { files })
}

/// Pressure curve + transitions for whichever system kind is configured.
fn curve_and_refine<'a>(
    sc: &'a Scenario,
    grid: &[f64],
) -> Result<(PressureCurve<f64>, Box<dyn Fn(f64) -> f64 + 'a>)> {
    match (&sc.system, &sc.potential) {
        (BuiltSystem::Sft(sys), BuiltPotential::Single(pot)) => {
            let curve = pressure_curve(sys, pot, grid)?;
            let refine = move |q: f64| pressure_exact_sft(sys, pot, q).unwrap_or(f64::NAN);
            Ok((curve, Box::new(refine)))
        }
        (BuiltSystem::Map { sft, .. }, BuiltPotential::Single(pot)) => {
            if !pot.is_locally_constant() {
                bail!(
                    "exact pressure curves need a locally constant potential; \
                     pointwise potentials are served by the bracketed route (oracle-compare)"
                );
            }
            let curve = pressure_curve(sft, pot, grid)?;
            let refine = move |q: f64| pressure_exact_sft(sft, pot, q).unwrap_or(f64::NAN);
            Ok((curve, Box::new(refine)))
        }
        (BuiltSystem::Glued(g), BuiltPotential::PerPart(pots)) => {
            let curve = pressure_curve_glued(g, pots, grid)?;
            let refine = move |q: f64| {
                pressure_exact_glued(g, pots, q).map(|r| r.0).unwrap_or(f64::NAN)
            };
            Ok((curve, Box::new(refine)))
        }
        _ => bail!("system / potential combination not supported"),
    }
}

fn classify_single(sc: &Scenario) -> Result<Option<RegularityClass<f64>>> {
    let sys = match &sc.system {
        BuiltSystem::Sft(s) => s,
        BuiltSystem::Map { sft, .. } => sft,
        BuiltSystem::Glued(_) => return Ok(None),
    };
    match &sc.potential {
        BuiltPotential::Single(p) => Ok(Some(p.classify(sys)?)),
        BuiltPotential::PerPart(_) => Ok(None),
    }
}

fn equilibrium_auto(sc: &Scenario) -> Option<bool> {
    match &sc.system {
        BuiltSystem::Sft(s) => Some(s.is_irreducible()),
        BuiltSystem::Map { sft, .. } => Some(sft.is_irreducible()),
        BuiltSystem::Glued(g) => Some(g.parts().iter().all(|p| p.is_irreducible())),
    }
}

fn spectrum_options(sc: &Scenario) -> SpectrumOptions<f64> {
    SpectrumOptions {
        sign_flip: false,
        kink_tol: sc.kink_tol,
        equilibrium_available: sc
            .equilibrium_available
            .or_else(|| equilibrium_auto(sc))
            .unwrap_or(false),
        entropy_usc: sc.entropy_usc,
        extra_alphas: sc.alphas.clone(),
        singular_regime: false,
    }
}

fn run_pressure(sc: &Scenario, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let grid = q_grid(sc, None);
    let (curve, refine) = curve_and_refine(sc, &grid)?;
    let f = SampledConvexFunction::from_pressure_curve(&curve, 1e-8)?;
    let transitions = phase_transitions(&f, sc.kink_tol, Some(refine.as_ref()));
    write_file(dir, "pressure.csv", &pressure_csv(&curve), files)?;
    write_file(dir, "transitions.txt", &transitions_txt(&transitions, sc.kink_tol), files)?;
    let report = report_txt(&ReportCtx {
        scenario: sc,
        regularity: classify_single(sc)?,
        equilibrium_auto: equilibrium_auto(sc),
        transitions,
        spectrum: None,
        extra_lines: vec![],
    });
    write_file(dir, "report.txt", &report, files)?;
    Ok(())
}

fn run_birkhoff(sc: &Scenario, dir: &Path, files: &mut Vec<PathBuf>, _budget: f64) -> Result<()> {
    let regularity = classify_single(sc)?;
    let mut opts = spectrum_options(sc);

    // singular potentials are confined to q <= 0
    if let Some(r) = &regularity {
        if r.tag == RegularityTag::SingularAbove {
            if sc.q_max > 0.0 {
                bail!(
                    "potential takes the value +inf: spectra are only available for q <= 0 \
                     (the q > 0 side is open); set q_max <= 0"
                );
            }
            let (BuiltSystem::Sft(sys) | BuiltSystem::Map { sft: sys, .. }) = &sc.system else {
                bail!("singular potentials are supported on subshifts and maps");
            };
            let pot = single_potential(sc)?;
            let grid = q_grid(sc, None);
            opts.singular_regime = true;
            let (curve, spec) = singular_spectrum(sys, pot, &grid, &opts)?;
            write_file(dir, "pressure.csv", &pressure_csv(&curve), files)?;
            write_file(dir, "spectrum.csv", &spectrum_csv(&spec), files)?;
            write_file(dir, "transitions.txt", &transitions_txt(&[], sc.kink_tol), files)?;
            let report = report_txt(&ReportCtx {
                scenario: sc,
                regularity,
                equilibrium_auto: equilibrium_auto(sc),
                transitions: vec![],
                spectrum: Some(&spec),
                extra_lines: vec![
                    "note: q = 0 keeps the counting convention (weight 1 on +inf windows)"
                        .to_string(),
                ],
            });
            write_file(dir, "report.txt", &report, files)?;
            return Ok(());
        }
    }

    let grid = q_grid(sc, None);
    let (curve, refine) = curve_and_refine(sc, &grid)?;
    let f = SampledConvexFunction::from_pressure_curve(&curve, 1e-8)?;
    let transitions = phase_transitions(&f, sc.kink_tol, Some(refine.as_ref()));

    // glued systems get the exact per-part decomposition
    let mut spec = match (&sc.system, &sc.potential) {
        (BuiltSystem::Glued(g), BuiltPotential::PerPart(pots)) => {
            glued_spectrum(g, pots, &grid, &opts)?
        }
        _ => birkhoff_spectrum_legendre(&curve, Some(refine.as_ref()), &opts)?,
    };

    let mut extra_lines = Vec::new();
    if let Some(r) = &regularity {
        if r.tag == RegularityTag::BoundedMeasurable {
            let win = high_entropy_window(&curve, r.h0, Some(refine.as_ref()))?;
            spec = win.apply(&spec);
            for (lo, hi) in &win.i_a {
                extra_lines.push(format!("high-entropy window I_A: [{}, {}]", fmt(*lo), fmt(*hi)));
            }
            for (lo, hi) in &win.i_q {
                extra_lines.push(format!("high-entropy window I_Q: [{}, {}]", fmt(*lo), fmt(*hi)));
            }
        }
    }

    write_file(dir, "pressure.csv", &pressure_csv(&curve), files)?;
    write_file(dir, "spectrum.csv", &spectrum_csv(&spec), files)?;
    write_file(dir, "transitions.txt", &transitions_txt(&transitions, sc.kink_tol), files)?;
    let report = report_txt(&ReportCtx {
        scenario: sc,
        regularity,
        equilibrium_auto: equilibrium_auto(sc),
        transitions,
        spectrum: Some(&spec),
        extra_lines,
    });
    write_file(dir, "report.txt", &report, files)?;
    Ok(())
}

fn run_entropy(sc: &Scenario, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let sys: &SymbolicSystem = match &sc.system {
        BuiltSystem::Sft(s) => s,
        BuiltSystem::Map { sft, .. } => sft,
        BuiltSystem::Glued(_) => bail!("entropy spectra of glued systems are not supported"),
    };
    let pot = single_potential(sc)?;
    if !pot.is_locally_constant() {
        bail!("entropy spectra need a locally constant potential");
    }
    let p_star = pressure_exact_sft(sys, pot, 1.0)?;
    let grid = q_grid(sc, None);
    let opts = spectrum_options(sc);
    let es = entropy_spectrum(sys, pot, p_star, &grid, &opts)?;
    let f = SampledConvexFunction::from_pressure_curve(&es.t_e, 1e-8)?;
    let centered = es.centered.clone();
    let refine = move |q: f64| pressure_exact_sft(sys, &centered, q).unwrap_or(f64::NAN);
    let transitions = phase_transitions(&f, sc.kink_tol, Some(&refine));
    write_file(dir, "pressure.csv", &pressure_csv(&es.t_e), files)?;
    write_file(dir, "spectrum.csv", &spectrum_csv(&es.spectrum), files)?;
    write_file(dir, "transitions.txt", &transitions_txt(&transitions, sc.kink_tol), files)?;
    let report = report_txt(&ReportCtx {
        scenario: sc,
        regularity: classify_single(sc)?,
        equilibrium_auto: equilibrium_auto(sc),
        transitions,
        spectrum: Some(&es.spectrum),
        extra_lines: vec![
            format!("pressure constant P*(phi) = {} (weak Gibbs assumption declared, not verified)", fmt(p_star)),
        ],
    });
    write_file(dir, "report.txt", &report, files)?;
    Ok(())
}

fn run_lyapunov(sc: &Scenario, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let BuiltSystem::Map { map, .. } = &sc.system else {
        bail!("lyapunov analysis needs a map");
    };
    let grid = q_grid(sc, None);
    let opts = spectrum_options(sc);
    let ly = lyapunov_spectra(map, &grid, &opts)?;
    write_file(dir, "pressure.csv", &pressure_csv(&ly.pressure), files)?;
    write_file(dir, "spectrum.csv", &spectrum_csv(&ly.l_e), files)?;
    let mut lcsv = String::from("alpha,l_e,l_d\n");
    for (i, &a) in ly.l_d.alpha_grid.iter().enumerate() {
        let (le, _) = ly.l_e.value_near(a, 1e-12).unwrap_or((f64::NEG_INFINITY, PointStatus::OutOfDomain));
        let _ = writeln!(lcsv, "{},{},{}", fmt(a), fmt(le), fmt(ly.l_d.values[i]));
    }
    write_file(dir, "lyapunov.csv", &lcsv, files)?;
    let f = SampledConvexFunction::from_pressure_curve(&ly.pressure, 1e-8)?;
    let transitions = phase_transitions(&f, sc.kink_tol, None);
    write_file(dir, "transitions.txt", &transitions_txt(&transitions, sc.kink_tol), files)?;
    let report = report_txt(&ReportCtx {
        scenario: sc,
        regularity: None,
        equilibrium_auto: equilibrium_auto(sc),
        transitions,
        spectrum: Some(&ly.l_e),
        extra_lines: vec![
            format!("bowen root (repeller dimension): {}", fmt(ly.bowen_root)),
            format!("max of L_D over the grid: {}", fmt(ly.max_l_d)),
        ],
    });
    write_file(dir, "report.txt", &report, files)?;
    Ok(())
}

fn run_dimension(sc: &Scenario, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let BuiltSystem::Map { map, sft } = &sc.system else {
        bail!("dimension analysis needs a map with a conformal factor, not a bare subshift");
    };
    if !map.is_uniformly_expanding() {
        bail!("dimension spectra need a uniformly expanding map (a(x) > 1 everywhere)");
    }
    let pot = single_potential(sc)?;
    if !pot.is_locally_constant() {
        bail!("dimension spectra need a locally constant potential for the exact route");
    }
    let log_a = Potential::log_conformal_factor(map)?;
    let p_star = pressure_exact_sft(sft, pot, 1.0)?;
    let phi1 = pot.center(p_star);
    let grid = q_grid(sc, None);
    let opts = spectrum_options(sc);
    let ds = dimension_spectrum(sft, &phi1, &log_a, &grid, &opts)?;
    write_file(dir, "pressure.csv", &pressure_csv(&ds.t_d), files)?;
    write_file(dir, "spectrum.csv", &spectrum_csv(&ds.spectrum), files)?;
    let f = SampledConvexFunction::from_pressure_curve(&ds.t_d, 1e-7)?;
    let transitions = phase_transitions(&f, sc.kink_tol, None);
    write_file(dir, "transitions.txt", &transitions_txt(&transitions, sc.kink_tol), files)?;
    let report = report_txt(&ReportCtx {
        scenario: sc,
        regularity: classify_single(sc)?,
        equilibrium_auto: equilibrium_auto(sc),
        transitions,
        spectrum: Some(&ds.spectrum),
        extra_lines: vec![
            format!("centering constant P*(phi) = {}", fmt(p_star)),
            format!(
                "(q,t)-pressure kink-free on the strip below T_D: {}",
                ds.smooth_strip
            ),
        ],
    });
    write_file(dir, "report.txt", &report, files)?;
    Ok(())
}

fn run_oracle_compare(
    sc: &Scenario,
    dir: &Path,
    files: &mut Vec<PathBuf>,
    budget: f64,
) -> Result<()> {
    let (sys, map) = match &sc.system {
        BuiltSystem::Sft(s) => (s, None),
        BuiltSystem::Map { sft, map } => (sft, Some(&*map)),
        BuiltSystem::Glued(_) => bail!("oracle-compare runs on a single subshift or map"),
    };
    let pot = single_potential(sc)?;
    if !pot.is_locally_constant() {
        bail!("oracle-compare needs a locally constant potential for the exact spectrum side");
    }
    let grid = q_grid(sc, None);
    let curve = pressure_curve(sys, pot, &grid)?;
    let refine = |q: f64| pressure_exact_sft(sys, pot, q).unwrap_or(f64::NAN);

    // α checkpoints: configured, or an interior sweep of the domain
    let alphas: Vec<f64> = if sc.alphas.is_empty() {
        let f = SampledConvexFunction::from_pressure_curve(&curve, 1e-8)?;
        let b = multifractal::legendre::alpha_bounds(&f);
        let (lo, hi) = (b.alpha_min, b.alpha_max);
        (1..=17).map(|k| lo + (hi - lo) * k as f64 / 18.0).collect()
    } else {
        sc.alphas.clone()
    };
    let mut opts = spectrum_options(sc);
    opts.extra_alphas = alphas.clone();
    let spec = birkhoff_spectrum_legendre(&curve, Some(&refine), &opts)?;
    let est =
        birkhoff_spectrum_direct(sys, pot, &alphas, sc.epsilon, &sc.n_list, map, budget)?;
    let rows: Vec<(OracleEstimate<f64>, f64)> = est
        .into_iter()
        .map(|e| {
            let leg = spec.value_near(e.alpha, 1e-9).map(|(v, _)| v).unwrap_or(f64::NEG_INFINITY);
            (e, leg)
        })
        .collect();
    write_file(dir, "pressure.csv", &pressure_csv(&curve), files)?;
    write_file(dir, "spectrum.csv", &spectrum_csv(&spec), files)?;
    write_file(dir, "oracle.csv", &oracle_csv(&rows), files)?;
    let worst = rows
        .iter()
        .filter(|(e, leg)| e.estimate.is_finite() && leg.is_finite())
        .map(|(e, leg)| (e.estimate - leg).abs())
        .fold(0.0f64, f64::max);
    let report = report_txt(&ReportCtx {
        scenario: sc,
        regularity: classify_single(sc)?,
        equilibrium_auto: equilibrium_auto(sc),
        transitions: vec![],
        spectrum: Some(&spec),
        extra_lines: vec![format!(
            "direct-oracle max |estimate - transform| over finite rows: {}",
            fmt(worst)
        )],
    });
    write_file(dir, "report.txt", &report, files)?;
    Ok(())
}

/// Map library errors to process exit codes: budget overruns get their own
/// code so callers can distinguish them from bad configs.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(MfError::BudgetExceeded { .. }) = cause.downcast_ref::<MfError>() {
            return 3;
        }
    }
    1
}
