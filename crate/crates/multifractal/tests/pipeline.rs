//! Cross-module pipeline invariants: bracket consistency between the
//! spectral and enumeration routes, duality through the assembled spectrum,
//! the oracle upper-bound law, and bit-stability across thread pools.

use multifractal::legendre::transform_l2;
use multifractal::potentials::Potential;
use multifractal::spectra::{
    birkhoff_spectrum_direct, birkhoff_spectrum_legendre, SpectrumOptions,
};
use multifractal::systems::SymbolicSystem;
use multifractal::thermo::{
    linspace, pressure_bracketed, pressure_curve, pressure_exact_sft, rpf_equilibrium,
};

fn fixtures() -> Vec<(SymbolicSystem, Potential<f64>)> {
    vec![
        (SymbolicSystem::full_shift(2), Potential::per_symbol(&[0.0, 1.0]).unwrap()),
        (SymbolicSystem::full_shift(3), Potential::per_symbol(&[-0.5, 0.2, 1.1]).unwrap()),
        (SymbolicSystem::golden_mean(), Potential::per_symbol(&[0.3, -0.4]).unwrap()),
        (
            SymbolicSystem::golden_mean(),
            Potential::locally_constant(2, 2, vec![0.1, -0.2, 0.4, 0.0]).unwrap(),
        ),
    ]
}

#[test]
fn bracket_consistency_across_fixtures() {
    for (sys, pot) in fixtures() {
        for q in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            let exact = pressure_exact_sft(&sys, &pot, q).unwrap();
            for n in [4usize, 8, 12, 16] {
                let (lo, hi) = pressure_bracketed(&sys, &pot, q, n, None, 1e8).unwrap();
                assert!(
                    lo - 1e-9 <= exact && exact <= hi + 1e-9,
                    "{} q={q} n={n}: {exact} not in [{lo}, {hi}]",
                    sys.label()
                );
            }
        }
    }
}

#[test]
fn bracket_widths_shrink() {
    for (sys, pot) in fixtures() {
        let width = |n: usize| {
            let (lo, hi) = pressure_bracketed(&sys, &pot, 1.0, n, None, 1e8).unwrap();
            hi - lo
        };
        assert!(width(16) <= width(4) + 1e-12, "{}", sys.label());
    }
}

#[test]
fn variational_inequality_everywhere() {
    for (sys, pot) in fixtures() {
        for q_measure in [-1.0, 0.0, 2.0] {
            let m = rpf_equilibrium(&sys, &pot, q_measure).unwrap();
            let integral = m.integral_of(&pot).unwrap();
            for q in linspace(-4.0f64, 4.0, 33) {
                let t = pressure_exact_sft(&sys, &pot, q).unwrap();
                assert!(
                    m.entropy + q * integral <= t + 1e-9,
                    "{} measure@{q_measure} tested at q={q}",
                    sys.label()
                );
            }
        }
    }
}

#[test]
fn golden_mean_duality_roundtrip() {
    let sys = SymbolicSystem::golden_mean();
    let pot = Potential::per_symbol(&[0.0f64, 1.0]).unwrap();
    let grid: Vec<f64> = linspace(-20.0, 20.0, 4001);
    let curve = pressure_curve(&sys, &pot, &grid).unwrap();
    let refine = |q: f64| pressure_exact_sft(&sys, &pot, q).unwrap();
    let spec =
        birkhoff_spectrum_legendre(&curve, Some(&refine), &SpectrumOptions::default()).unwrap();
    for q in linspace(-10.0f64, 10.0, 81) {
        let back = transform_l2(&spec.alpha_grid, &spec.values, q).value;
        let t = pressure_exact_sft(&sys, &pot, q).unwrap();
        assert!((back - t).abs() < 5e-3, "q={q}: {back} vs {t}");
    }
}

#[test]
fn oracle_upper_bound_law_golden_mean() {
    // estimate <= transform + 2 eps |q*| + 1e-6 at every alpha and n
    let sys = SymbolicSystem::golden_mean();
    let pot = Potential::per_symbol(&[0.0f64, 1.0]).unwrap();
    let grid: Vec<f64> = linspace(-20.0, 20.0, 2001);
    let curve = pressure_curve(&sys, &pot, &grid).unwrap();
    let refine = |q: f64| pressure_exact_sft(&sys, &pot, q).unwrap();
    let eps = 0.05;
    let alphas: Vec<f64> = (1..25).map(|k| k as f64 / 50.0).collect();
    let opts = SpectrumOptions { extra_alphas: alphas.clone(), ..Default::default() };
    let spec = birkhoff_spectrum_legendre(&curve, Some(&refine), &opts).unwrap();
    let est = birkhoff_spectrum_direct(&sys, &pot, &alphas, eps, &[10, 16], None, 1e8).unwrap();
    for e in est {
        if !e.estimate.is_finite() {
            continue;
        }
        let (b, _) = spec.value_near(e.alpha, 1e-9).unwrap();
        // on the golden-mean fixture the dual slope is bounded by the grid
        let q_star = 20.0;
        assert!(
            e.estimate <= b.max(0.0) + 2.0 * eps * q_star + 1e-6,
            "alpha={} n={}: {} vs {}",
            e.alpha,
            e.n,
            e.estimate,
            b
        );
    }
}

#[test]
fn thread_pools_do_not_change_bits() {
    let sys = SymbolicSystem::golden_mean();
    let pot = Potential::locally_constant(2, 2, vec![0.1, -0.2, 0.4, 0.0]).unwrap();
    let compute = || {
        let (lo, hi): (f64, f64) = pressure_bracketed(&sys, &pot, 1.3, 14, None, 1e8).unwrap();
        let est = birkhoff_spectrum_direct(&sys, &pot, &[0.0, 0.1, 0.2], 0.05, &[12], None, 1e8)
            .unwrap();
        (lo, hi, est.iter().map(|e| e.count).collect::<Vec<_>>())
    };
    let mut results = Vec::new();
    for threads in [1usize, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        results.push(pool.install(compute));
    }
    assert_eq!(results[0], results[1]);
    assert_eq!(results[0], results[2]);
    assert!(results[0].0.is_finite());
}
