use super::*;
use crate::legendre::transform_l2;
use crate::potentials::{Potential, RegularityTag};
use crate::systems::{GluedSystem, PiecewiseConformalMap, SymbolicSystem};
use crate::thermo::{linspace, rpf_equilibrium};

const LOG_2: f64 = std::f64::consts::LN_2;

fn binary_entropy(a: f64) -> f64 {
    if a <= 0.0 || a >= 1.0 {
        0.0
    } else {
        -a * a.ln() - (1.0 - a) * (1.0 - a).ln()
    }
}

fn v01() -> Potential<f64> {
    Potential::per_symbol(&[0.0, 1.0]).unwrap()
}

fn full2_spectrum(span: f64, step: f64) -> SpectrumCurve<f64> {
    let sys = SymbolicSystem::full_shift(2);
    let pot = v01();
    let n = (2.0 * span / step).round() as usize + 1;
    let grid: Vec<f64> = linspace(-span, span, n);
    let curve = pressure_curve(&sys, &pot, &grid).unwrap();
    let refine = move |q: f64| pressure_exact_sft(&sys, &pot, q).unwrap();
    birkhoff_spectrum_legendre(&curve, Some(&refine), &SpectrumOptions::default()).unwrap()
}

#[test]
fn binary_entropy_spectrum_closed_form() {
    let spec = full2_spectrum(20.0, 0.01);
    let mut checked = 0;
    for (i, &a) in spec.alpha_grid.iter().enumerate() {
        if !(0.05..=0.95).contains(&a) {
            continue;
        }
        checked += 1;
        assert!(
            (spec.values[i] - binary_entropy(a)).abs() < 1e-6,
            "α={a}: {} vs {}",
            spec.values[i],
            binary_entropy(a)
        );
        assert_eq!(spec.status[i], PointStatus::ProvedEqual);
    }
    assert!(checked > 100, "only {checked} α values in the window");
    assert!(spec.is_discretely_concave(1e-9));
}

#[test]
fn zero_potential_single_point() {
    let sys = SymbolicSystem::full_shift(3);
    let pot = Potential::constant(3, 0.0f64);
    let grid: Vec<f64> = linspace(-5.0, 5.0, 201);
    let curve = pressure_curve(&sys, &pot, &grid).unwrap();
    let opts = SpectrumOptions { extra_alphas: vec![-0.4, 0.3], ..Default::default() };
    let spec = birkhoff_spectrum_legendre(&curve, None, &opts).unwrap();
    // affine pressure: exactly one finite point at α = 0 with value log 3
    let finite: Vec<usize> = (0..spec.len()).filter(|&i| spec.values[i].is_finite()).collect();
    assert_eq!(finite.len(), 1);
    let i = finite[0];
    assert!(spec.alpha_grid[i].abs() < 1e-12);
    assert!((spec.values[i] - 3.0f64.ln()).abs() < 1e-10);
    for &j in &[0usize, spec.len() - 1] {
        if j != i {
            assert_eq!(spec.status[j], PointStatus::OutOfDomain);
            assert_eq!(spec.values[j], f64::NEG_INFINITY);
        }
    }
}

fn crossing_glued() -> (GluedSystem, Vec<Potential<f64>>) {
    let glued = GluedSystem::new(vec![
        SymbolicSystem::full_shift(2),
        SymbolicSystem::full_shift(2),
    ])
    .unwrap();
    let pots = vec![
        Potential::per_symbol(&[0.0, 0.0]).unwrap(),
        Potential::per_symbol(&[1.0, 1.0]).unwrap(),
    ];
    (glued, pots)
}

#[test]
fn glued_without_decomposition_marks_hull_gap() {
    use crate::thermo::{pressure_curve_glued, pressure_exact_glued};
    let (glued, pots) = crossing_glued();
    let grid: Vec<f64> = linspace(-5.0, 5.0, 1001);
    let curve = pressure_curve_glued(&glued, &pots, &grid).unwrap();
    let refine = |q: f64| pressure_exact_glued(&glued, &pots, q).unwrap().0;
    let spec =
        birkhoff_spectrum_legendre(&curve, Some(&refine), &SpectrumOptions::default()).unwrap();
    // hull over the kink gap (0,1): value log 2, hull-only status
    let mut gap_points = 0;
    for (i, &a) in spec.alpha_grid.iter().enumerate() {
        if a > 0.05 && a < 0.95 {
            gap_points += 1;
            assert!((spec.values[i] - LOG_2).abs() < 1e-9, "hull at {a}: {}", spec.values[i]);
            assert_eq!(spec.status[i], PointStatus::ConcaveHullUpperBound, "α={a}");
        }
    }
    assert!(gap_points >= 10);
}

#[test]
fn glued_spectrum_is_exact_and_non_concave() {
    let (glued, pots) = crossing_glued();
    let grid: Vec<f64> = linspace(-5.0, 5.0, 201);
    let opts = SpectrumOptions { extra_alphas: vec![0.5], ..Default::default() };
    let spec = glued_spectrum(&glued, &pots, &grid, &opts).unwrap();
    // two isolated points at α = 0 and α = 1, both log 2; -inf between
    let (v0, s0) = spec.value_near(0.0, 1e-9).unwrap();
    let (v1, s1) = spec.value_near(1.0, 1e-9).unwrap();
    assert!((v0 - LOG_2).abs() < 1e-10 && (v1 - LOG_2).abs() < 1e-10);
    assert_eq!(s0, PointStatus::GluedExact);
    assert_eq!(s1, PointStatus::GluedExact);
    let (vm, sm) = spec.value_near(0.5, 1e-9).unwrap();
    assert_eq!(vm, f64::NEG_INFINITY);
    assert_eq!(sm, PointStatus::OutOfDomain);
    // non-concave across the gap, while its hull is concave and above it
    assert!(!spec.is_discretely_concave(1e-9));

    let q_grid: Vec<f64> = linspace(-30.0, 30.0, 601);
    let tvals: Vec<f64> = q_grid
        .iter()
        .map(|&q| transform_l2(&spec.alpha_grid, &spec.values, q).value)
        .collect();
    let hull_f =
        crate::legendre::SampledConvexFunction::new(q_grid, tvals, 1e-9, "hull").unwrap();
    for (i, &a) in spec.alpha_grid.iter().enumerate() {
        let h = crate::legendre::transform_l1(&hull_f, a, None).value;
        assert!(h >= spec.values[i] - 1e-12, "hull below spectrum at α={a}");
    }
}

#[test]
fn glued_translated_entropy_curves() {
    // v=(0,1), w=(2,3): part spectra are H(α) on (0,1) and H(α-2) on (2,3)
    let glued = GluedSystem::new(vec![
        SymbolicSystem::full_shift(2),
        SymbolicSystem::full_shift(2),
    ])
    .unwrap();
    let pots = vec![
        Potential::per_symbol(&[0.0, 1.0]).unwrap(),
        Potential::per_symbol(&[2.0, 3.0]).unwrap(),
    ];
    let grid: Vec<f64> = linspace(-14.0, 14.0, 1401);
    let spec = glued_spectrum(&glued, &pots, &grid, &SpectrumOptions::default()).unwrap();
    for (i, &a) in spec.alpha_grid.iter().enumerate() {
        let expect = if a > 0.03 && a < 0.97 {
            binary_entropy(a)
        } else if a > 2.03 && a < 2.97 {
            binary_entropy(a - 2.0)
        } else {
            continue;
        };
        assert!((spec.values[i] - expect).abs() < 1e-5, "α={a}");
        assert_eq!(spec.status[i], PointStatus::GluedExact);
    }
    // single-part glue degenerates to the plain route
    let single = GluedSystem::new(vec![SymbolicSystem::full_shift(2)]).unwrap();
    let spec1 =
        glued_spectrum(&single, &pots[..1].to_vec(), &grid, &SpectrumOptions::default()).unwrap();
    let plain = full2_spectrum(14.0, 0.02);
    for (i, &a) in spec1.alpha_grid.iter().enumerate() {
        if a < 0.05 || a > 0.95 {
            continue;
        }
        let (v, _) = plain.value_near(a, 2e-3).expect("nearby plain α");
        assert!((spec1.values[i] - v).abs() < 2e-3, "α={a}");
    }
}

#[test]
fn oracle_lattice_agreement_and_bounds() {
    let sys = SymbolicSystem::full_shift(2);
    let pot = v01();
    // lattice α in [0.1, 0.9]: outside it the ε-window bias ~ ε |H'(α)|
    // exceeds the agreement tolerance (boundary effect)
    let alphas: Vec<f64> = (2..=18).map(|k| k as f64 / 20.0).collect();
    let est = birkhoff_spectrum_direct(&sys, &pot, &alphas, 0.05, &[20], None, 1e8).unwrap();
    let total = sys.word_count::<f64>(20).unwrap().exact().unwrap() as u64;
    for e in &est {
        // counting invariants
        assert!(e.count <= total);
        assert!(e.estimate <= (total as f64).ln() / 20.0 + 1e-12);
        // two-sided agreement at lattice α
        let d = (e.estimate - binary_entropy(e.alpha)).abs();
        assert!(d < 0.05, "α={}: |{} - {}| = {d}", e.alpha, e.estimate, binary_entropy(e.alpha));
    }
    // α outside [0,1]: empty level set
    let est = birkhoff_spectrum_direct(&sys, &pot, &[-0.2, 1.2], 0.05, &[12], None, 1e8).unwrap();
    for e in est {
        assert_eq!(e.count, 0);
        assert_eq!(e.estimate, f64::NEG_INFINITY);
    }
    // α = 0: only the few words with at most ε fraction of ones
    let est = birkhoff_spectrum_direct(&sys, &pot, &[0.0], 0.01, &[20], None, 1e8).unwrap();
    assert_eq!(est[0].count, 1); // the all-zeros word
}

#[test]
fn oracle_upper_bound_law() {
    // estimate <= transform + 2 ε |q*| + 1e-6 at every α, certified
    let sys = SymbolicSystem::full_shift(2);
    let pot = v01();
    let spec = full2_spectrum(20.0, 0.01);
    let eps = 0.05;
    let alphas: Vec<f64> = (1..50).map(|k| k as f64 / 50.0).collect();
    let est = birkhoff_spectrum_direct(&sys, &pot, &alphas, eps, &[14, 20], None, 1e8).unwrap();
    for e in est {
        let (b, _) = spec.value_near(e.alpha, 5e-3).expect("spectrum value");
        // q* = H'(α) for the binary fixture
        let q_star = ((1.0 - e.alpha) / e.alpha).ln().abs();
        assert!(
            e.estimate <= b + 2.0 * eps * q_star + 1e-6 + 5e-3,
            "α={} n={}: {} vs {}",
            e.alpha,
            e.n,
            e.estimate,
            b
        );
    }
}

#[test]
fn oracle_trace_is_monotone_trace() {
    let sys = SymbolicSystem::full_shift(2);
    let pot = v01();
    let est =
        birkhoff_spectrum_direct(&sys, &pot, &[0.5], 0.05, &[5, 10, 15, 20], None, 1e8).unwrap();
    let trace = oracle_trace(&est, 0.5);
    assert_eq!(trace.len(), 4);
    assert!(trace.windows(2).all(|w| w[0].0 < w[1].0));
}

#[test]
fn entropy_spectrum_reflection() {
    let sys = SymbolicSystem::full_shift(2);
    let pot = v01();
    let p_star = pressure_exact_sft(&sys, &pot, 1.0).unwrap();
    let grid: Vec<f64> = linspace(-20.0, 20.0, 2001);
    let m = rpf_equilibrium(&sys, &pot, 1.0).unwrap();
    let h = m.entropy;
    let opts = SpectrumOptions { extra_alphas: vec![h], ..Default::default() };
    let es = entropy_spectrum(&sys, &pot, p_star, &grid, &opts).unwrap();
    // E(α) = B(P - α) = H(P - α) for α in (P-1, P)
    for (i, &a) in es.spectrum.alpha_grid.iter().enumerate() {
        let b = p_star - a;
        if b < 0.05 || b > 0.95 {
            continue;
        }
        assert!(
            (es.spectrum.values[i] - binary_entropy(b)).abs() < 1e-6,
            "α={a}: {} vs {}",
            es.spectrum.values[i],
            binary_entropy(b)
        );
    }
    // the Gibbs measure's entropy sits on the spectrum: E(h) = h
    let (v, _) = es.spectrum.value_near(h, 1e-9).expect("α = h on grid");
    assert!((v - h).abs() < 1e-7, "E(h)={v} vs h={h}");

    // φ ≡ 0: single point E(log m) = log m
    let zero = Potential::constant(2, 0.0f64);
    let es0 = entropy_spectrum(&sys, &zero, LOG_2, &grid, &SpectrumOptions::default()).unwrap();
    let finite: Vec<usize> =
        (0..es0.spectrum.len()).filter(|&i| es0.spectrum.values[i].is_finite()).collect();
    assert_eq!(finite.len(), 1);
    assert!((es0.spectrum.alpha_grid[finite[0]] - LOG_2).abs() < 1e-10);
    assert!((es0.spectrum.values[finite[0]] - LOG_2).abs() < 1e-10);
}

#[test]
fn entropy_spectrum_binomial_measure() {
    // Bernoulli(1/4, 3/4) log-weights: P*(φ) = 0, so φ1 = φ and the entropy
    // spectrum is the classical binomial one: E(α) = inf_q (T(q) + qα)
    let sys = SymbolicSystem::full_shift(2);
    let pot = Potential::per_symbol(&[0.25f64.ln(), 0.75f64.ln()]).unwrap();
    let grid: Vec<f64> = linspace(-25.0, 25.0, 2501);
    // closed form via the dual parametrization α(q) = -T'(q), E = T + qα
    let t = |q: f64| (0.25f64.powf(q) + 0.75f64.powf(q)).ln();
    let h = 1e-6;
    let duals: Vec<(f64, f64)> = [-2.0, -0.5, 0.0, 1.0, 3.0]
        .iter()
        .map(|&q| {
            let alpha = -(t(q + h) - t(q - h)) / (2.0 * h);
            (alpha, t(q) + q * alpha)
        })
        .collect();
    let opts = SpectrumOptions {
        extra_alphas: duals.iter().map(|&(a, _)| a).collect(),
        ..Default::default()
    };
    let es = entropy_spectrum(&sys, &pot, 0.0, &grid, &opts).unwrap();
    for &(alpha, expect) in &duals {
        let (v, _) = es.spectrum.value_near(alpha, 1e-9).expect("α on grid");
        assert!((v - expect).abs() < 1e-6, "α={alpha}: {v} vs {expect}");
    }
}

#[test]
fn weak_gibbs_bernoulli_exact_and_wrong_p() {
    let sys = SymbolicSystem::full_shift(2);
    let pot = Potential::per_symbol(&[0.25f64.ln(), 0.75f64.ln()]).unwrap();
    // exact product measure: residual sums cancel term by term, bitwise
    let m = crate::thermo::MarkovMeasure::bernoulli(&[0.25f64, 0.75]).unwrap();
    // deterministic sample words
    let words: Vec<Vec<u8>> = (0..40u32)
        .map(|seed| {
            let mut x = seed as u64 * 2654435761 + 12345;
            (0..30)
                .map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((x >> 33) % 4 != 0) as u8 // ~Bernoulli(1/4, 3/4)
                })
                .collect()
        })
        .collect();
    let ns = vec![5usize, 10, 15, 20, 25];
    let rep = weak_gibbs_check(&sys, &pot, &m, &words, &ns, 0.0).unwrap();
    assert!(rep.pass);
    for r in &rep.max_residuals {
        assert_eq!(*r, 0.0, "Bernoulli residuals must vanish identically");
    }
    assert_eq!(rep.c_fit, 0.0);

    // wrong P by 0.1: residuals sit at 0.1 and the 1/n fit fails
    let rep = weak_gibbs_check(&sys, &pot, &m, &words, &ns, 0.1).unwrap();
    assert!(!rep.pass);
    for r in &rep.max_residuals {
        assert!((r - 0.1).abs() < 1e-12);
    }
}

#[test]
fn weak_gibbs_zero_mass_flagged() {
    // golden-mean Parry measure never charges the word "11"
    let g = SymbolicSystem::golden_mean();
    let zero = Potential::constant(2, 0.0f64);
    let m = rpf_equilibrium(&g, &zero, 0.0).unwrap();
    let full = SymbolicSystem::full_shift(2);
    let words = vec![vec![1u8; 12]];
    let rep = weak_gibbs_check(&full, &zero, &m, &words, &[4, 8], g.topological_entropy()).unwrap();
    assert!(rep.zero_mass_flag);
    assert!(!rep.pass);
}

#[test]
fn high_entropy_window_closed_form() {
    let sys = SymbolicSystem::full_shift(2);
    let pot = v01();
    let grid: Vec<f64> = linspace(-20.0, 20.0, 4001);
    let curve = pressure_curve(&sys, &pot, &grid).unwrap();
    let refine = |q: f64| pressure_exact_sft(&sys, &pot, q).unwrap();
    let h0 = LOG_2 - 0.1;
    let win = high_entropy_window(&curve, h0, Some(&refine)).unwrap();
    assert_eq!(win.i_a.len(), 1);
    let (lo, hi) = win.i_a[0];
    // invert H by bisection (independent oracle)
    let mut a = 1e-9;
    let mut b = 0.5;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if binary_entropy(mid) < h0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let alpha_lo = 0.5 * (a + b);
    assert!((lo - alpha_lo).abs() < 1e-3, "left edge {lo} vs {alpha_lo}");
    assert!((hi - (1.0 - alpha_lo)).abs() < 1e-3, "right edge {hi}");
    assert!(!win.i_q.is_empty());

    // downgrade statuses outside the window
    let spec = full2_spectrum(20.0, 0.01);
    let down = win.apply(&spec);
    let mut downgraded = 0;
    for (i, &a) in down.alpha_grid.iter().enumerate() {
        if down.values[i].is_finite() && !win.contains_alpha(a) {
            assert_eq!(down.status[i], PointStatus::HighEntropyWindow);
            assert!(down.values[i] <= h0 + 1e-9, "bound violated at α={a}");
            downgraded += 1;
        }
    }
    assert!(downgraded > 0);

    // h0 = 0: full open domain survives
    let win0 = high_entropy_window(&curve, 0.0, Some(&refine)).unwrap();
    assert_eq!(win0.i_a.len(), 1);
    assert!(win0.i_a[0].0 < 0.01 && win0.i_a[0].1 > 0.99);
    // h0 >= log 2: everything downgraded
    let win_all = high_entropy_window(&curve, LOG_2, Some(&refine)).unwrap();
    assert!(win_all.i_a.is_empty());
    let down_all = win_all.apply(&spec);
    for (i, _) in down_all.alpha_grid.iter().enumerate() {
        if down_all.values[i].is_finite() {
            assert_eq!(down_all.status[i], PointStatus::HighEntropyWindow);
        }
    }
}

#[test]
fn singular_spectra_fixtures() {
    let sys = SymbolicSystem::full_shift(2);
    let grid: Vec<f64> = linspace(-8.0, 0.0, 801);
    // v = (1, +inf): T(q) = q on q < 0, single point B(1) = 0
    let pot = Potential::per_symbol(&[1.0, f64::INFINITY]).unwrap();
    assert_eq!(pot.classify(&sys).unwrap().tag, RegularityTag::SingularAbove);
    let (curve, spec) = singular_spectrum(&sys, &pot, &grid, &SpectrumOptions::default()).unwrap();
    for (i, &q) in curve.q_grid.iter().enumerate() {
        if q < -1e-12 {
            assert!((curve.values[i] - q).abs() < 1e-10, "T({q}) = {}", curve.values[i]);
        }
    }
    let finite: Vec<usize> = (0..spec.len()).filter(|&i| spec.values[i].is_finite()).collect();
    assert_eq!(finite.len(), 1, "{:?}", spec.alpha_grid);
    let i = finite[0];
    assert!((spec.alpha_grid[i] - 1.0).abs() < 1e-9);
    assert!(spec.values[i].abs() < 1e-9);
    assert_eq!(spec.status[i], PointStatus::SingularRegime);

    // v = (0, +inf): T = 0 on q < 0, single point B(0) = 0
    let pot0 = Potential::per_symbol(&[0.0, f64::INFINITY]).unwrap();
    let (curve0, spec0) =
        singular_spectrum(&sys, &pot0, &grid, &SpectrumOptions::default()).unwrap();
    for (i, &q) in curve0.q_grid.iter().enumerate() {
        if q < -1e-12 {
            assert!(curve0.values[i].abs() < 1e-10);
        }
    }
    let finite: Vec<usize> = (0..spec0.len()).filter(|&i| spec0.values[i].is_finite()).collect();
    assert_eq!(finite.len(), 1);
    assert!(spec0.alpha_grid[finite[0]].abs() < 1e-9);
    assert!(spec0.values[finite[0]].abs() < 1e-9);

    // positive q rejected
    let bad: Vec<f64> = linspace(-1.0, 1.0, 21);
    assert!(matches!(
        singular_spectrum(&sys, &pot, &bad, &SpectrumOptions::default()),
        Err(crate::error::Error::SingularPositiveQ { .. })
    ));

    // finite table: identical to the ordinary route on q <= 0
    let fin = v01();
    let (_, spec_f) = singular_spectrum(&sys, &fin, &grid, &SpectrumOptions::default()).unwrap();
    for (i, &a) in spec_f.alpha_grid.iter().enumerate() {
        if a > 0.05 && a < 0.45 {
            assert!((spec_f.values[i] - binary_entropy(a)).abs() < 1e-5, "α={a}");
        }
    }
}

#[test]
fn duality_part_one_reproduces_pressure() {
    // L2 over the ProvedEqual points reproduces T within 5e-3
    let sys = SymbolicSystem::full_shift(2);
    let pot = v01();
    let spec = full2_spectrum(20.0, 0.01);
    let proved: (Vec<f64>, Vec<f64>) = spec
        .alpha_grid
        .iter()
        .zip(spec.values.iter())
        .zip(spec.status.iter())
        .filter(|(_, &s)| s == PointStatus::ProvedEqual)
        .map(|((&a, &v), _)| (a, v))
        .unzip();
    for q in [-6.0f64, -2.0, -0.5, 0.0, 0.5, 2.0, 6.0] {
        let t = transform_l2(&proved.0, &proved.1, q).value;
        let expect = pressure_exact_sft(&sys, &pot, q).unwrap();
        assert!((t - expect).abs() < 5e-3, "q={q}: {t} vs {expect}");
    }
}

#[test]
fn lyapunov_spectra_fixtures() {
    // doubling map: single exponent log 2, L_D = 1, Bowen root 1
    let map = PiecewiseConformalMap::<f64>::from_slopes("doubling", &[2.0, 2.0]).unwrap();
    let grid: Vec<f64> = linspace(-10.0, 10.0, 401);
    let ly = lyapunov_spectra(&map, &grid, &SpectrumOptions::default()).unwrap();
    assert!((ly.bowen_root - 1.0).abs() < 1e-10);
    // slope-grid quantization (~1e-11) times the q-range bounds the error
    let (le, _) = ly.l_e.value_near(LOG_2, 1e-9).unwrap();
    assert!((le - LOG_2).abs() < 1e-8);
    let (ld, _) = ly.l_d.value_near(LOG_2, 1e-9).unwrap();
    assert!((ld - 1.0).abs() < 1e-8);
    assert!((ly.max_l_d - 1.0).abs() < 1e-8);

    // slopes (2,4): Bowen root log2(golden), max L_D = root
    let map = PiecewiseConformalMap::<f64>::from_slopes("two-four", &[2.0, 4.0]).unwrap();
    let grid: Vec<f64> = linspace(-30.0, 30.0, 3001);
    let ly = lyapunov_spectra(&map, &grid, &SpectrumOptions::default()).unwrap();
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    let expect = golden.ln() / LOG_2;
    assert!((ly.bowen_root - expect).abs() < 1e-6, "{} vs {expect}", ly.bowen_root);
    assert!((ly.max_l_d - ly.bowen_root).abs() < 1e-6, "max L_D {}", ly.max_l_d);
    // endpoint: L_E at α = log 2 tends to zero, so L_D does too
    let (le, _) = ly.l_e.value_near(LOG_2, 2e-4).unwrap();
    assert!(le.abs() < 1e-3, "L_E near log 2: {le}");
    // L_D(α) = L_E(α)/α pointwise by construction
    for (i, &a) in ly.l_d.alpha_grid.iter().enumerate() {
        if ly.l_d.values[i].is_finite() {
            let (le, _) = ly.l_e.value_near(a, 1e-12).unwrap();
            assert_eq!(ly.l_d.values[i], le / a);
        }
    }
}

#[test]
fn dimension_t_closed_forms() {
    let map = PiecewiseConformalMap::<f64>::from_slopes("doubling", &[2.0, 2.0]).unwrap();
    let sys = map.symbolic().unwrap();
    let log_a = Potential::log_conformal_factor(&map).unwrap();

    // Bernoulli(1/2,1/2): T_D(q) = 1 - q
    let phi_half = Potential::per_symbol(&[0.5f64.ln(), 0.5f64.ln()]).unwrap();
    for q in [-3.0, 0.0, 1.0, 2.5] {
        let t = dimension_t(&sys, &phi_half, &log_a, q).unwrap();
        assert!((t - (1.0 - q)).abs() < 1e-10, "q={q}: {t}");
    }

    // Bernoulli(1/4,3/4): T_D(q) = log2((1/4)^q + (3/4)^q)
    let phi = Potential::per_symbol(&[0.25f64.ln(), 0.75f64.ln()]).unwrap();
    for i in 0..=20 {
        let q = -5.0 + i as f64 * 0.5;
        let t = dimension_t(&sys, &phi, &log_a, q).unwrap();
        let expect = (0.25f64.powf(q) + 0.75f64.powf(q)).log2();
        assert!((t - expect).abs() < 1e-8, "q={q}: {t} vs {expect}");
    }
    // pinned identities
    let t1 = dimension_t(&sys, &phi, &log_a, 1.0).unwrap();
    assert!(t1.abs() < 1e-10, "T_D(1) = {t1}");
    let t0 = dimension_t(&sys, &phi, &log_a, 0.0).unwrap();
    assert!((t0 - 1.0).abs() < 1e-10, "T_D(0) = {t0}");
    let root = bowen_root(&sys, &log_a).unwrap();
    assert!((t0 - root).abs() < 1e-10, "T_D(0) vs Bowen root");
}

#[test]
fn dimension_spectrum_binomial() {
    let map = PiecewiseConformalMap::<f64>::from_slopes("doubling", &[2.0, 2.0]).unwrap();
    let sys = map.symbolic().unwrap();
    let log_a = Potential::log_conformal_factor(&map).unwrap();
    let phi = Potential::per_symbol(&[0.25f64.ln(), 0.75f64.ln()]).unwrap();
    let grid: Vec<f64> = linspace(-8.0, 8.0, 321);
    // peak witness: α at the q = 0 tangent of T_D
    let td = |q: f64| (0.25f64.powf(q) + 0.75f64.powf(q)).log2();
    let hstep = 1e-6;
    let alpha_peak = -(td(hstep) - td(-hstep)) / (2.0 * hstep);
    // information-dimension witness: α1 = -T_D'(1) = h/λ of the measure
    let h_mu = 0.25 * 4.0f64.ln() + 0.75 * (4.0f64 / 3.0).ln();
    let opts = SpectrumOptions {
        extra_alphas: vec![alpha_peak, h_mu / LOG_2],
        ..Default::default()
    };
    let ds = dimension_spectrum(&sys, &phi, &log_a, &grid, &opts).unwrap();
    assert!(ds.smooth_strip);
    // max of the spectrum is T_D(0) = 1, attained at α(q=0)
    let max_v = ds
        .spectrum
        .values
        .iter()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    assert!((max_v - 1.0).abs() < 1e-6, "max D = {max_v}");
    // information-dimension identity: D(α1) = α1 at the q = 1 tangent
    let alpha1 = h_mu / LOG_2;
    let (v, st) = ds.spectrum.value_near(alpha1, 1e-9).expect("α1 on grid");
    assert!((v - alpha1).abs() < 1e-7, "D(α1) = {v} vs α1 = {alpha1}");
    assert_eq!(st, PointStatus::ProvedEqual);

    // Bernoulli(1/2,1/2): affine T_D = 1 - q collapses to the point D(1) = 1
    let phi_half = Potential::per_symbol(&[0.5f64.ln(), 0.5f64.ln()]).unwrap();
    let ds2 =
        dimension_spectrum(&sys, &phi_half, &log_a, &grid, &SpectrumOptions::default()).unwrap();
    let finite: Vec<usize> =
        (0..ds2.spectrum.len()).filter(|&i| ds2.spectrum.values[i].is_finite()).collect();
    assert_eq!(finite.len(), 1);
    let i = finite[0];
    // bisection noise in T_D (~1e-11) times the q-range bounds the error
    assert!((ds2.spectrum.alpha_grid[i] - 1.0).abs() < 1e-8);
    assert!((ds2.spectrum.values[i] - 1.0).abs() < 1e-7);
}

#[test]
fn pointwise_dimension_estimates_converge() {
    // exact Gibbs (Bernoulli) on the doubling map: the cylinder estimate is
    // exact at every n
    let map = PiecewiseConformalMap::<f64>::from_slopes("doubling", &[2.0, 2.0]).unwrap();
    let sys = map.symbolic().unwrap();
    let log_a = Potential::log_conformal_factor(&map).unwrap();
    let phi = Potential::per_symbol(&[0.25f64.ln(), 0.75f64.ln()]).unwrap();
    let m = rpf_equilibrium(&sys, &phi, 1.0).unwrap();
    let dim_expect = m.entropy / LOG_2;
    let est = pointwise_dimension_estimate(&m, &log_a, 18).unwrap();
    assert!((est - dim_expect).abs() < 1e-10, "{est} vs {dim_expect}");

    // depth-2 RPF measure: converges within 0.02 by n = 25
    let table = vec![0.15f64, -0.1, 0.05, 0.2];
    let pot2 = Potential::locally_constant(2, 2, table).unwrap();
    let m2 = rpf_equilibrium(&sys, &pot2, 1.0).unwrap();
    let dim2 = m2.entropy / LOG_2;
    let est2 = pointwise_dimension_estimate(&m2, &log_a, 25).unwrap();
    assert!((est2 - dim2).abs() < 0.02, "{est2} vs {dim2}");
}

#[test]
fn depth2_weak_gibbs_residuals_decay() {
    // depth-2 RPF equilibrium is weak Gibbs with residuals ~ C/n
    let sys = SymbolicSystem::full_shift(2);
    let table = vec![0.15f64, -0.1, 0.05, 0.2];
    let pot = Potential::locally_constant(2, 2, table).unwrap();
    let m = rpf_equilibrium(&sys, &pot, 1.0).unwrap();
    let p = pressure_exact_sft(&sys, &pot, 1.0).unwrap();
    let words: Vec<Vec<u8>> = (0..60u32)
        .map(|seed| {
            let mut x = seed as u64 * 9176 + 7;
            (0..30)
                .map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((x >> 37) & 1) as u8
                })
                .collect()
        })
        .collect();
    let ns = vec![5usize, 10, 15, 20, 25];
    let rep = weak_gibbs_check(&sys, &pot, &m, &words, &ns, p).unwrap();
    assert!(rep.pass, "residuals {:?} C={}", rep.max_residuals, rep.c_fit);
    assert!(rep.c_fit.is_finite() && rep.c_fit > 0.0);
    let r25 = rep.max_residuals[4];
    assert!(r25 < 0.02, "r_25 = {r25}");
}
