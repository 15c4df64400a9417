//! Acceptance gate: one test per release criterion. Every test prints a
//! single line
//!
//!   ACCEPTANCE <n> (<name>): PASS — <detail>
//!
//! (visible with `cargo test --test acceptance -- --nocapture`) and fails
//! loudly when its criterion is not met.

// Reference values are frozen at full printed precision, including ones that
// happen to equal library constants; both lints fire on purpose here.
#![allow(clippy::excessive_precision, clippy::approx_constant)]

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bellcert::ghz::{
    compatibility_oracle, effective_strategy, is_compatible, GhzStrategy, PartyLayout, PhaseLaw,
};
use bellcert::guessing::{
    g_closed, g_oracle, g_star_center_symmetric, g_value, gamma_fidelity, gamma_hat, invariant_tol,
    xi_bounds, Method, ORACLE_TOL,
};
use bellcert::planner::{comparison_table, samples_sdi, samples_standard, PlanRequest};
use bellcert::simulator::{play_bell, play_ghz, AdversaryModel};
use bellcert::strategy::{Atom, BlochVector, Protocol, ProtocolName, ProtocolParams, Strategy};

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {n} ({name}): {verdict} — {detail}");
    assert!(pass, "ACCEPTANCE {n} ({name}): FAIL — {detail}");
}

fn polygon(m: usize) -> Protocol {
    Protocol::with_params(
        ProtocolName::Polygon,
        ProtocolParams {
            m: Some(m),
            ..ProtocolParams::default()
        },
    )
}

fn polygon_plus_z(m: usize) -> Protocol {
    Protocol::with_params(
        ProtocolName::PolygonPlusZ,
        ProtocolParams {
            m: Some(m),
            ..ProtocolParams::default()
        },
    )
}

#[test]
fn acceptance_1_named_thresholds() {
    let start = Instant::now();
    let pi = std::f64::consts::PI;
    let cases: Vec<(Protocol, f64, &str)> = vec![
        (
            Protocol::new(ProtocolName::Xy),
            (2.0 + 2f64.sqrt()) / 4.0,
            "xy",
        ),
        (
            Protocol::new(ProtocolName::Xyz),
            0.5 + 1.0 / (2.0 * 3f64.sqrt()),
            "xyz",
        ),
        (Protocol::new(ProtocolName::Isotropic), 0.75, "isotropic"),
        (
            Protocol::new(ProtocolName::Equator),
            0.5 + 1.0 / pi,
            "equator",
        ),
        (polygon(3), 5.0 / 6.0, "polygon-3"),
        (
            Protocol::new(ProtocolName::EquatorPlusZ),
            0.5 + 1.0 / (4.0 + pi * pi).sqrt(),
            "equator-plus-z-opt",
        ),
        (
            polygon_plus_z(3),
            0.5 + 1.0 / 13f64.sqrt(),
            "polygon-3-plus-z-opt",
        ),
    ];
    let mut max_closed = 0.0f64;
    let mut max_oracle = 0.0f64;
    for (proto, expect, label) in &cases {
        let closed = g_closed(proto, 0.0).unwrap().gamma();
        let err = (closed - expect).abs();
        assert!(
            err <= 1e-12,
            "{label}: closed-form threshold {closed} vs {expect} (|Δ| = {err:.3e})"
        );
        max_closed = max_closed.max(err);

        let mu = proto.strategy().unwrap();
        let numeric = g_oracle(&mu, 0.0, ORACLE_TOL).unwrap().gamma();
        let err = (numeric - expect).abs();
        assert!(
            err <= 1e-5,
            "{label}: numeric threshold {numeric} vs {expect} (|Δ| = {err:.3e})"
        );
        max_oracle = max_oracle.max(err);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "named thresholds",
        elapsed < 10.0,
        &format!(
            "7 protocols: closed form to {max_closed:.2e} (≤1e-12), numeric maximizer to \
             {max_oracle:.2e} (≤1e-5), {elapsed:.2} s (<10 s)"
        ),
    );
}

#[test]
fn acceptance_2_platonic_solids() {
    let start = Instant::now();
    let cases = [
        (
            ProtocolName::Icosahedron,
            (7.0 + 5f64.sqrt()) / 12.0,
            "icosahedron",
        ),
        (
            ProtocolName::Dodecahedron,
            (13.0 + 5f64.sqrt()) / 20.0,
            "dodecahedron",
        ),
    ];
    let mut max_exact = 0.0f64;
    let mut max_oracle = 0.0f64;
    for (name, expect, label) in cases {
        let mu = Protocol::new(name).strategy().unwrap();
        let exact = g_star_center_symmetric(&mu).unwrap();
        assert_eq!(exact.method, Method::ClosedForm);
        let err = ((exact.gamma()) - expect).abs();
        assert!(
            err <= 1e-12,
            "{label}: enumerated threshold {} vs {expect} (|Δ| = {err:.3e})",
            exact.gamma()
        );
        max_exact = max_exact.max(err);

        let numeric = g_oracle(&mu, 0.0, ORACLE_TOL).unwrap().gamma();
        let err = (numeric - expect).abs();
        assert!(
            err <= 1e-5,
            "{label}: numeric threshold {numeric} vs {expect} (|Δ| = {err:.3e})"
        );
        max_oracle = max_oracle.max(err);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        2,
        "platonic solids",
        elapsed < 30.0,
        &format!(
            "icosahedron (7+√5)/12 and dodecahedron (13+√5)/20: subset enumeration to \
             {max_exact:.2e} (≤1e-12), numeric maximizer to {max_oracle:.2e} (≤1e-5), \
             {elapsed:.2} s (<30 s)"
        ),
    );
}

#[test]
fn acceptance_3_curve_reproduction() {
    // γ(C) at C ∈ {0, 0.25, 0.5, 0.75, 1} for the six curve protocols,
    // against independently computed high-precision values.
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let frozen: [(&str, Protocol, [f64; 5]); 6] = [
        (
            "xy",
            Protocol::new(ProtocolName::Xy),
            [
                0.85355339059327376,
                0.86443449342783128,
                0.89528470752104742,
                0.9419417382415922,
                1.0,
            ],
        ),
        (
            "xyz",
            Protocol::new(ProtocolName::Xyz),
            [
                0.78867513459481288,
                0.80618621784789726,
                0.85355339059327376,
                0.92081270576508658,
                1.0,
            ],
        ),
        (
            "isotropic",
            Protocol::new(ProtocolName::Isotropic),
            [
                0.75,
                0.78329857251574813,
                0.84504324953761829,
                0.91909868666319438,
                1.0,
            ],
        ),
        (
            "equator",
            Protocol::new(ProtocolName::Equator),
            [
                0.81830988618379067,
                0.84132455736084043,
                0.88549110629751001,
                0.93973500462123449,
                1.0,
            ],
        ),
        (
            "polygon-3",
            polygon(3),
            [
                0.83333333333333333,
                0.8482874559808614,
                0.88714594258871588,
                0.93989327184591669,
                1.0,
            ],
        ),
        (
            "tetrahedron",
            Protocol::new(ProtocolName::Tetrahedron),
            [
                0.78867513459481288,
                0.80618621784789726,
                0.85355339059327376,
                0.92081270576508658,
                1.0,
            ],
        ),
    ];
    let mut max_err = 0.0f64;
    for (label, proto, expect) in &frozen {
        for (c, e) in grid.iter().zip(expect) {
            let gamma = g_closed(proto, *c).unwrap().gamma();
            let err = (gamma - e).abs();
            assert!(
                err <= 1e-9,
                "{label} at C={c}: γ = {gamma} vs {e} (|Δ| = {err:.3e})"
            );
            max_err = max_err.max(err);
        }
        let at_one = g_closed(proto, 1.0).unwrap().gamma();
        assert_eq!(at_one, 1.0, "{label}: γ(1) must be exactly 1");
    }
    report(
        3,
        "curve reproduction",
        true,
        &format!("6 protocols × 5 concurrences to {max_err:.2e} (≤1e-9); γ(1) = 1 exactly"),
    );
}

#[test]
fn acceptance_4_invariant_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let c_grid: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
    let f_grid: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
    let strategies = 200usize;
    let tol = invariant_tol::ORACLE;

    for s in 0..strategies {
        let n_atoms = rng.gen_range(3..=8usize);
        let mut atoms = Vec::with_capacity(n_atoms);
        let mut total = 0.0;
        let mut raw = Vec::with_capacity(n_atoms);
        for _ in 0..n_atoms {
            let z: f64 = 1.0 - 2.0 * rng.gen::<f64>();
            let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let w = 0.1 + 0.9 * rng.gen::<f64>();
            total += w;
            raw.push((
                BlochVector::normalized(rho * phi.cos(), rho * phi.sin(), z).unwrap(),
                w,
            ));
        }
        for (r, w) in raw {
            atoms.push(Atom { r, w: w / total });
        }
        let mu = Strategy::discrete(atoms).unwrap();

        let g: Vec<f64> = c_grid
            .iter()
            .map(|&c| g_value(&mu, c).unwrap().value)
            .collect();
        let g_star = g[0];
        let gamma_star = (1.0 + g_star) / 2.0;

        for i in 0..g.len() {
            // Nondecreasing in C.
            if i > 0 {
                assert!(
                    g[i] >= g[i - 1] - tol,
                    "strategy {s}: g not monotone at C={} ({} < {})",
                    c_grid[i],
                    g[i],
                    g[i - 1]
                );
            }
            // Convexity: nonnegative second differences on the uniform grid.
            if i > 0 && i + 1 < g.len() {
                let second = g[i + 1] - 2.0 * g[i] + g[i - 1];
                assert!(
                    second >= -tol,
                    "strategy {s}: g not convex at C={} (second difference {second:.3e})",
                    c_grid[i]
                );
            }
            // Second-moment sandwich.
            let (lo, hi) = xi_bounds(&mu, c_grid[i]).unwrap();
            assert!(
                g[i] >= lo - tol && g[i] <= hi + tol,
                "strategy {s}: sandwich violated at C={}: {lo} ≤ {} ≤ {hi}",
                c_grid[i],
                g[i]
            );
            // Linear bound g(C) ≤ (1−C) g* + C.
            assert!(
                g[i] <= (1.0 - c_grid[i]) * g_star + c_grid[i] + tol,
                "strategy {s}: linear bound violated at C={}",
                c_grid[i]
            );
            // Slope bound g(C₂) − g(C₁) ≤ (2/3)(C₂ − C₁).
            for j in i + 1..g.len() {
                assert!(
                    g[j] - g[i] <= 2.0 / 3.0 * (c_grid[j] - c_grid[i]) + tol,
                    "strategy {s}: slope bound violated between C={} and C={}",
                    c_grid[i],
                    c_grid[j]
                );
            }
        }
        // Fidelity-bound chain: γ^F(F) ≤ 1 − 2(1 − γ*)(1 − F).
        for &f in &f_grid {
            let gf = gamma_fidelity(&mu, f).unwrap();
            let linear = 1.0 - 2.0 * (1.0 - gamma_star) * (1.0 - f);
            assert!(
                gf <= linear + tol,
                "strategy {s}: fidelity bound violated at F={f}: {gf} > {linear}"
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        4,
        "invariant suite",
        elapsed < 300.0,
        &format!(
            "200 random strategies × 11 concurrences: monotonicity, convexity, second-moment \
             sandwich, linear, slope, and fidelity bounds all hold (slack {tol:.0e}); \
             {elapsed:.1} s (<300 s)"
        ),
    );
}

#[test]
fn acceptance_5_bell_monte_carlo() {
    let trials = 100_000u64;
    let protos = [
        (Protocol::new(ProtocolName::Xy), "xy"),
        (Protocol::new(ProtocolName::Xyz), "xyz"),
        (Protocol::new(ProtocolName::Isotropic), "isotropic"),
    ];
    let mut max_sigmas = 0.0f64;
    for (k, (proto, label)) in protos.iter().enumerate() {
        let mu = proto.strategy().unwrap();
        // Honest target: every trial passes.
        let honest = play_bell(&mu, &AdversaryModel::HonestTarget, trials, 101 + k as u64).unwrap();
        assert_eq!(
            honest.passes, honest.trials,
            "{label}: honest target must pass every trial"
        );
        assert_eq!(honest.pass_rate, 1.0);

        for (j, &c) in [0.0, 0.5, 1.0].iter().enumerate() {
            let rec = play_bell(
                &mu,
                &AdversaryModel::MixtureAtConcurrence { c },
                trials,
                7_000 + (10 * k + j) as u64,
            )
            .unwrap();
            let expect = gamma_hat(&mu, c).unwrap();
            let sigma = rec.std_err.max(1e-12);
            let pull = (rec.pass_rate - expect).abs() / sigma;
            if rec.std_err == 0.0 {
                assert_eq!(
                    rec.pass_rate, expect,
                    "{label} C={c}: deterministic rate must equal γ̂ exactly"
                );
            } else {
                assert!(
                    pull <= 4.0,
                    "{label} C={c}: rate {} vs γ̂ {expect} is {pull:.2}σ away",
                    rec.pass_rate
                );
                max_sigmas = max_sigmas.max(pull);
            }
        }
    }
    report(
        5,
        "bell monte carlo",
        true,
        &format!(
            "3 protocols × C ∈ {{0, 0.5, 1}} × 1e5 trials match γ̂ (worst pull {max_sigmas:.2}σ \
             ≤ 4σ); honest pass rate exactly 1"
        ),
    );
}

#[test]
fn acceptance_6_ghz_reduction() {
    let start = Instant::now();
    let trials = 100_000u64;
    let mut max_pull = 0.0f64;
    let mut cfg = 0u64;
    for dishonest in [vec![3usize], vec![2usize, 3usize]] {
        let layout = PartyLayout::from_dishonest(3, dishonest.clone()).unwrap();
        for p_z in [0.0, 0.288, 1.0 / 3.0] {
            cfg += 1;
            let strat = GhzStrategy::new(p_z, PhaseLaw::ContinuousUniform).unwrap();
            let ghz = play_ghz(
                &layout,
                &strat,
                &AdversaryModel::OptimalProductAtThreshold,
                trials,
                900 + cfg,
            )
            .unwrap();
            let mu = effective_strategy(&strat).unwrap();
            let bell = play_bell(
                &mu,
                &AdversaryModel::OptimalProductAtThreshold,
                trials,
                1900 + cfg,
            )
            .unwrap();
            let sigma = (ghz.std_err.powi(2) + bell.std_err.powi(2))
                .sqrt()
                .max(1e-12);
            let pull = (ghz.pass_rate - bell.pass_rate).abs() / sigma;
            assert!(
                pull <= 4.0,
                "|𝒟|={} p_z={p_z}: multiparty {} vs effective {} is {pull:.2}σ away",
                dishonest.len(),
                ghz.pass_rate,
                bell.pass_rate
            );
            max_pull = max_pull.max(pull);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        6,
        "ghz reduction",
        elapsed < 120.0,
        &format!(
            "6 configurations (|𝒟| ∈ {{1,2}} × p_z ∈ {{0, 0.288, 1/3}}) × 1e5 trials: \
             multiparty rates match the effective single-qubit game (worst pull \
             {max_pull:.2}σ ≤ 4σ); {elapsed:.1} s (<120 s)"
        ),
    );
}

#[test]
fn acceptance_7_compatibility() {
    // Exhaustive 26-direction lattice grid: all nonzero (i, j, k) ∈ {−1,0,1}³.
    let mut dirs = Vec::new();
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if (i, j, k) != (0, 0, 0) {
                    dirs.push(BlochVector::normalized(i as f64, j as f64, k as f64).unwrap());
                }
            }
        }
    }
    assert_eq!(dirs.len(), 26);
    let mut compatible = 0u32;
    let mut checked = 0u32;
    for a in &dirs {
        for b in &dirs {
            for c in &dirs {
                let triple = [*a, *b, *c];
                let structural = is_compatible(&triple);
                let oracle = compatibility_oracle(&triple).unwrap();
                assert_eq!(
                    structural,
                    oracle,
                    "disagreement on ({:?}, {:?}, {:?})",
                    a.as_array(),
                    b.as_array(),
                    c.as_array()
                );
                checked += 1;
                compatible += structural as u32;
            }
        }
    }
    assert_eq!(compatible, 136, "compatible-count on the 26³ grid");

    // 100 constructed compatible phase sets (n = 3, 4, 5) with closing phase.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0);
    for t in 0..100 {
        let n = 3 + (t % 3);
        let mut phases: Vec<f64> = (0..n - 1)
            .map(|_| 2.0 * std::f64::consts::PI * rng.gen::<f64>())
            .collect();
        let closing = (-phases.iter().sum::<f64>()).rem_euclid(2.0 * std::f64::consts::PI);
        phases.push(closing);
        let set: Vec<BlochVector> = phases.iter().map(|&p| BlochVector::equatorial(p)).collect();
        assert!(
            is_compatible(&set),
            "constructed set {t} must be compatible"
        );
        assert!(
            compatibility_oracle(&set).unwrap(),
            "oracle must accept constructed set {t}"
        );
    }
    report(
        7,
        "compatibility",
        true,
        &format!(
            "{checked} lattice triples: structural test ≡ conditional-eigenstate oracle, \
             {compatible} compatible (= 136); 100 constructed phase sets accepted by both"
        ),
    );
}

#[test]
fn acceptance_8_sample_plans() {
    // Independent direct evaluation of the log-ratio formulas.
    let direct_sdi = (0.01f64.ln() / (1.0f64 - 2.0 * (1.0 - 0.75) * 0.01).ln()).ceil() as u64;
    let direct_std = (0.01f64.ln() / (1.0f64 - (2.0 / 3.0) * 0.01).ln()).ceil() as u64;
    assert_eq!(direct_sdi, 919);
    assert_eq!(direct_std, 689);
    let req = PlanRequest::new(0.01, 0.01).unwrap();
    assert_eq!(samples_sdi(0.75, &req).unwrap().n, direct_sdi);
    assert_eq!(samples_standard(2.0 / 3.0, &req).unwrap().n, direct_std);

    // Asymptotic coefficients N·ε/ln(1/δ) at ε = 1e-4, δ = 0.01.
    let rows = comparison_table(&[1e-4], 0.01).unwrap();
    let row = &rows[0];
    let lg = 100f64.ln();
    let mut worst = 0.0f64;
    for (n, coef, label) in [
        (row.n_standard, 1.5, "standard"),
        (row.n_sdi_bell, 2.0, "sdi-bell"),
        (row.n_sdi_ghz, 2.16, "sdi-ghz"),
        (row.n_di_mermin, 3.41, "di-mermin"),
    ] {
        let got = n as f64 * 1e-4 / lg;
        let rel = (got - coef).abs() / coef;
        assert!(
            rel <= 0.01,
            "{label}: coefficient {got:.4} vs {coef} ({rel:.3}% off)"
        );
        worst = worst.max(rel);
    }
    report(
        8,
        "sample plans",
        true,
        &format!(
            "exact N = 919 (threshold test) and 689 (standard) confirmed by direct log-ratio \
             evaluation; asymptotic coefficients {{1.5, 2, 2.16, 3.41}} recovered to \
             {:.2}% (≤1%)",
            100.0 * worst
        ),
    );
}

#[test]
fn acceptance_9_conjecture_corroboration() {
    let start = Instant::now();
    let c_grid = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let mut findings: Vec<String> = Vec::new();
    let mut checked = 0u32;
    let mut max_diff = 0.0f64;

    let mut protos: Vec<(String, Protocol)> = (3..=12)
        .map(|m| (format!("polygon-{m}"), polygon(m)))
        .collect();
    protos.push((
        "icosahedron".into(),
        Protocol::new(ProtocolName::Icosahedron),
    ));
    protos.push((
        "dodecahedron".into(),
        Protocol::new(ProtocolName::Dodecahedron),
    ));

    for (label, proto) in &protos {
        let mu = proto.strategy().unwrap();
        for &c in &c_grid {
            let formula = g_closed(proto, c).unwrap().value;
            let numeric = g_oracle(&mu, c, ORACLE_TOL).unwrap().value;
            let diff = (formula - numeric).abs();
            checked += 1;
            max_diff = max_diff.max(diff);
            if diff > 1e-5 {
                findings.push(format!(
                    "{label} at C={c}: formula {formula:.12} vs numeric {numeric:.12} \
                     (|Δ| = {diff:.3e})"
                ));
            }
        }
    }
    for f in &findings {
        println!("  finding: {f}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    // Findings are reported, never failed: the formulas are conjectured.
    report(
        9,
        "conjecture corroboration",
        true,
        &format!(
            "{checked} (family, C) points compared to the numeric maximizer: max |Δ| = \
             {max_diff:.2e}, {} mismatch(es) beyond 1e-5; {elapsed:.1} s",
            findings.len()
        ),
    );
}
