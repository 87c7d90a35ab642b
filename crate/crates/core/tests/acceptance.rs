//! The twelve acceptance criteria. Each prints one PASS/FAIL line; the test
//! fails if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unsharp_core::experiments::{default_suite, run_scenario, Report, ScenarioKind};
use unsharp_core::search::{noise_magnitude, noncommutativity};
use unsharp_core::smearing::{smear, systematic_noise_bracket, unsmear_commutative};
use unsharp_core::sphere::{cap_partition_with_taper, platonic_centers, SphereFunction};
use unsharp_core::{FinitePovm, MarkovKernel, OutcomeVector, SearchBudget, ToeplitzContext};

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let e = start.elapsed();
    (
        e < limit,
        format!("{:.2}s of {}s", e.as_secs_f64(), limit.as_secs()),
    )
}

fn random_cube_point(rng: &mut ChaCha8Rng, n: usize) -> OutcomeVector {
    OutcomeVector::clamped((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
}

fn c1_identity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for m in [8, 32, 128] {
        let ctx = ToeplitzContext::new(m).unwrap();
        let t = ctx.toeplitz(&SphereFunction::constant(1.0)).unwrap();
        let id = unsharp_core::HermitianMatrix::identity(m + 1);
        worst = worst.max(t.max_abs_diff(&id).unwrap());
    }
    let (fast, time) = within(start, Duration::from_secs(5));
    outcome(
        worst <= 1e-10 && fast,
        format!("max |T(1) - id| = {worst:e}, {time}"),
    )
}

fn c2_spin_spectrum() -> Outcome {
    let mut worst = 0.0f64;
    for m in [8usize, 32, 128] {
        let ctx = ToeplitzContext::new(m).unwrap();
        let mut ev = ctx
            .toeplitz(&SphereFunction::q3())
            .unwrap()
            .eigenvalues()
            .unwrap();
        ev.sort_by(|a, b| b.total_cmp(a));
        for (k, e) in ev.iter().enumerate() {
            let expected = (m as f64 - 2.0 * k as f64) / (m as f64 + 2.0);
            worst = worst.max((e - expected).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max eigenvalue error = {worst:e}"))
}

fn c3_decay() -> Outcome {
    let start = Instant::now();
    let q3 = SphereFunction::q3();
    let mut norm_err = 0.0f64;
    let mut sharp = Vec::new();
    for m in [32usize, 64, 128] {
        let ctx = ToeplitzContext::new(m).unwrap();
        norm_err = norm_err.max((ctx.norm_defect(&q3).unwrap() - 2.0 / (m as f64 + 2.0)).abs());
        sharp.push(ctx.sharpness_defect(&q3).unwrap());
    }
    let ratios: Vec<f64> = sharp.windows(2).map(|w| w[0] / w[1]).collect();
    let halves = ratios.iter().all(|r| (r - 2.0).abs() <= 0.4);
    let (fast, time) = within(start, Duration::from_secs(30));
    outcome(
        norm_err <= 1e-9 && halves && fast,
        format!("norm defect error = {norm_err:e}, sharpness ratios = {ratios:?}, {time}"),
    )
}

fn c4_correspondence() -> Outcome {
    let (q1, q2) = (SphereFunction::q1(), SphereFunction::q2());
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [16usize, 64, 256] {
        let ctx = ToeplitzContext::new(m).unwrap();
        let defect = ctx.correspondence_defect(&q1, &q2).unwrap();
        let t1 = ctx.toeplitz(&q1).unwrap();
        let t2 = ctx.toeplitz(&q2).unwrap();
        let mc = m as f64 * t1.comm_norm(&t2).unwrap();
        let mf = m as f64;
        pass &= defect <= 8.0 / mf && mc >= 2.0 - 10.0 / mf && mc <= 2.0;
        parts.push(format!("m={m}: defect {defect:.4e}, m*comm {mc:.6}"));
    }
    outcome(pass, parts.join("; "))
}

fn c5_janssens() -> Outcome {
    let start = Instant::now();
    let mut cfg = unsharp_core::experiments::ScenarioConfig::new(ScenarioKind::JanssensFuzz, SEED);
    cfg.cases = Some(1000);
    cfg.dim_range = Some([2, 6]);
    cfg.outcome_range = Some([2, 5]);
    let r = run_scenario(&cfg).unwrap();
    let (fast, time) = within(start, Duration::from_secs(60));
    outcome(
        r.all_pass() && fast,
        format!("{}, {time}", verdict_details(&r)),
    )
}

fn c6_naimark() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let mut worst = [0.0f64; 7];
    for _ in 0..200 {
        let dim = rng.random_range(2..=6);
        let n = rng.random_range(2..=5);
        let a = FinitePovm::random(dim, n, rng.random()).unwrap();
        let d = a.naimark_dilate().unwrap();
        let r = d.residuals(&a).unwrap();
        let hermitian = d
            .projectors()
            .iter()
            .map(|p| {
                (p.matrix() - p.matrix().adjoint())
                    .iter()
                    .fold(0.0f64, |a, z| a.max(z.norm()))
            })
            .fold(0.0f64, f64::max);
        let x = random_cube_point(&mut rng, n);
        let b1 = d.lift(&x).unwrap();
        let psi_b1 = d.compress(&b1).unwrap();
        let contraction = psi_b1.max_abs_diff(&a.contract(&x).unwrap()).unwrap();
        let lhs = d
            .compress(&b1.square())
            .unwrap()
            .sub(&psi_b1.square())
            .unwrap();
        let noise = lhs.max_abs_diff(&a.noise_operator(&x).unwrap()).unwrap();
        for (w, v) in worst.iter_mut().zip([
            r.isometry,
            r.idempotent.max(hermitian),
            r.orthogonal,
            r.completeness,
            r.compression,
            contraction,
            noise,
        ]) {
            *w = w.max(v);
        }
    }
    let tols = [1e-10, 1e-10, 1e-10, 1e-10, 1e-9, 1e-9, 1e-9];
    let pass = worst.iter().zip(tols).all(|(w, t)| *w <= t);
    outcome(
        pass,
        format!(
            "V*V {:.1e}, P^2=P {:.1e}, PiPj {:.1e}, sum P {:.1e}, V*PV {:.1e}, Psi(B1) {:.1e}, Psi(B1^2)-Psi(B1)^2 {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5], worst[6]
        ),
    )
}

fn c7_smearing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let dim = rng.random_range(2..=5);
        let l = rng.random_range(2..=5);
        let n = rng.random_range(2..=5);
        let b = FinitePovm::random(dim, l, rng.random()).unwrap();
        let k = MarkovKernel::random(l, n, rng.random()).unwrap();
        let a = smear(&b, &k).unwrap();
        for _ in 0..20 {
            let x = random_cube_point(&mut rng, n);
            let y = random_cube_point(&mut rng, n);
            let lhs = a
                .contract(&x)
                .unwrap()
                .comm_norm(&a.contract(&y).unwrap())
                .unwrap();
            let bx = b.contract(&k.pushforward(&x).unwrap()).unwrap();
            let by = b.contract(&k.pushforward(&y).unwrap()).unwrap();
            worst = worst.max((lhs - bx.comm_norm(&by).unwrap()).abs());
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max |difference| = {worst:e} over 4000 pairs"),
    )
}

fn verdict_details(r: &Report) -> String {
    r.verdicts
        .iter()
        .map(|v| {
            format!(
                "[{}] {}: {}",
                if v.pass { "ok" } else { "x" },
                v.name,
                v.detail
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn from_report(r: &Report, start: Option<(Instant, Duration)>) -> Outcome {
    let mut pass = r.all_pass();
    let mut detail = verdict_details(r);
    if let Some((s, limit)) = start {
        let (fast, time) = within(s, limit);
        pass &= fast;
        detail.push_str(&format!("; {time}"));
    }
    outcome(pass, detail)
}

fn c10_registration() -> Outcome {
    let r = run_scenario(&unsharp_core::experiments::ScenarioConfig::new(
        ScenarioKind::RegistrationClassical,
        SEED,
    ))
    .unwrap();
    from_report(&r, None)
}

fn c11_trivial() -> Outcome {
    let a = FinitePovm::trivial(3, 4);
    let budget = SearchBudget::default();
    let noise = noise_magnitude(&a, &budget).unwrap();
    let nc = noncommutativity(&a, &budget).unwrap();
    let vertex = noise.witness.as_slice().iter().all(|v| v.abs() == 1.0);
    let bracket = systematic_noise_bracket(&a, &budget).unwrap();
    outcome(
        noise.value == 1.0 && vertex && nc.value == 0.0,
        format!(
            "noise = {} at {}, nu_q = {}, bracket = ({}, {}), unsmearing {}",
            noise.value,
            noise.witness.to_compact(),
            nc.value,
            bracket.lower,
            bracket.upper,
            if unsmear_commutative(&a, None).is_ok() {
                "ok"
            } else {
                "failed"
            }
        ),
    )
}

fn suite_csv(seed: u64) -> (String, Vec<Report>) {
    let reports: Vec<Report> = default_suite(seed)
        .iter()
        .map(|c| run_scenario(c).unwrap())
        .collect();
    let csv = reports.iter().map(|r| r.to_csv()).collect::<String>();
    (csv, reports)
}

/// m·ν_q over m = 32, 64, 128 for tetrahedral caps of radius 1.25 with the cos² taper.
fn reference_cos2_ratio() -> String {
    let p = cap_partition_with_taper(&platonic_centers(4).unwrap(), 1.25, 2.0).unwrap();
    let scaled: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&m| {
            let a = ToeplitzContext::new(m)
                .unwrap()
                .quantize_partition(&p)
                .unwrap();
            m as f64
                * noncommutativity(&a, &SearchBudget::default())
                    .unwrap()
                    .value
        })
        .collect();
    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    format!("m*nu_q = {scaled:.3?}, ratio = {:.3}", hi / lo)
}

#[test]
fn acceptance() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 BT1 exactness", c1_identity()),
        ("2 spin spectrum", c2_spin_spectrum()),
        ("3 norm and sharpness decay", c3_decay()),
        ("4 correspondence calibration", c4_correspondence()),
        ("5 janssens fuzz", c5_janssens()),
        ("6 naimark invariants", c6_naimark()),
        ("7 smearing commutators", c7_smearing()),
    ];

    let start = Instant::now();
    let (first, reports) = suite_csv(SEED);
    let suite_time = start.elapsed();
    let find = |k: ScenarioKind| {
        reports
            .iter()
            .find(|r| r.scenario == k.as_str())
            .expect("suite covers every scenario")
    };
    results.push((
        "8 commutative bands",
        from_report(find(ScenarioKind::CommutativeBands), None),
    ));
    results.push((
        "9 displaceable caps",
        from_report(
            find(ScenarioKind::DisplaceableCaps),
            Some((Instant::now() - suite_time, Duration::from_secs(300))),
        ),
    ));
    results.push(("10 registration", c10_registration()));
    results.push(("11 trivial POVM", c11_trivial()));
    let (second, _) = suite_csv(SEED);
    results.push((
        "12 determinism",
        outcome(
            first == second && !first.is_empty(),
            format!(
                "{} CSV bytes per run, identical = {}",
                first.len(),
                first == second
            ),
        ),
    ));

    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "INFO 9 reference (radius 1.25, cos^2 taper): {}",
        reference_cos2_ratio()
    );
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
