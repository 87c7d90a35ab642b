use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ScenarioConfig, ScenarioKind, DEFAULT_N_LIST};
use super::registration::{canonical_kernel, classical_registration_povm};
use super::report::{Report, ReportRow, Verdict};
use crate::error::{Error, Result};
use crate::par;
use crate::povm::{FinitePovm, OutcomeVector};
use crate::search::{self, SearchBudget};
use crate::smearing::{systematic_noise_bracket, unsmear_commutative};
use crate::sphere::{PartitionOfUnity, PartitionSpec, SphereGrid};
use crate::toeplitz::ToeplitzContext;

/// Runs one scenario. Config problems are errors; per-row failures are
/// recorded in the row and fail the `rows computed` verdict.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = match cfg.scenario {
        ScenarioKind::CommutativeBands => commutative_bands(cfg)?,
        ScenarioKind::DisplaceableCaps => displaceable_caps(cfg)?,
        ScenarioKind::ScalingInN => scaling_in_n(cfg)?,
        ScenarioKind::JanssensFuzz => janssens_fuzz(cfg)?,
        ScenarioKind::RegistrationClassical => registration_classical(cfg)?,
    };
    report.verdicts.extend(row_verdicts(cfg, &report.rows));
    Ok(report)
}

fn row_verdicts(cfg: &ScenarioConfig, rows: &[ReportRow]) -> Vec<Verdict> {
    let tol = cfg.tolerances.inequality;
    let failed: Vec<String> = rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| format!("m={} N={}: {e}", fmt_opt(r.m), r.n))
        })
        .collect();
    let mut bracket_ok = true;
    let mut witness_ok = true;
    for r in rows {
        if let (Some(lo), Some(hi)) = (r.ns_lower, r.ns_upper) {
            bracket_ok &= lo <= hi + tol;
        }
        if let (Some(noise), Some(lo)) = (r.noise_lower, r.ns_lower) {
            witness_ok &= noise >= lo - tol;
        }
    }
    vec![
        Verdict::new(
            "rows computed",
            failed.is_empty(),
            if failed.is_empty() {
                format!("{} rows", rows.len())
            } else {
                failed.join("; ")
            },
        ),
        Verdict::new("ns_lower <= ns_upper", bracket_ok, format!("slack {tol:e}")),
        Verdict::new(
            "noise_lower >= ns_lower",
            witness_ok,
            format!("slack {tol:e}"),
        ),
    ]
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn elapsed_ms(cfg: &ScenarioConfig, start: Instant) -> Option<f64> {
    cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3)
}

/// Quantities shared by the quantized-partition scenarios.
struct QuantizedRow {
    row: ReportRow,
    commutative: bool,
    nu_q: f64,
}

fn quantized_row(
    cfg: &ScenarioConfig,
    partition: &PartitionOfUnity,
    nu_c: Option<&crate::sphere::NuC>,
    m: usize,
    budget: &SearchBudget,
) -> Result<QuantizedRow> {
    let start = Instant::now();
    let ctx = ToeplitzContext::new(m)?;
    let a = ctx.quantize_partition(partition)?;
    let bracket = systematic_noise_bracket(&a, budget)?;
    let noise = match bracket.noise.clone() {
        Some(n) => n,
        None => {
            let extra = [
                bracket.nu_q.witness_x.clone(),
                bracket.nu_q.witness_y.clone(),
            ];
            search::noise_magnitude_with(&a, budget, &extra)?
        }
    };
    let mut witnesses = format!(
        "nu_q_x={}|nu_q_y={}|noise_x={}",
        bracket.nu_q.witness_x.to_compact(),
        bracket.nu_q.witness_y.to_compact(),
        noise.witness.to_compact()
    );
    if let Some(nc) = nu_c {
        // m·‖[A(x), A(y)]‖ at the classical witness vertices.
        let c = a
            .contract(&nc.witness_x)?
            .comm_norm(&a.contract(&nc.witness_y)?)?;
        witnesses.push_str(&format!("|m_comm_at_nu_c_witness={}", m as f64 * c));
    }
    let nu_q = bracket.nu_q.value;
    Ok(QuantizedRow {
        row: ReportRow {
            scenario: cfg.scenario.to_string(),
            m: Some(m),
            n: partition.len(),
            nu_c: nu_c.map(|n| n.value),
            nu_q: Some(nu_q),
            noise_lower: Some(noise.value),
            ns_lower: Some(bracket.lower),
            ns_upper: Some(bracket.upper),
            m_times_nu_q: Some(m as f64 * nu_q),
            wall_time_ms: elapsed_ms(cfg, start),
            witnesses,
            error: None,
        },
        commutative: bracket.commutative,
        nu_q,
    })
}

fn error_row(cfg: &ScenarioConfig, m: Option<usize>, n: usize, e: &Error) -> ReportRow {
    ReportRow {
        scenario: cfg.scenario.to_string(),
        m,
        n,
        error: Some(e.to_string()),
        ..Default::default()
    }
}

fn quantized_rows(
    cfg: &ScenarioConfig,
    partition: &PartitionOfUnity,
    nu_c: Option<&crate::sphere::NuC>,
) -> Vec<(usize, Option<QuantizedRow>, ReportRow)> {
    cfg.m_list
        .iter()
        .enumerate()
        .map(
            |(i, &m)| match quantized_row(cfg, partition, nu_c, m, &cfg.row_budget(i)) {
                Ok(q) => {
                    let row = q.row.clone();
                    (m, Some(q), row)
                }
                Err(e) => (m, None, error_row(cfg, Some(m), partition.len(), &e)),
            },
        )
        .collect()
}

fn commutative_bands(cfg: &ScenarioConfig) -> Result<Report> {
    let spec = cfg
        .partition
        .clone()
        .unwrap_or(PartitionSpec::bands(3, 0.4));
    let partition = spec.build()?;
    let grid = cfg.sphere_grid();
    partition.validate(&grid)?;
    let nu_c = partition.nu_c(&grid)?;
    let f1 = partition.function(0);
    let mut peak = 0.0f64;
    for q in grid.points() {
        let v = f1.eval_checked(q)?;
        peak = peak.max(v - v * v);
    }
    let alpha = cfg.alpha.unwrap_or(cfg.tolerances.noise_fraction * peak);

    let results = quantized_rows(cfg, &partition, Some(&nu_c));
    let tol = cfg.tolerances.commutator;
    let max_nu_q = results
        .iter()
        .filter_map(|(_, q, _)| q.as_ref().map(|q| q.nu_q))
        .fold(0.0f64, f64::max);
    let all_ok = results.iter().all(|(_, q, _)| q.is_some());
    let unsmeared = results.iter().all(|(_, q, _)| {
        q.as_ref()
            .is_some_and(|q| q.commutative && q.row.ns_upper == Some(0.0))
    });
    let (m_top, _, top_row) = results.last().expect("m_list is nonempty");
    let top_noise = top_row.noise_lower.unwrap_or(f64::NAN);

    let verdicts = vec![
        Verdict::new(
            "nu_q <= tol for all m",
            all_ok && max_nu_q <= tol,
            format!("max nu_q = {max_nu_q:e}, tol = {tol:e}"),
        ),
        Verdict::new(
            "ns_upper = 0 via unsmear_commutative",
            unsmeared,
            format!("{} rows", results.len()),
        ),
        Verdict::new(
            "noise >= alpha at largest m",
            top_noise >= alpha,
            format!("m = {m_top}: noise = {top_noise}, alpha = {alpha}, max(f1 - f1^2) = {peak}"),
        ),
        Verdict::new(
            "nu_c = 0",
            nu_c.value == 0.0,
            format!("nu_c = {}", nu_c.value),
        ),
    ];
    Ok(Report {
        scenario: cfg.scenario.to_string(),
        rows: results.into_iter().map(|(_, _, r)| r).collect(),
        verdicts,
    })
}

fn displaceable_caps(cfg: &ScenarioConfig) -> Result<Report> {
    let spec = cfg
        .partition
        .clone()
        .unwrap_or_else(PartitionSpec::tetrahedral);
    let partition = spec.build()?;
    let grid = cfg.sphere_grid();
    partition.validate(&grid)?;
    let areas = partition.area_fractions();
    let nu_c = partition.nu_c(&grid)?;
    let m_min = cfg.m_min.unwrap_or(32.min(*cfg.m_list.last().unwrap()));

    let results = quantized_rows(cfg, &partition, Some(&nu_c));
    let window: Vec<(usize, f64)> = results
        .iter()
        .filter(|(m, _, _)| *m >= m_min)
        .map(|(m, q, _)| (*m, q.as_ref().map(|q| q.nu_q).unwrap_or(f64::NAN)))
        .collect();
    let floor = cfg.tolerances.nu_q_floor;
    let positive = !window.is_empty() && window.iter().all(|(_, v)| *v > floor);
    let scaled: Vec<f64> = window.iter().map(|(m, v)| *m as f64 * v).collect();
    let hi = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = hi / lo;
    let max_area = areas.iter().cloned().fold(0.0f64, f64::max);

    let verdicts = vec![
        Verdict::new(
            "caps displaceable (area < 1/2)",
            max_area < 0.5,
            format!("max cap area fraction = {max_area}"),
        ),
        Verdict::new(
            format!("nu_q > {floor:e} for m >= {m_min}"),
            positive,
            window
                .iter()
                .map(|(m, v)| format!("m={m}: {v}"))
                .collect::<Vec<_>>()
                .join("; "),
        ),
        Verdict::new(
            format!(
                "max/min m*nu_q <= {} for m >= {m_min}",
                cfg.tolerances.scaling_window
            ),
            ratio.is_finite() && ratio <= cfg.tolerances.scaling_window,
            format!("ratio = {ratio}, nu_c = {}", nu_c.value),
        ),
    ];
    Ok(Report {
        scenario: cfg.scenario.to_string(),
        rows: results.into_iter().map(|(_, _, r)| r).collect(),
        verdicts,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}

fn scaling_in_n(cfg: &ScenarioConfig) -> Result<Report> {
    let n_list = cfg
        .n_list
        .clone()
        .unwrap_or_else(|| DEFAULT_N_LIST.to_vec());
    let (radius_factor, taper) = match &cfg.partition {
        Some(PartitionSpec::Caps {
            radius_factor,
            taper,
            ..
        }) => (*radius_factor, *taper),
        Some(PartitionSpec::Bands { .. }) => {
            return Err(Error::Config(
                "scaling-in-N needs a caps partition template".into(),
            ))
        }
        None => (None, None),
    };
    let grid = cfg.sphere_grid();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &n in &n_list {
        let start = Instant::now();
        let spec = PartitionSpec::Caps {
            n: Some(n),
            centers: None,
            radius: None,
            radius_factor: Some(radius_factor.unwrap_or(crate::sphere::DEFAULT_RADIUS_FACTOR)),
            taper,
        };
        let computed = spec.build().and_then(|p| {
            p.validate(&grid)?;
            let nc = p.nu_c(&grid)?;
            Ok((p, nc))
        });
        match computed {
            Ok((p, nc)) => {
                points.push((n as f64, nc.value));
                rows.push(ReportRow {
                    scenario: cfg.scenario.to_string(),
                    m: None,
                    n,
                    nu_c: Some(nc.value),
                    wall_time_ms: elapsed_ms(cfg, start),
                    witnesses: format!(
                        "x={}|y={}|t={}|phi={}|area={}",
                        nc.witness_x.to_compact(),
                        nc.witness_y.to_compact(),
                        nc.point.t,
                        nc.point.phi,
                        p.area_fractions()[0]
                    ),
                    ..Default::default()
                });
            }
            Err(e) => rows.push(error_row(cfg, None, n, &e)),
        }
    }
    let positive = points.len() == n_list.len() && points.iter().all(|(_, v)| *v > 0.0);
    let slope = if points.len() >= 2 {
        loglog_slope(&points)
    } else {
        f64::NAN
    };
    let verdicts = vec![
        Verdict::new(
            "nu_c > 0 for every cover",
            positive,
            format!("{} covers", points.len()),
        ),
        Verdict::new(
            "decay exponent fitted",
            slope.is_finite(),
            format!("ln nu_c vs ln N slope = {slope}"),
        ),
    ];
    Ok(Report {
        scenario: cfg.scenario.to_string(),
        rows,
        verdicts,
    })
}

/// One fuzz case: a random POVM and a pair of cube points.
pub struct FuzzCase {
    pub povm: FinitePovm,
    pub x: OutcomeVector,
    pub y: OutcomeVector,
}

/// Case `i` of the fuzz campaign seeded with `seed`.
pub fn fuzz_case(seed: u64, i: usize, dims: [usize; 2], outcomes: [usize; 2]) -> Result<FuzzCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let dim = rng.random_range(dims[0]..=dims[1]);
    let n = rng.random_range(outcomes[0]..=outcomes[1]);
    let povm = FinitePovm::random(dim, n, rng.random())?;
    // Even cases probe vertices, odd cases the interior.
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|_| {
                if i.is_multiple_of(2) {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    rng.random_range(-1.0..=1.0)
                }
            })
            .collect()
    };
    let x = OutcomeVector::clamped(draw(&mut rng));
    let y = OutcomeVector::clamped(draw(&mut rng));
    Ok(FuzzCase { povm, x, y })
}

fn janssens_fuzz(cfg: &ScenarioConfig) -> Result<Report> {
    let cases = cfg.cases.unwrap_or(1000);
    let dims = cfg.dim_range.unwrap_or([2, 6]);
    let outcomes = cfg.outcome_range.unwrap_or([2, 5]);
    let rows = par::map(cases, |i| {
        let start = Instant::now();
        let computed = fuzz_case(cfg.seed, i, dims, outcomes).and_then(|c| {
            let dx = c.povm.noise_operator(&c.x)?.op_norm()?;
            let dy = c.povm.noise_operator(&c.y)?.op_norm()?;
            let comm = c.povm.contract(&c.x)?.comm_norm(&c.povm.contract(&c.y)?)?;
            Ok((c, dx, dy, comm))
        });
        Ok(match computed {
            Ok((c, dx, dy, comm)) => {
                let residual = dx.sqrt() * dy.sqrt() - 0.5 * comm;
                ReportRow {
                    scenario: cfg.scenario.to_string(),
                    m: None,
                    n: c.povm.len(),
                    nu_q: Some(comm),
                    noise_lower: Some(dx.max(dy)),
                    ns_lower: Some(0.5 * comm),
                    wall_time_ms: elapsed_ms(cfg, start),
                    witnesses: format!(
                        "case={i}|dim={}|x={}|y={}|residual={residual}",
                        c.povm.dim(),
                        c.x.to_compact(),
                        c.y.to_compact()
                    ),
                    ..Default::default()
                }
            }
            Err(e) => error_row(cfg, None, 0, &e),
        })
    })?;
    let residuals: Vec<f64> = rows
        .iter()
        .filter_map(|r| {
            r.witnesses
                .rsplit("residual=")
                .next()
                .filter(|_| r.error.is_none())
                .and_then(|s| s.parse().ok())
        })
        .collect();
    let min = residuals.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = cfg.tolerances.inequality;
    let verdicts = vec![Verdict::new(
        "janssens residual >= -tol",
        residuals.len() == cases && min >= -tol,
        format!(
            "{} cases, min residual = {min:e}, tol = {tol:e}",
            residuals.len()
        ),
    )];
    Ok(Report {
        scenario: cfg.scenario.to_string(),
        rows,
        verdicts,
    })
}

fn registration_classical(cfg: &ScenarioConfig) -> Result<Report> {
    let spec = cfg
        .partition
        .clone()
        .unwrap_or(PartitionSpec::bands(2, 0.5));
    let partition = spec.build()?;
    let [nt, np] = cfg.registration_grid.unwrap_or([17, 8]);
    let reg_grid = SphereGrid::new(nt, np);
    let grid = cfg.sphere_grid();
    partition.validate(&grid)?;
    let nu_c = partition.nu_c(&grid)?;
    let start = Instant::now();

    let a = classical_registration_povm(&partition, &reg_grid)?;
    let budget = cfg.row_budget(0);
    let noise = search::noise_magnitude(&a, &budget)?;
    let bracket = systematic_noise_bracket(&a, &budget)?;
    let unsmear = unsmear_commutative(&a, None);
    let kernel = canonical_kernel(&partition, &reg_grid)?;

    // Some member reaching 1/2 at a node forces 𝒩 ≥ 1/4 through Δ(e_j).
    let mut half_hit = None;
    'outer: for (i, q) in reg_grid.points().enumerate() {
        for (j, f) in partition.functions().iter().enumerate() {
            if (f.eval_checked(q)? - 0.5).abs() <= 1e-12 {
                half_hit = Some((i, j));
                break 'outer;
            }
        }
    }
    let delta_ok = match half_hit {
        Some((_, j)) => {
            let d = a.noise_operator(&OutcomeVector::basis(a.len(), j))?;
            let expected: Vec<f64> = reg_grid
                .points()
                .map(|q| {
                    let v = partition.function(j).eval(q);
                    v - v * v
                })
                .collect();
            d.is_diagonal()
                && expected
                    .iter()
                    .enumerate()
                    .all(|(i, e)| (d.get(i, i).re - e).abs() <= 1e-12)
        }
        None => false,
    };

    let row = ReportRow {
        scenario: cfg.scenario.to_string(),
        m: None,
        n: partition.len(),
        nu_c: Some(nu_c.value),
        nu_q: Some(bracket.nu_q.value),
        noise_lower: Some(noise.value),
        ns_lower: Some(bracket.lower),
        ns_upper: Some(bracket.upper),
        m_times_nu_q: None,
        wall_time_ms: elapsed_ms(cfg, start),
        witnesses: format!(
            "noise_x={}|grid={nt}x{np}|kernel_rows={}",
            noise.witness.to_compact(),
            kernel.source_size()
        ),
        error: None,
    };
    let tol = cfg.tolerances.inequality;
    let verdicts = vec![
        Verdict::new(
            "some f_j attains 1/2 on the grid",
            half_hit.is_some(),
            match half_hit {
                Some((i, j)) => format!("f_{} at node {i}", j + 1),
                None => "no node with f_j = 1/2".into(),
            },
        ),
        Verdict::new(
            "noise >= 1/4",
            noise.value >= 0.25 - tol,
            format!("noise = {}", noise.value),
        ),
        Verdict::new(
            "Delta(e_j) = diag(f_j - f_j^2)",
            delta_ok,
            "checked entrywise to 1e-12",
        ),
        Verdict::new(
            "systematic noise bracket = (0, 0)",
            bracket.lower == 0.0 && bracket.upper == 0.0,
            format!("({}, {})", bracket.lower, bracket.upper),
        ),
        Verdict::new(
            "unsmear_commutative succeeds",
            unsmear.is_ok(),
            match &unsmear {
                Ok(u) => format!(
                    "{} joint eigenspaces, residual {:e}",
                    u.sharp.len(),
                    u.residual
                ),
                Err(e) => e.to_string(),
            },
        ),
    ];
    Ok(Report {
        scenario: cfg.scenario.to_string(),
        rows: vec![row],
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [4.0, 6.0, 8.0, 12.0]
            .iter()
            .map(|&n| (n, 3.0 / (n * n)))
            .collect();
        assert!((loglog_slope(&pts) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn fuzz_cases_are_reproducible() {
        let a = fuzz_case(9, 5, [2, 6], [2, 5]).unwrap();
        let b = fuzz_case(9, 5, [2, 6], [2, 5]).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.povm.dim(), b.povm.dim());
        assert!(a.povm.dim() >= 2 && a.povm.dim() <= 6);
    }

    #[test]
    fn small_bands_run() {
        let mut cfg = ScenarioConfig::new(ScenarioKind::CommutativeBands, 1);
        cfg.m_list = vec![4, 8];
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(
            r.verdicts
                .iter()
                .find(|v| v.name.starts_with("nu_q"))
                .unwrap()
                .pass
        );
    }

    #[test]
    fn row_errors_are_recorded() {
        let mut cfg = ScenarioConfig::new(ScenarioKind::JanssensFuzz, 1);
        cfg.cases = Some(4);
        cfg.dim_range = Some([2, 2]);
        cfg.outcome_range = Some([2, 2]);
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.all_pass());
    }
}
