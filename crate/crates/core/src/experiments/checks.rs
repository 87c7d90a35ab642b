//! Fixed check suites behind `lab check`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ScenarioConfig, ScenarioKind};
use super::report::{Report, ReportRow, Verdict};
use super::scenarios::run_scenario;
use crate::error::{Error, Result};
use crate::par;
use crate::povm::{FinitePovm, OutcomeVector};
use crate::search::{self, SearchBudget};
use crate::sphere::{PartitionSpec, SphereFunction};
use crate::toeplitz::ToeplitzContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckSuite {
    Janssens,
    BtAxioms,
    Naimark,
}

impl CheckSuite {
    pub const ALL: [CheckSuite; 3] = [
        CheckSuite::Janssens,
        CheckSuite::BtAxioms,
        CheckSuite::Naimark,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckSuite::Janssens => "janssens",
            CheckSuite::BtAxioms => "bt-axioms",
            CheckSuite::Naimark => "naimark",
        }
    }
}

impl fmt::Display for CheckSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckSuite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckSuite::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown check suite {s:?}")))
    }
}

pub fn run_check(suite: CheckSuite, seed: u64) -> Result<Report> {
    match suite {
        CheckSuite::Janssens => janssens(seed),
        CheckSuite::BtAxioms => bt_axioms(),
        CheckSuite::Naimark => naimark(seed),
    }
}

fn janssens(seed: u64) -> Result<Report> {
    let mut report = run_scenario(&ScenarioConfig::new(ScenarioKind::JanssensFuzz, seed))?;
    report.scenario = CheckSuite::Janssens.to_string();
    let a = FinitePovm::trivial(2, 4);
    let budget = SearchBudget::default();
    let noise = search::noise_magnitude(&a, &budget)?;
    let nu_q = search::noncommutativity(&a, &budget)?;
    report.verdicts.push(Verdict::new(
        "trivial POVM: noise = 1, nu_q = 0",
        noise.value == 1.0 && nu_q.value == 0.0,
        format!(
            "noise = {} at {}, nu_q = {}",
            noise.value,
            noise.witness.to_compact(),
            nu_q.value
        ),
    ));
    Ok(report)
}

fn bt_axioms() -> Result<Report> {
    let name = CheckSuite::BtAxioms.to_string();
    let (q1, q2, q3) = (
        SphereFunction::q1(),
        SphereFunction::q2(),
        SphereFunction::q3(),
    );
    let bump = PartitionSpec::tetrahedral().build()?.function(0).clone();
    let ms = [8usize, 16, 32, 64, 128];
    let mut rows = Vec::new();
    let (mut bt1, mut bt2, mut lin, mut bt3, mut spin) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut bt4 = Vec::new();
    let mut sharp = Vec::new();
    for &m in &ms {
        let ctx = ToeplitzContext::new(m)?;
        let mf = m as f64;
        let one = ctx.toeplitz(&SphereFunction::constant(1.0))?;
        bt1 = bt1.max(one.max_abs_diff(&crate::HermitianMatrix::identity(m + 1))?);
        let tb = ctx.toeplitz(&bump)?;
        bt2 = bt2.min(tb.min_eigenvalue()?);
        let (t1, t2, t3) = (ctx.toeplitz(&q1)?, ctx.toeplitz(&q2)?, ctx.toeplitz(&q3)?);
        let combo = ctx.toeplitz(&q1.scale(2.0).add(&q3.scale(-0.5)))?;
        lin = lin.max(combo.max_abs_diff(&t1.scale(2.0).sub(&t3.scale(0.5))?)?);
        let nd = ctx.norm_defect(&q3)?;
        bt3 = bt3.max((nd - 2.0 / (mf + 2.0)).abs());
        let mut ev = t3.eigenvalues()?;
        ev.sort_by(|a, b| b.total_cmp(a));
        for (k, e) in ev.iter().enumerate() {
            spin = spin.max((e - (mf - 2.0 * k as f64) / (mf + 2.0)).abs());
        }
        let cd = ctx.correspondence_defect(&q1, &q2)?;
        bt4.push((m, cd));
        let sd = ctx.sharpness_defect(&q3)?;
        sharp.push(sd);
        let comm = t1.comm_norm(&t2)?;
        rows.push(ReportRow {
            scenario: name.clone(),
            m: Some(m),
            n: 3,
            nu_q: Some(comm),
            m_times_nu_q: Some(mf * comm),
            witnesses: format!("norm_defect={nd}|correspondence_defect={cd}|sharpness_defect={sd}"),
            ..Default::default()
        });
    }
    let ratios: Vec<f64> = sharp.windows(2).map(|w| w[0] / w[1]).collect();
    let tail = &ratios[ratios.len() - 2..];
    let verdicts = vec![
        Verdict::new("BT1 T(1) = id", bt1 <= 1e-10, format!("max error {bt1:e}")),
        Verdict::new(
            "BT2 positivity",
            bt2 >= -1e-10,
            format!("min eigenvalue of T(bump) {bt2:e}"),
        ),
        Verdict::new("linearity", lin <= 1e-10, format!("max error {lin:e}")),
        Verdict::new(
            "BT3 norm defect of q3 = 2/(m+2)",
            bt3 <= 1e-9,
            format!("max error {bt3:e}"),
        ),
        Verdict::new(
            "spin spectrum (m-2k)/(m+2)",
            spin <= 1e-10,
            format!("max error {spin:e}"),
        ),
        Verdict::new(
            "BT4 correspondence defect <= 8/m",
            bt4.iter().all(|&(m, d)| d <= 8.0 / m as f64),
            bt4.iter()
                .map(|(m, d)| format!("m={m}: {d:.4e}"))
                .collect::<Vec<_>>()
                .join("; "),
        ),
        Verdict::new(
            "BT5 sharpness defect halves per doubling (m >= 32)",
            tail.iter().all(|r| (r - 2.0).abs() <= 0.4),
            format!("ratios {ratios:?}"),
        ),
    ];
    Ok(Report {
        scenario: name,
        rows,
        verdicts,
    })
}

fn naimark(seed: u64) -> Result<Report> {
    const CASES: usize = 200;
    let name = CheckSuite::Naimark.to_string();
    let rows = par::map(CASES, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let dim = rng.random_range(2..=6);
        let n = rng.random_range(2..=5);
        let a = FinitePovm::random(dim, n, rng.random())?;
        let d = a.naimark_dilate()?;
        let r = d.residuals(&a)?;
        let x = OutcomeVector::clamped((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect());
        let b1 = d.lift(&x)?;
        let psi_b1 = d.compress(&b1)?;
        let contraction = psi_b1.max_abs_diff(&a.contract(&x)?)?;
        let delta = a.noise_operator(&x)?;
        let noise = d
            .compress(&b1.square())?
            .sub(&psi_b1.square())?
            .max_abs_diff(&delta)?;
        Ok((
            [
                r.isometry,
                r.idempotent,
                r.orthogonal,
                r.completeness,
                r.compression,
                contraction,
                noise,
            ],
            ReportRow {
                scenario: name.clone(),
                n,
                noise_lower: Some(delta.op_norm()?),
                witnesses: format!(
                    "case={i}|dim={dim}|x={}|isometry={:e}|projector={:e}|compression={:e}|noise_identity={noise:e}",
                    x.to_compact(),
                    r.isometry,
                    r.idempotent.max(r.orthogonal).max(r.completeness),
                    r.compression
                ),
                ..Default::default()
            },
        ))
    })?;
    let mut worst = [0.0f64; 7];
    for (res, _) in &rows {
        for (w, v) in worst.iter_mut().zip(res) {
            *w = w.max(*v);
        }
    }
    let checks = [
        ("V*V = id", 1e-10),
        ("P_j^2 = P_j", 1e-10),
        ("P_i P_j = 0", 1e-10),
        ("sum P_j = id", 1e-10),
        ("V* P_j V = A_j", 1e-9),
        ("Psi(B1) = A(x)", 1e-9),
        ("Psi(B1^2) - Psi(B1)^2 = Delta(x)", 1e-9),
    ];
    let verdicts = checks
        .iter()
        .zip(worst)
        .map(|((label, tol), w)| {
            Verdict::new(
                *label,
                w <= *tol,
                format!("max {w:e} over {CASES} POVMs, tol {tol:e}"),
            )
        })
        .collect();
    Ok(Report {
        scenario: name,
        rows: rows.into_iter().map(|(_, r)| r).collect(),
        verdicts,
    })
}
