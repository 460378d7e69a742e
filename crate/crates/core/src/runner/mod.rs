//! Reproducible experiment orchestration: a versioned JSON config selects
//! suites, a master seed pins every substream, and runs emit CSV bodies that
//! are byte-identical at any thread count, plus a JSON summary and SVG
//! charts.

pub mod csv;
pub mod gen;
pub mod svg;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clt::{clt_trace, subadditivity_check};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::functionals::{catalog, EvalCtx};
use crate::geometry::{search_counterexamples, Generator, SearchConfig};
use crate::hyper::{
    gross_derivative_check, improved_nelson_check, nelson_check, HyperParams, TestFunction,
};
use crate::ineq;
use crate::report::{DeficitReport, Verdict};
use crate::rng::derive_seed;
use crate::transport::{self, OtSettings};

use csv::{fmt_f64, fmt_opt};

pub const SCHEMA_VERSION: u32 = 1;

pub const INEQ_NAMES: [&str; 12] = [
    "epi",
    "fii",
    "interpolation",
    "fii_form",
    "conv_lsi",
    "sandwich",
    "reverse_epi",
    "reverse_fii",
    "stam_submult",
    "three_epi",
    "concavity",
    "hwi_jump",
];

/// One suite to execute.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SuiteSpec {
    GaussianClosedForm {
        count: usize,
        max_dim: usize,
        tolerance: f64,
    },
    Ineq {
        ineq: String,
        gaussian_pairs: usize,
        mixture_pairs: usize,
        theta_grid: Vec<f64>,
        tolerance: f64,
    },
    Transport {
        mixture_pairs: usize,
        theta: f64,
        tolerance: f64,
    },
    Clt {
        base: CltBase,
        n_max: usize,
        subadd_pairs: Vec<(usize, usize)>,
        tolerance: f64,
    },
    Hyper {
        a_values: Vec<f64>,
        p_values: Vec<f64>,
        t_values: Vec<f64>,
        tolerance: f64,
    },
    Geom {
        dim: usize,
        pairs: usize,
        points_per_body: usize,
        generator: Generator,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CltBase {
    Gaussian { variance: f64 },
    /// ½N(−m, v) + ½N(m, v), rescaled to unit variance.
    TwoPoint { mean: f64, variance: f64 },
}

impl CltBase {
    pub fn density(&self) -> Result<Density> {
        match self {
            CltBase::Gaussian { variance } => Density::gaussian_1d(0.0, *variance),
            CltBase::TwoPoint { mean, variance } => {
                let m = Density::mixture_1d(&[(0.5, -mean, *variance), (0.5, *mean, *variance)])?;
                let v = m.moments()?.1[(0, 0)];
                m.scale(1.0 / v.sqrt())
            }
        }
    }
}

/// Reproducible experiment description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub master_seed: u64,
    pub output_dir: String,
    pub suites: Vec<SuiteSpec>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        for (i, s) in self.suites.iter().enumerate() {
            let tol = match s {
                SuiteSpec::GaussianClosedForm { tolerance, .. } => Some(*tolerance),
                SuiteSpec::Ineq { tolerance, ineq, .. } => {
                    if ineq != "all" && !INEQ_NAMES.contains(&ineq.as_str()) {
                        return Err(Error::InvalidConfig(format!(
                            "suite {i}: unknown inequality `{ineq}`"
                        )));
                    }
                    Some(*tolerance)
                }
                SuiteSpec::Transport { tolerance, .. } => Some(*tolerance),
                SuiteSpec::Clt { tolerance, n_max, .. } => {
                    if *n_max == 0 {
                        return Err(Error::InvalidConfig(format!("suite {i}: n_max must be ≥ 1")));
                    }
                    Some(*tolerance)
                }
                SuiteSpec::Hyper { tolerance, .. } => Some(*tolerance),
                SuiteSpec::Geom { dim, pairs, points_per_body, .. } => {
                    if *dim != 2 && *dim != 3 {
                        return Err(Error::InvalidConfig(format!("suite {i}: dim must be 2 or 3")));
                    }
                    if *pairs == 0 || *points_per_body < dim + 1 {
                        return Err(Error::InvalidConfig(format!(
                            "suite {i}: need pairs ≥ 1 and points_per_body ≥ dim+1"
                        )));
                    }
                    None
                }
            };
            if let Some(t) = tol {
                if t <= 0.0 || t.is_nan() {
                    return Err(Error::InvalidConfig(format!(
                        "suite {i}: tolerance must be > 0, got {t}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Output of one executed suite.
pub struct SuiteOutput {
    pub kind: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub holds: usize,
    pub holds_within_error: usize,
    pub violated: usize,
    /// Conjecture suites never fail a run.
    pub asserted: bool,
    pub chart: Option<(String, String, String, Vec<svg::Series>)>,
}

impl SuiteOutput {
    fn tally(&mut self, v: Verdict) {
        match v {
            Verdict::Holds => self.holds += 1,
            Verdict::HoldsWithinError => self.holds_within_error += 1,
            Verdict::Violated => self.violated += 1,
        }
    }
}

#[derive(Serialize, Deserialize, Debug)]
pub struct SuiteSummary {
    pub kind: String,
    pub rows: usize,
    pub holds: usize,
    pub holds_within_error: usize,
    pub violated: usize,
    pub asserted: bool,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct RunSummary {
    pub schema_version: u32,
    pub master_seed: u64,
    pub suites: Vec<SuiteSummary>,
    pub exit_code: i32,
}

/// Standard CSV row for a deficit report.
pub fn report_row(r: &DeficitReport) -> Vec<String> {
    vec![
        r.name.clone(),
        fmt_opt(r.params.theta),
        fmt_opt(r.params.lambda),
        fmt_f64(r.lhs.value),
        fmt_f64(r.rhs.value),
        fmt_f64(r.deficit),
        fmt_f64(r.err),
        r.verdict.to_string(),
    ]
}

pub const REPORT_HEADER: [&str; 8] =
    ["name", "theta", "lambda", "lhs", "rhs", "deficit", "err", "verdict"];

fn ctx_for(seed: u64, label: u64) -> EvalCtx {
    EvalCtx::with_seed(derive_seed(seed, label))
}

fn gaussian_suite(seed: u64, count: usize, max_dim: usize, tol: f64) -> Result<SuiteOutput> {
    let items: Vec<(usize, Vec<String>, bool)> = (0..count)
        .into_par_iter()
        .map(|i| -> Result<(usize, Vec<String>, bool)> {
            let dim = 1 + (i % max_dim);
            let x = gen::random_gaussian(derive_seed(seed, i as u64), dim)?;
            let ctx = ctx_for(seed, 0x9a55 + i as u64);
            let cat = catalog(&x, &ctx)?;
            // internal consistency: the defining identities of the catalog
            let d = dim as f64;
            let n_from_h = ((2.0 / d) * cat.entropy.value - (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()).exp();
            let id1 = (cat.entropy_power.value - n_from_h).abs();
            let id2 = (cat.stam_defect.value - cat.entropy_power.value * cat.fisher.value / d).abs();
            let id3 = (cat.lsi_deficit.value - (0.5 * cat.rel_fisher.value - cat.rel_entropy.value)).abs();
            let stam_ok = cat.stam_defect.value >= 1.0 - tol;
            let lsi_ok = cat.lsi_deficit.value >= -tol;
            let ok = id1 < tol && id2 < tol && id3 < tol && stam_ok && lsi_ok;
            let row = vec![
                i.to_string(),
                dim.to_string(),
                fmt_f64(cat.entropy.value),
                fmt_f64(cat.entropy_power.value),
                fmt_f64(cat.fisher.value),
                fmt_f64(cat.rel_entropy.value),
                fmt_f64(cat.rel_fisher.value),
                fmt_f64(cat.lsi_deficit.value),
                fmt_f64(cat.stam_defect.value),
                if ok { "holds".into() } else { "violated".into() },
            ];
            Ok((i, row, ok))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = SuiteOutput {
        kind: "gaussian_closed_form",
        header: vec!["idx", "dim", "h", "N", "J", "D", "I", "dLSI", "p", "verdict"],
        rows: Vec::with_capacity(items.len()),
        holds: 0,
        holds_within_error: 0,
        violated: 0,
        asserted: true,
        chart: None,
    };
    for (_, row, ok) in items {
        out.tally(if ok { Verdict::Holds } else { Verdict::Violated });
        out.rows.push(row);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn ineq_suite(
    seed: u64,
    which: &str,
    gaussian_pairs: usize,
    mixture_pairs: usize,
    theta_grid: &[f64],
    _tol: f64,
) -> Result<SuiteOutput> {
    let names: Vec<&str> = if which == "all" {
        INEQ_NAMES.to_vec()
    } else {
        vec![which]
    };

    enum PairKind {
        Gaussian,
        Mixture,
    }
    let pairs: Vec<(PairKind, u64)> = (0..gaussian_pairs)
        .map(|i| (PairKind::Gaussian, derive_seed(seed, 0x6a + i as u64)))
        .chain((0..mixture_pairs).map(|i| (PairKind::Mixture, derive_seed(seed, 0x313 + i as u64))))
        .collect();

    let all_reports: Vec<Vec<DeficitReport>> = pairs
        .par_iter()
        .map(|(kind, pseed)| -> Result<Vec<DeficitReport>> {
            let (x, y) = match kind {
                PairKind::Gaussian => (
                    gen::random_centered_gaussian(derive_seed(*pseed, 1), 2)?,
                    gen::random_centered_gaussian(derive_seed(*pseed, 2), 2)?,
                ),
                PairKind::Mixture => (
                    gen::random_mixture_1d(derive_seed(*pseed, 1), 2)?,
                    gen::random_mixture_1d(derive_seed(*pseed, 2), 2)?,
                ),
            };
            let ctx = ctx_for(*pseed, 0xc7);
            let ot = OtSettings {
                seed: derive_seed(*pseed, 0x07),
                ..OtSettings::default()
            };
            let mut reports = Vec::new();
            for name in &names {
                match *name {
                    "epi" | "fii" | "interpolation" | "fii_form" | "conv_lsi" => {
                        for &theta in theta_grid {
                            reports.push(match *name {
                                "epi" => ineq::epi_deficit(&x, &y, theta, &ctx)?,
                                "fii" => ineq::fii_deficit(&x, &y, theta, &ctx)?,
                                "interpolation" => {
                                    ineq::interpolation_deficit(&x, &y, theta, &ctx)?
                                }
                                "fii_form" => ineq::fii_form_deficit(&x, &y, theta, &ctx)?,
                                _ => ineq::conv_lsi_deficit(&x, &y, theta, &ctx)?,
                            });
                        }
                    }
                    "sandwich" => {
                        let (lo, hi) = ineq::sandwich_check(&x, &y, theta_grid, &ctx)?;
                        reports.push(lo);
                        reports.push(hi);
                    }
                    "reverse_epi" => {
                        let (a, b) = ineq::reverse_epi_deficit(&x, &y, &ctx)?;
                        reports.push(a);
                        reports.push(b);
                    }
                    "reverse_fii" => {
                        let (a, b) = ineq::reverse_fii_deficit(&x, &y, &ctx)?;
                        reports.push(a);
                        reports.push(b);
                    }
                    "stam_submult" => reports.push(ineq::stam_submult_deficit(&x, &y, &ctx)?),
                    "three_epi" => {
                        for t in [0.1, 1.0, 10.0] {
                            reports.push(ineq::three_epi_deficit(&x, &y, t, &ctx)?);
                        }
                    }
                    "concavity" => {
                        let rep = ineq::concavity_check(&x, &[0.1, 0.5, 1.0], &ctx)?;
                        reports.extend(rep.per_t);
                    }
                    "hwi_jump" => {
                        if let Some(r) = ineq::hwi_jump_check(&x, &ctx, &ot)?.report {
                            reports.push(r);
                        }
                    }
                    _ => unreachable!("validated"),
                }
            }
            Ok(reports)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = SuiteOutput {
        kind: "ineq",
        header: REPORT_HEADER.to_vec(),
        rows: Vec::new(),
        holds: 0,
        holds_within_error: 0,
        violated: 0,
        asserted: true,
        chart: None,
    };
    // chart: mean deficit against θ for the θ-indexed reports
    let mut by_theta: std::collections::BTreeMap<u64, (f64, usize)> = Default::default();
    for reports in &all_reports {
        for r in reports {
            out.tally(r.verdict);
            out.rows.push(report_row(r));
            if let Some(theta) = r.params.theta {
                if r.deficit.is_finite() {
                    let e = by_theta.entry(theta.to_bits()).or_insert((0.0, 0));
                    e.0 += r.deficit;
                    e.1 += 1;
                }
            }
        }
    }
    if !by_theta.is_empty() {
        let pts: Vec<(f64, f64)> = by_theta
            .iter()
            .map(|(bits, (sum, n))| (f64::from_bits(*bits), sum / *n as f64))
            .collect();
        let mut pts = pts;
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out.chart = Some((
            "mean deficit against theta".into(),
            "theta".into(),
            "deficit".into(),
            vec![svg::Series {
                label: "mean deficit".into(),
                points: pts,
            }],
        ));
    }
    Ok(out)
}

fn transport_suite(seed: u64, mixture_pairs: usize, theta: f64, _tol: f64) -> Result<SuiteOutput> {
    let reports: Vec<Vec<DeficitReport>> = (0..mixture_pairs)
        .into_par_iter()
        .map(|i| -> Result<Vec<DeficitReport>> {
            let pseed = derive_seed(seed, 0x0407 + i as u64);
            let x = gen::random_mixture_1d(derive_seed(pseed, 1), 2)?;
            let y = gen::random_mixture_1d(derive_seed(pseed, 2), 2)?;
            let ctx = ctx_for(pseed, 0x88);
            let ot = OtSettings {
                seed: derive_seed(pseed, 0x89),
                ..OtSettings::default()
            };
            Ok(vec![
                transport::talagrand_deficit(&x, &ctx, &ot)?,
                transport::hwi_deficit(&x, &ctx, &ot)?,
                transport::w2_convolution_deficit(&x, &y, theta, &ot)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = SuiteOutput {
        kind: "transport",
        header: REPORT_HEADER.to_vec(),
        rows: Vec::new(),
        holds: 0,
        holds_within_error: 0,
        violated: 0,
        asserted: true,
        chart: None,
    };
    for rs in &reports {
        for r in rs {
            out.tally(r.verdict);
            out.rows.push(report_row(r));
        }
    }
    Ok(out)
}

fn clt_suite(
    seed: u64,
    base: &CltBase,
    n_max: usize,
    subadd_pairs: &[(usize, usize)],
    _tol: f64,
) -> Result<SuiteOutput> {
    let z = base.density()?;
    let ctx = ctx_for(seed, 0xc17);
    let trace = clt_trace(&z, n_max, &ctx)?;
    let mut out = SuiteOutput {
        kind: "clt",
        header: vec![
            "n",
            "D",
            "I",
            "dLSI",
            "entCLT_deficit",
            "fiCLT_deficit",
            "doubling_deficit",
        ],
        rows: Vec::new(),
        holds: 0,
        holds_within_error: 0,
        violated: 0,
        asserted: true,
        chart: None,
    };
    let mut d_curve = Vec::new();
    let mut bound_curve = Vec::new();
    for row in &trace.rows {
        out.tally(row.ent_clt.verdict);
        out.tally(row.fi_clt.verdict);
        if let Some(d) = &row.doubling {
            out.tally(d.verdict);
        }
        d_curve.push((row.n as f64, row.rel_entropy.value));
        bound_curve.push((row.n as f64, row.ent_clt.lhs.value));
        out.rows.push(vec![
            row.n.to_string(),
            fmt_f64(row.rel_entropy.value),
            fmt_f64(row.rel_fisher.value),
            fmt_f64(row.lsi_deficit.value),
            fmt_f64(row.ent_clt.deficit),
            fmt_f64(row.fi_clt.deficit),
            row.doubling
                .as_ref()
                .map(|d| fmt_f64(d.deficit))
                .unwrap_or_default(),
        ]);
    }
    for r in subadditivity_check(&z, subadd_pairs, &ctx)? {
        out.tally(r.verdict);
    }
    out.chart = Some((
        "relative entropy of normalized sums".into(),
        "n".into(),
        "D(U_n)".into(),
        vec![
            svg::Series {
                label: "D(U_n)".into(),
                points: d_curve,
            },
            svg::Series {
                label: "entCLT lower bound".into(),
                points: bound_curve,
            },
        ],
    ));
    Ok(out)
}

fn hyper_suite(
    seed: u64,
    a_values: &[f64],
    p_values: &[f64],
    t_values: &[f64],
    tol: f64,
) -> Result<SuiteOutput> {
    let ctx = ctx_for(seed, 0x447);
    let mut out = SuiteOutput {
        kind: "hyper",
        header: vec![
            "p",
            "q",
            "t",
            "theta",
            "lhs_norm",
            "rhs_norm",
            "deficit",
            "deriv_lhs",
            "deriv_rhs",
        ],
        rows: Vec::new(),
        holds: 0,
        holds_within_error: 0,
        violated: 0,
        asserted: true,
        chart: None,
    };
    let mut ratio_curve = Vec::new();
    for &a in a_values {
        for &p in p_values {
            for &t in t_values {
                let f = TestFunction::log_linear(a);
                let r = nelson_check(&f, p, t)?;
                let q = HyperParams::new(p, t, 0.0)?.q;
                let scale = r.rhs.value.abs().max(1.0);
                let v = if r.deficit >= -tol * scale {
                    Verdict::Holds
                } else {
                    Verdict::Violated
                };
                out.tally(v);
                if (a - a_values[0]).abs() < 1e-15 && (p - p_values[0]).abs() < 1e-15 {
                    ratio_curve.push((t, r.lhs.value / r.rhs.value));
                }
                out.rows.push(vec![
                    fmt_f64(p),
                    fmt_f64(q),
                    fmt_f64(t),
                    String::new(),
                    fmt_f64(r.lhs.value),
                    fmt_f64(r.rhs.value),
                    fmt_f64(r.deficit),
                    String::new(),
                    String::new(),
                ]);
            }
        }
    }
    // grid bump: Nelson sweep, the Gross identity and the two-function bound
    let bump = TestFunction::grid_from_fn(-12.0, 12.0, 4096, |x| {
        1.0 + 0.8 * (-(x - 0.7) * (x - 0.7)).exp()
    })?;
    let bump2 = TestFunction::grid_from_fn(-12.0, 12.0, 4096, |x| {
        1.0 + 0.5 * (-(x + 0.9) * (x + 0.9) / 0.6).exp()
    })?;
    for &t in t_values {
        let r = nelson_check(&bump, 2.0, t)?;
        out.tally(r.verdict);
        let q = HyperParams::new(2.0, t, 0.0)?.q;
        out.rows.push(vec![
            fmt_f64(2.0),
            fmt_f64(q),
            fmt_f64(t),
            String::new(),
            fmt_f64(r.lhs.value),
            fmt_f64(r.rhs.value),
            fmt_f64(r.deficit),
            String::new(),
            String::new(),
        ]);
    }
    for &p in p_values {
        let g = gross_derivative_check(&bump, p, &ctx)?;
        let v = if g.gap <= 1e-4 {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        out.tally(v);
        out.rows.push(vec![
            fmt_f64(p),
            fmt_f64(p),
            "0".into(),
            String::new(),
            String::new(),
            String::new(),
            fmt_f64(g.gap),
            fmt_f64(g.finite_diff),
            fmt_f64(g.analytic),
        ]);
    }
    let imp = improved_nelson_check(&bump, &bump2, 2.0, 0.5, t_values, &ctx)?;
    out.tally(imp.derivative.verdict);
    out.rows.push(vec![
        fmt_f64(2.0),
        fmt_f64(2.0),
        "0".into(),
        fmt_f64(0.5),
        String::new(),
        String::new(),
        fmt_f64(imp.derivative.deficit),
        fmt_f64(imp.derivative.lhs.value),
        fmt_f64(imp.derivative.rhs.value),
    ]);
    out.chart = Some((
        "hypercontractive norm ratio along the flow".into(),
        "t".into(),
        "norm ratio".into(),
        vec![svg::Series {
            label: "|P_t f|_q / |f|_p".into(),
            points: ratio_curve,
        }],
    ));
    Ok(out)
}

fn geom_suite(
    seed: u64,
    dim: usize,
    pairs: usize,
    points_per_body: usize,
    generator: Generator,
    out_dir: Option<&Path>,
) -> Result<SuiteOutput> {
    let cfg = SearchConfig {
        dim,
        pairs,
        points_per_body,
        seed: derive_seed(seed, 0x6e0),
        generator,
    };
    let report = search_counterexamples(&cfg)?;
    let mut out = SuiteOutput {
        kind: "geom",
        header: vec!["seedA", "seedB", "dim", "conj1_deficit", "conj2_deficit"],
        rows: Vec::new(),
        holds: 0,
        holds_within_error: 0,
        violated: 0,
        asserted: false,
        chart: None,
    };
    for o in &report.outcomes {
        let v = if o.conj1_deficit >= 0.0 && o.conj2_deficit >= 0.0 {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        out.tally(v);
        out.rows.push(vec![
            o.seed_a.to_string(),
            o.seed_b.to_string(),
            dim.to_string(),
            fmt_f64(o.conj1_deficit),
            fmt_f64(o.conj2_deficit),
        ]);
    }
    if let Some(dir) = out_dir {
        let cx_dir = dir.join("counterexamples");
        std::fs::create_dir_all(&cx_dir)?;
        for (tag, pair) in [
            ("conj1", report.worst_conj1.as_ref()),
            ("conj2", report.worst_conj2.as_ref()),
        ] {
            if let Some((a, b)) = pair {
                let doc = serde_json::json!({
                    "conjecture": tag,
                    "dim": dim,
                    "min_deficit": if tag == "conj1" { report.min_conj1 } else { report.min_conj2 },
                    "body_a": a,
                    "body_b": b,
                });
                std::fs::write(
                    cx_dir.join(format!("{tag}_worst_dim{dim}.json")),
                    serde_json::to_string_pretty(&doc)?,
                )?;
            }
        }
    }
    Ok(out)
}

fn run_suite(spec: &SuiteSpec, seed: u64, out_dir: Option<&Path>) -> Result<SuiteOutput> {
    match spec {
        SuiteSpec::GaussianClosedForm {
            count,
            max_dim,
            tolerance,
        } => gaussian_suite(seed, *count, *max_dim, *tolerance),
        SuiteSpec::Ineq {
            ineq,
            gaussian_pairs,
            mixture_pairs,
            theta_grid,
            tolerance,
        } => ineq_suite(
            seed,
            ineq,
            *gaussian_pairs,
            *mixture_pairs,
            theta_grid,
            *tolerance,
        ),
        SuiteSpec::Transport {
            mixture_pairs,
            theta,
            tolerance,
        } => transport_suite(seed, *mixture_pairs, *theta, *tolerance),
        SuiteSpec::Clt {
            base,
            n_max,
            subadd_pairs,
            tolerance,
        } => clt_suite(seed, base, *n_max, subadd_pairs, *tolerance),
        SuiteSpec::Hyper {
            a_values,
            p_values,
            t_values,
            tolerance,
        } => hyper_suite(seed, a_values, p_values, t_values, *tolerance),
        SuiteSpec::Geom {
            dim,
            pairs,
            points_per_body,
            generator,
        } => geom_suite(seed, *dim, *pairs, *points_per_body, *generator, out_dir),
    }
}

/// Execute every suite, write artifacts, and return the summary. Artifacts
/// are byte-identical for identical config and seed at any thread count;
/// `jobs = 0` picks the rayon default.
pub fn run(config: &RunConfig, jobs: usize) -> Result<RunSummary> {
    config.validate()?;
    let out_dir = PathBuf::from(&config.output_dir);
    std::fs::create_dir_all(&out_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;

    let mut summaries = Vec::with_capacity(config.suites.len());
    let mut any_asserted_violation = false;
    for (idx, spec) in config.suites.iter().enumerate() {
        let seed = derive_seed(config.master_seed, idx as u64);
        let output = pool.install(|| run_suite(spec, seed, Some(&out_dir)))?;
        let csv_path = out_dir.join(format!("suite_{idx}_{}.csv", output.kind));
        csv::write_file(&csv_path, &output.header, &output.rows)?;
        if let Some((title, xl, yl, series)) = &output.chart {
            let svg_path = out_dir.join(format!("suite_{idx}_{}.svg", output.kind));
            svg::line_chart(&svg_path, title, xl, yl, series)?;
        }
        if output.asserted && output.violated > 0 {
            any_asserted_violation = true;
        }
        summaries.push(SuiteSummary {
            kind: output.kind.to_string(),
            rows: output.rows.len(),
            holds: output.holds,
            holds_within_error: output.holds_within_error,
            violated: output.violated,
            asserted: output.asserted,
        });
    }

    let summary = RunSummary {
        schema_version: config.schema_version,
        master_seed: config.master_seed,
        suites: summaries,
        exit_code: if any_asserted_violation { 1 } else { 0 },
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

/// Aggregate previously written CSVs into one JSON summary (the `report`
/// subcommand).
pub fn merge_reports(paths: &[PathBuf]) -> Result<serde_json::Value> {
    let mut total_rows = 0usize;
    let mut holds = 0usize;
    let mut within = 0usize;
    let mut violated = 0usize;
    let mut by_name: std::collections::BTreeMap<String, [usize; 3]> = Default::default();
    let mut files = Vec::new();
    for path in paths {
        let content = std::fs::read_to_string(path)?;
        let Some((header, rows)) = csv::parse(&content) else {
            return Err(Error::InvalidConfig(format!(
                "{} is not a readable CSV",
                path.display()
            )));
        };
        let verdict_col = header.iter().position(|h| h == "verdict");
        let name_col = header.iter().position(|h| h == "name");
        total_rows += rows.len();
        for row in &rows {
            if let Some(vc) = verdict_col {
                let slot = match row.get(vc).map(|s| s.as_str()) {
                    Some("holds") => {
                        holds += 1;
                        0
                    }
                    Some("holds_within_error") => {
                        within += 1;
                        1
                    }
                    Some("violated") => {
                        violated += 1;
                        2
                    }
                    _ => continue,
                };
                if let Some(nc) = name_col {
                    let entry = by_name.entry(row[nc].clone()).or_insert([0, 0, 0]);
                    entry[slot] += 1;
                }
            }
        }
        files.push(path.display().to_string());
    }
    let by_name_json: serde_json::Map<String, serde_json::Value> = by_name
        .into_iter()
        .map(|(name, counts)| {
            (
                name,
                serde_json::json!({
                    "holds": counts[0],
                    "holds_within_error": counts[1],
                    "violated": counts[2],
                }),
            )
        })
        .collect();
    Ok(serde_json::json!({
        "files": files,
        "rows": total_rows,
        "holds": holds,
        "holds_within_error": within,
        "violated": violated,
        "by_name": by_name_json,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(dir: &Path) -> RunConfig {
        RunConfig {
            schema_version: 1,
            master_seed: 42,
            output_dir: dir.display().to_string(),
            suites: vec![
                SuiteSpec::GaussianClosedForm {
                    count: 8,
                    max_dim: 3,
                    tolerance: 1e-10,
                },
                SuiteSpec::Ineq {
                    ineq: "interpolation".into(),
                    gaussian_pairs: 3,
                    mixture_pairs: 1,
                    theta_grid: vec![0.0, 0.5, 1.0],
                    tolerance: 1e-10,
                },
                SuiteSpec::Geom {
                    dim: 2,
                    pairs: 16,
                    points_per_body: 8,
                    generator: Generator::GaussianCloud,
                },
            ],
        }
    }

    #[test]
    fn empty_suite_list_exits_zero() {
        let dir = std::env::temp_dir().join("deficitlab_run_empty");
        let cfg = RunConfig {
            schema_version: 1,
            master_seed: 1,
            output_dir: dir.display().to_string(),
            suites: vec![],
        };
        let summary = run(&cfg, 1).unwrap();
        assert_eq!(summary.exit_code, 0);
        assert!(summary.suites.is_empty());
        assert!(dir.join("summary.json").exists());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = tiny_config(Path::new("/tmp/x"));
        cfg.schema_version = 99;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let mut cfg = tiny_config(Path::new("/tmp/x"));
        if let SuiteSpec::GaussianClosedForm { tolerance, .. } = &mut cfg.suites[0] {
            *tolerance = -1.0;
        }
        assert!(cfg.validate().is_err());
        let mut cfg = tiny_config(Path::new("/tmp/x"));
        if let SuiteSpec::Ineq { ineq, .. } = &mut cfg.suites[1] {
            *ineq = "nonsense".into();
        }
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn runs_are_byte_identical_across_thread_counts() {
        let dir1 = std::env::temp_dir().join("deficitlab_run_j1");
        let dir2 = std::env::temp_dir().join("deficitlab_run_j4");
        let _ = std::fs::remove_dir_all(&dir1);
        let _ = std::fs::remove_dir_all(&dir2);
        let mut cfg1 = tiny_config(&dir1);
        let s1 = run(&cfg1, 1).unwrap();
        cfg1.output_dir = dir2.display().to_string();
        let s2 = run(&cfg1, 4).unwrap();
        assert_eq!(s1.exit_code, 0);
        assert_eq!(s2.exit_code, 0);
        compare_trees(&dir1, &dir2);
    }

    fn compare_trees(a: &Path, b: &Path) {
        for entry in std::fs::read_dir(a).unwrap() {
            let entry = entry.unwrap();
            let name = entry.file_name();
            if entry.file_type().unwrap().is_dir() {
                compare_trees(&a.join(&name), &b.join(&name));
            } else {
                let x = std::fs::read(a.join(&name)).unwrap();
                let y = std::fs::read(b.join(&name)).unwrap();
                assert_eq!(x, y, "artifact {name:?} differs across thread counts");
            }
        }
    }

    #[test]
    fn merge_counts_verdicts() {
        let dir = std::env::temp_dir().join("deficitlab_merge");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("rows.csv");
        csv::write_file(
            &p,
            &REPORT_HEADER,
            &[
                vec![
                    "epi".into(),
                    "0.5".into(),
                    String::new(),
                    "0".into(),
                    "1".into(),
                    "1".into(),
                    "1e-16".into(),
                    "holds".into(),
                ],
                vec![
                    "epi".into(),
                    "0.5".into(),
                    String::new(),
                    "1".into(),
                    "0".into(),
                    "-1".into(),
                    "1e-16".into(),
                    "violated".into(),
                ],
            ],
        )
        .unwrap();
        let merged = merge_reports(&[p]).unwrap();
        assert_eq!(merged["rows"], 2);
        assert_eq!(merged["holds"], 1);
        assert_eq!(merged["violated"], 1);
        assert_eq!(merged["by_name"]["epi"]["violated"], 1);
    }
}
