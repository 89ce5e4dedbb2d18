use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};
use slra::gaussian::{
    self, calibrate_large_s, calibrate_small_s, estimate_signal, gen_null, gen_planted, hypothesis_holds, DetectParams,
    EstimateBackend, Regime, Verdict,
};
use slra::instances::{planted_block, planted_spectral};
use slra::io;
use slra::krylov::{sparse_spectral_lra, SpectralParams};
use slra::linalg::{singular_values, svd_truncated};
use slra::oracle::{brute_force_sparse_lra, OracleResult, OracleVariant};
use slra::rng::derive;
use slra::sketch::{stream_of, StreamUpdate};
use slra::streaming::{Algo, BicriteriaOutput, StreamContext};
use slra::{materialize, spectral_norm, Component, DenseMatrix, SlraError, SparseRankKFactor, SparseVec};

use crate::report::{emit, to_json, Report, Table};
use crate::{
    AlgoArg, BackendArg, BenchArgs, BenchTask, CalibrateArgs, CalibrateRegime, Common, DetectArgs, EstimateArgs, Format,
    GenArgs, GenKind, OracleArg, RegimeArg, StreamArgs, SvdArgs,
};

const EXIT_ORACLE_INFEASIBLE: u8 = 3;

fn check_eps(eps: f64) -> Result<()> {
    ensure!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1), got {eps}");
    Ok(())
}

fn check_sk(s: usize, k: usize) -> Result<()> {
    ensure!(s > 0 && k > 0, "s and k must be positive");
    Ok(())
}

fn load(path: &Path) -> Result<DenseMatrix> {
    io::load_matrix(path).with_context(|| format!("reading {}", path.display()))
}

fn save_factor(path: &Path, f: &SparseRankKFactor, n: usize, d: usize) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    io::write_factor(std::io::BufWriter::new(file), f, n, d)?;
    Ok(())
}

/// Scalar entries of `result`, as a one-row table.
fn result_row(report: &Report) -> Table {
    let mut row = serde_json::Map::new();
    if let Value::Object(m) = &report.result {
        for (k, v) in m {
            if !v.is_object() && !v.is_array() {
                row.insert(k.clone(), v.clone());
            }
        }
    }
    Table::from_records(&[Value::Object(row)])
}

fn write_report(report: &Report, common: &Common, default: Option<PathBuf>) -> Result<()> {
    let path = common.report.clone().or(default);
    let text = match common.format {
        Format::Json => to_json(report)?,
        Format::Csv => match report.result.get("rows") {
            Some(Value::Array(rows)) => Table::from_records(rows).to_csv(),
            _ => result_row(report).to_csv(),
        },
    };
    emit(&text, path.as_deref())
}

fn exit_for(report: &Report) -> ExitCode {
    if report.status == "oracle_infeasible" {
        ExitCode::from(EXIT_ORACLE_INFEASIBLE)
    } else {
        ExitCode::SUCCESS
    }
}

fn oracle_variant(v: OracleArg) -> Vec<OracleVariant> {
    match v {
        OracleArg::Submatrix => vec![OracleVariant::Submatrix],
        OracleArg::PerComponent => vec![OracleVariant::PerComponent],
        OracleArg::Best => vec![OracleVariant::Submatrix, OracleVariant::PerComponent],
    }
}

/// Smallest cost over the requested exact oracles.
fn run_oracle(a: &DenseMatrix, s: usize, k: usize, v: OracleArg) -> slra::Result<OracleResult> {
    let mut best: Option<OracleResult> = None;
    for variant in oracle_variant(v) {
        let r = brute_force_sparse_lra(a, s, k, variant)?;
        if best.as_ref().is_none_or(|b| r.cost < b.cost) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one variant"))
}

fn algo(a: AlgoArg) -> Algo {
    match a {
        AlgoArg::Net => Algo::Net,
        AlgoArg::Rel => Algo::Rel,
        AlgoArg::Add => Algo::Add,
    }
}

fn regime(r: RegimeArg) -> Regime {
    match r {
        RegimeArg::Small => Regime::SmallS,
        RegimeArg::LargeFrob => Regime::LargeFrob,
        RegimeArg::SmallFrob => Regime::SmallFrob,
    }
}

fn cycle_taus(taus: &[f64], k: usize) -> Result<Vec<f64>> {
    ensure!(!taus.is_empty(), "need at least one weight in --taus");
    Ok((0..k).map(|i| taus[i % taus.len()]).collect())
}

pub fn gen(a: GenArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let seed = a.common.seed;
    check_sk(a.s, a.k)?;
    let d = a.d.unwrap_or(a.n);
    ensure!(a.kind != GenKind::Gaussian || d == a.n, "gaussian instances are square");
    let (matrix, planted) = match a.kind {
        GenKind::Gaussian if a.planted => {
            let p = gen_planted(a.n, a.s, a.k, a.lambda.unwrap_or((a.n as f64).sqrt()), seed)?;
            (p.a, Some(p.x))
        }
        GenKind::Gaussian => (gen_null(a.n, seed)?, None),
        GenKind::Block => {
            ensure!(a.s * a.k <= a.n.min(d), "k blocks of size s do not fit");
            let (m, f) = planted_block(a.n, d, a.s, &cycle_taus(&a.taus, a.k)?, a.noise, seed);
            (m, Some(f))
        }
        GenKind::Spectral => {
            ensure!(a.s * a.k <= a.n.min(d) && a.gap > 1.0, "need s·k ≤ min(n, d) and gap > 1");
            let p = planted_spectral(a.n, d, a.s, a.k, a.gap, seed);
            (p.a, Some(p.planted))
        }
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let matrix_path = a.out.join(if a.binary { "matrix.bin" } else { "matrix.txt" });
    io::save_matrix(&matrix_path, &matrix, a.binary)?;
    let mut files = vec![matrix_path.file_name().unwrap().to_string_lossy().into_owned()];
    if let Some(f) = &planted {
        save_factor(&a.out.join("planted.factor"), f, a.n, d)?;
        files.push("planted.factor".into());
    }
    let kind = match a.kind {
        GenKind::Gaussian => "gaussian",
        GenKind::Block => "block",
        GenKind::Spectral => "spectral",
    };
    let mut report = Report::new(
        "gen",
        json!({"kind": kind, "planted": planted.is_some(), "n": a.n, "d": d, "s": a.s, "k": a.k, "seed": seed,
               "lambda": a.lambda, "taus": a.taus, "noise": a.noise, "gap": a.gap, "binary": a.binary}),
    );
    report.result = json!({"files": files, "frobenius_sq": matrix.frobenius_sq(), "nnz": matrix.nnz()});
    let report = report.finish(started);
    write_report(&report, &a.common, Some(a.out.join("report.json")))?;
    Ok(ExitCode::SUCCESS)
}

pub fn sparse_svd(a: SvdArgs) -> Result<ExitCode> {
    let started = Instant::now();
    check_sk(a.s, a.k)?;
    let m = load(&a.input)?;
    let mut params = SpectralParams::new(a.k, a.s, a.eps, a.common.seed);
    if let Some(c) = a.c {
        params.c = c;
    }
    params.validate()?;
    let out = sparse_spectral_lra(&m, &params)?;
    let mut report = Report::new(
        "sparse-svd",
        json!({"input": a.input, "n": m.rows(), "d": m.cols(), "s": a.s, "k": a.k, "eps": a.eps, "c": params.c, "seed": a.common.seed}),
    );
    report.ledger = json!({"matvecs": out.matvecs, "matvecs_algorithm": out.matvecs_algorithm, "flops": out.flops});
    report.result = json!({
        "certified_err": out.err,
        "q": out.q,
        "support_rows": out.support.rows,
        "support_cols": out.support.cols,
        "base_support_rows": out.base_support.rows.len(),
        "base_support_cols": out.base_support.cols.len(),
        "interval": out.interval,
        "components": out.factor.components.len(),
    });
    if a.oracle {
        let sv = singular_values(&m);
        let sigma_k1 = sv.get(a.k).copied().unwrap_or(0.0);
        let exact = spectral_norm(&m.sub(&materialize(&out.factor, m.rows(), m.cols())?));
        report.oracle = Some(json!({
            "kind": "exact_svd",
            "certified_err": out.err,
            "exact_err": exact,
            "sigma_k1": sigma_k1,
            "ratio": if sigma_k1 > 0.0 { Some(exact / sigma_k1) } else { None },
            "within_one_plus_eps": exact <= (1.0 + a.eps) * sigma_k1 * (1.0 + 1e-12),
        }));
    }
    if let Some(p) = &a.factor_out {
        save_factor(p, &out.factor, m.rows(), m.cols())?;
    }
    let report = report.finish(started);
    write_report(&report, &a.common, None)?;
    Ok(exit_for(&report))
}

/// The rank-`k` block output as `k` sparse components, via an SVD of the block.
fn bicriteria_factor(out: &BicriteriaOutput, k: usize) -> Result<SparseRankKFactor> {
    let s = out.rows.len().max(out.cols.len()).max(1);
    if out.rank() == 0 || out.rows.is_empty() || out.cols.is_empty() {
        return Ok(SparseRankKFactor::empty(s, k));
    }
    let block = out.block();
    let r = out.rank().min(k).min(out.rows.len()).min(out.cols.len());
    let dec = svd_truncated(&block, r)?;
    let components = (0..r)
        .filter(|&j| dec.sigma[j] > 0.0)
        .map(|j| Component {
            tau: dec.sigma[j],
            x: SparseVec::new(out.rows.iter().enumerate().map(|(i, &row)| (row, dec.u.get(i, j)))),
            y: SparseVec::new(out.cols.iter().enumerate().map(|(i, &col)| (col, dec.v.get(i, j)))),
        })
        .collect();
    Ok(SparseRankKFactor { components, s, k })
}

struct StreamRun {
    approx: DenseMatrix,
    factor: SparseRankKFactor,
    cost_estimate: f64,
    support: (usize, usize),
    enumerated: Option<u64>,
    ledger: Value,
    ledger_total: u64,
}

#[allow(clippy::too_many_arguments)]
fn run_stream(al: Algo, updates: &[StreamUpdate], n: usize, d: usize, s: usize, k: usize, eps: f64, seed: u64, shards: usize) -> Result<StreamRun> {
    ensure!(shards > 0, "--shards must be positive");
    let mut ctxs = (0..shards).map(|_| StreamContext::new(al, n, d, s, k, eps, seed)).collect::<slra::Result<Vec<_>>>()?;
    for (i, &u) in updates.iter().enumerate() {
        ctxs[i % shards].ingest(u)?;
    }
    let mut ctx = ctxs.remove(0);
    for other in &ctxs {
        ctx.merge(other)?;
    }
    ctx.finalize();
    let ledger = serde_json::to_value(ctx.ledger.counters())?;
    let ledger_total = ctx.ledger.total();
    let run = match al {
        Algo::Net => {
            let r = ctx.net_recover()?;
            StreamRun {
                approx: materialize(&r.factor, n, d)?,
                support: (r.factor.components.iter().map(|c| c.x.nnz()).sum(), r.factor.components.iter().map(|c| c.y.nnz()).sum()),
                factor: r.factor,
                cost_estimate: r.sketched_cost,
                enumerated: Some(r.enumerated),
                ledger,
                ledger_total,
            }
        }
        Algo::Rel | Algo::Add => {
            let r = if al == Algo::Rel { ctx.rel_err_recover()? } else { ctx.add_err_recover()? };
            StreamRun {
                approx: r.to_dense(n, d),
                factor: bicriteria_factor(&r, k)?,
                cost_estimate: r.cost_estimate,
                support: (r.rows.len(), r.cols.len()),
                enumerated: None,
                ledger,
                ledger_total,
            }
        }
    };
    Ok(run)
}

fn dense_from_updates(updates: &[StreamUpdate], n: usize, d: usize) -> Result<DenseMatrix> {
    let mut m = DenseMatrix::zeros(n, d);
    for u in updates {
        ensure!((u.row) < n && (u.col) < d, "update ({}, {}) outside {n}×{d}", u.row, u.col);
        m.add_at(u.row, u.col, u.delta);
    }
    Ok(m)
}

pub fn stream(a: StreamArgs) -> Result<ExitCode> {
    let started = Instant::now();
    check_sk(a.s, a.k)?;
    check_eps(a.eps)?;
    let (updates, n, d, source) = match (&a.input, &a.updates) {
        (Some(p), None) => {
            let m = load(p)?;
            (stream_of(&m), m.rows(), m.cols(), p.clone())
        }
        (None, Some(p)) => {
            let file = fs::File::open(p).with_context(|| format!("reading {}", p.display()))?;
            (io::read_stream(std::io::BufReader::new(file))?, a.n.unwrap(), a.d.unwrap(), p.clone())
        }
        _ => bail!("exactly one of --input or --updates is required"),
    };
    let al = algo(a.algo);
    let run = run_stream(al, &updates, n, d, a.s, a.k, a.eps, a.common.seed, a.shards)?;
    let m = dense_from_updates(&updates, n, d)?;
    let cost = m.sub(&run.approx).frobenius_sq();
    let mut report = Report::new(
        "stream",
        json!({"algo": al, "source": source, "n": n, "d": d, "s": a.s, "k": a.k, "eps": a.eps, "seed": a.common.seed,
               "shards": a.shards, "updates": updates.len()}),
    );
    report.ledger = json!({"total": run.ledger_total, "counters": run.ledger});
    report.result = json!({
        "cost": cost,
        "cost_estimate": run.cost_estimate,
        "frobenius_sq": m.frobenius_sq(),
        "support_rows": run.support.0,
        "support_cols": run.support.1,
        "components": run.factor.components.len(),
        "enumerated": run.enumerated,
    });
    if a.oracle {
        report.oracle = Some(match run_oracle(&m, a.s, a.k, a.oracle_variant) {
            Ok(o) => json!({
                "status": "ok",
                "variant": format!("{:?}", a.oracle_variant).to_lowercase(),
                "cost": o.cost,
                "enumerated": o.enumerated,
                "ratio": if o.cost > 0.0 { Some(cost / o.cost) } else { None },
                "additive_gap": (cost - o.cost) / m.frobenius_sq().max(f64::MIN_POSITIVE),
            }),
            Err(e @ SlraError::OracleInfeasible { .. }) => {
                report.status = "oracle_infeasible";
                json!({"status": "infeasible", "message": e.to_string()})
            }
            Err(e) => return Err(e.into()),
        });
    }
    if let Some(p) = &a.factor_out {
        save_factor(p, &run.factor, n, d)?;
    }
    let report = report.finish(started);
    write_report(&report, &a.common, None)?;
    Ok(exit_for(&report))
}

fn detect_params(c: Option<f64>, small_z: Option<f64>, large_z: Option<f64>) -> DetectParams {
    let mut p = DetectParams::default();
    p.c = c.unwrap_or(p.c);
    p.small_z = small_z.unwrap_or(p.small_z);
    p.large_z = large_z.unwrap_or(p.large_z);
    p
}

pub fn detect(a: DetectArgs) -> Result<ExitCode> {
    let started = Instant::now();
    check_sk(a.s, a.k)?;
    let m = load(&a.input)?;
    let p = detect_params(a.c, a.small_z, a.large_z);
    let rep = gaussian::detect(&m, a.s, a.k, a.common.seed, a.regime.map(regime), &p)?;
    let mut report = Report::new(
        "detect",
        json!({"input": a.input, "n": m.rows(), "s": a.s, "k": a.k, "seed": a.common.seed, "c": p.c,
               "small_z": p.small_z, "large_z": p.large_z, "regime": a.regime.map(regime)}),
    );
    report.ledger = json!({"total": rep.ledger.total(), "counters": rep.ledger.counters()});
    let tested = rep.statistics.iter().filter(|t| t.value.is_some()).count();
    report.result = json!({
        "verdict": rep.verdict,
        "regime": rep.regime,
        "tests": rep.statistics.len(),
        "tests_run": tested,
        "statistics": rep.statistics,
    });
    let report = report.finish(started);
    write_report(&report, &a.common, None)?;
    Ok(exit_for(&report))
}

pub fn estimate(a: EstimateArgs) -> Result<ExitCode> {
    let started = Instant::now();
    check_sk(a.s, a.k)?;
    check_eps(a.eps)?;
    let m = load(&a.input)?;
    ensure!(m.rows() == m.cols(), "estimation needs a square matrix");
    let n = m.rows();
    let backend = match a.backend {
        BackendArg::Explicit => EstimateBackend::Explicit,
        BackendArg::Simulated => EstimateBackend::Simulated,
    };
    let e = estimate_signal(&m, a.s, a.k, a.eps, a.common.seed, backend, a.c)?;
    let mut report = Report::new(
        "estimate",
        json!({"input": a.input, "n": n, "s": a.s, "k": a.k, "eps": a.eps, "c": a.c, "backend": backend, "seed": a.common.seed}),
    );
    report.ledger = json!({"total": e.ledger.total(), "counters": e.ledger.counters()});
    report.result = json!({
        "hypothesis_holds": hypothesis_holds(n, a.s, a.eps),
        "measurements": e.m,
        "score": e.score,
        "factor": e.factor,
    });
    if let Some(t) = &a.truth {
        let file = fs::File::open(t).with_context(|| format!("reading {}", t.display()))?;
        let (truth, tn, td) = io::read_factor(std::io::BufReader::new(file))?;
        ensure!(tn == n && td == n, "truth factor is {tn}×{td}, matrix is {n}×{n}");
        let err = spectral_norm(&materialize(&truth, n, n)?.sub(&materialize(&e.factor, n, n)?));
        report.oracle = Some(json!({"kind": "planted_truth", "spectral_err": err, "within_eps": err <= a.eps}));
    }
    if let Some(p) = &a.factor_out {
        save_factor(p, &e.factor, n, n)?;
    }
    let report = report.finish(started);
    write_report(&report, &a.common, None)?;
    Ok(exit_for(&report))
}

/// Runs `f` over `(grid point, trial)` pairs on `jobs` threads; rows come
/// back in input order and each trial sees only its derived seed.
fn trials<T, F>(jobs: usize, work: Vec<T>, f: F) -> Result<Vec<Value>>
where
    T: Send + Sync,
    F: Fn(&T) -> Result<Value> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    pool.install(|| work.par_iter().map(&f).collect())
}

fn grid(a: &BenchArgs) -> Vec<(usize, usize, usize, u64, u64)> {
    let mut out = Vec::new();
    for &s in &a.s {
        for &k in &a.k {
            let g = out.len() as u64 / a.trials.max(1);
            for t in 0..a.trials {
                out.push((s, k, g as usize, t, derive(derive(a.common.seed, g), t)));
            }
        }
    }
    out
}

fn mean(rows: &[Value], key: &str) -> Option<f64> {
    let v: Vec<f64> = rows.iter().filter_map(|r| r.get(key).and_then(Value::as_f64)).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn rate(rows: &[Value], key: &str) -> Option<f64> {
    let v: Vec<bool> = rows.iter().filter_map(|r| r.get(key).and_then(Value::as_bool)).collect();
    (!v.is_empty()).then(|| v.iter().filter(|&&b| b).count() as f64 / v.len() as f64)
}

pub fn bench(a: BenchArgs) -> Result<ExitCode> {
    let started = Instant::now();
    ensure!(a.n > 0 && !a.s.is_empty() && !a.k.is_empty(), "need n > 0 and non-empty s and k grids");
    for (&s, &k) in a.s.iter().zip(a.k.iter().cycle()) {
        check_sk(s, k)?;
    }
    let n = a.n;
    let d = a.d.unwrap_or(n);
    let eps = a.eps;
    let rows = match a.task {
        BenchTask::Spectral => trials(a.jobs, grid(&a), |&(s, k, _, t, seed)| {
            ensure!(s * k <= n.min(d), "s·k exceeds the matrix size");
            let p = planted_spectral(n, d, s, k, a.gap, seed);
            let out = sparse_spectral_lra(&p.a, &SpectralParams::new(k, s, eps, seed))?;
            let exact = spectral_norm(&p.a.sub(&materialize(&out.factor, n, d)?));
            Ok(json!({"s": s, "k": k, "trial": t, "seed": seed, "certified_err": out.err, "exact_err": exact,
                      "sigma_k1": p.sigma_k1, "pass": exact <= (1.0 + eps) * p.sigma_k1, "matvecs": out.matvecs, "q": out.q}))
        })?,
        BenchTask::Stream => {
            let al = algo(a.algo);
            trials(a.jobs, grid(&a), |&(s, k, _, t, seed)| {
                ensure!(s * k <= n.min(d), "s·k exceeds the matrix size");
                let (m, _) = planted_block(n, d, s, &cycle_taus(&a.taus, k)?, a.noise, seed);
                let run = run_stream(al, &stream_of(&m), n, d, s, k, eps, seed, 1)?;
                let cost = m.sub(&run.approx).frobenius_sq();
                let (opt, status) = match run_oracle(&m, s, k, a.oracle_variant) {
                    Ok(o) => (Some(o.cost), "ok"),
                    Err(SlraError::OracleInfeasible { .. }) => (None, "infeasible"),
                    Err(e) => return Err(e.into()),
                };
                Ok(json!({"s": s, "k": k, "trial": t, "seed": seed, "cost": cost, "oracle_cost": opt, "oracle_status": status,
                          "ratio": opt.filter(|&o| o > 0.0).map(|o| cost / o),
                          "additive_gap": opt.map(|o| (cost - o) / m.frobenius_sq()),
                          "ledger_total": run.ledger_total}))
            })?
        }
        BenchTask::Detect => {
            let p = DetectParams::default();
            let reg = a.regime.map(regime);
            trials(a.jobs, grid(&a), |&(s, k, _, t, seed)| {
                let null = gen_null(n, seed)?;
                let planted = gen_planted(n, s, k, a.lambda.unwrap_or((n as f64).sqrt()), derive(seed, 1))?;
                let rn = gaussian::detect(&null, s, k, seed, reg, &p)?;
                let rp = gaussian::detect(&planted.a, s, k, derive(seed, 1), reg, &p)?;
                Ok(json!({"s": s, "k": k, "trial": t, "seed": seed, "regime": rn.regime,
                          "false_positive": rn.verdict == Verdict::Signal, "true_positive": rp.verdict == Verdict::Signal,
                          "ledger_total": rp.ledger.total()}))
            })?
        }
        BenchTask::Estimate => trials(a.jobs, grid(&a), |&(s, k, _, t, seed)| {
            let p = gen_planted(n, s, k, a.lambda.unwrap_or((n as f64).sqrt()), seed)?;
            let e = estimate_signal(&p.a, s, k, eps, seed, EstimateBackend::Simulated, 4.0)?;
            let err = spectral_norm(&materialize(&p.x, n, n)?.sub(&materialize(&e.factor, n, n)?));
            Ok(json!({"s": s, "k": k, "trial": t, "seed": seed, "spectral_err": err, "pass": err <= eps, "measurements": e.m}))
        })?,
        BenchTask::Ledger => {
            let al = algo(a.algo);
            let mut points = Vec::new();
            for &s in &a.s {
                for &k in &a.k {
                    points.push((s, k));
                }
            }
            trials(a.jobs, points, |&(s, k)| {
                let ctx = StreamContext::new(al, n, d, s, k, eps, a.common.seed)?;
                Ok(json!({"algo": al, "s": s, "k": k, "ledger_total": ctx.ledger.total()}))
            })?
        }
    };
    let summary = json!({
        "trials": rows.len(),
        "pass_rate": rate(&rows, "pass"),
        "tpr": rate(&rows, "true_positive"),
        "fpr": rate(&rows, "false_positive"),
        "mean_ratio": mean(&rows, "ratio"),
        "mean_matvecs": mean(&rows, "matvecs"),
    });
    let task = format!("{:?}", a.task).to_lowercase();
    let mut report = Report::new(
        "bench",
        json!({"task": task, "n": n, "d": d, "s": a.s, "k": a.k, "eps": eps, "trials": a.trials, "seed": a.common.seed,
               "algo": algo(a.algo), "gap": a.gap, "taus": a.taus, "noise": a.noise, "lambda": a.lambda}),
    );
    report.result = json!({"summary": summary, "rows": rows});
    let report = report.finish(started);
    write_report(&report, &a.common, None)?;
    Ok(exit_for(&report))
}

pub fn calibrate(a: CalibrateArgs) -> Result<ExitCode> {
    let started = Instant::now();
    check_sk(a.s, a.k)?;
    ensure!(a.trials > 0 && a.fpr > 0.0 && a.fpr < 1.0, "need trials > 0 and fpr in (0, 1)");
    let z = match a.regime {
        CalibrateRegime::Small => calibrate_small_s(a.n, a.s, a.k, a.trials, a.fpr, a.c, a.common.seed)?,
        CalibrateRegime::Large => calibrate_large_s(a.n, a.s, a.k, a.trials, a.fpr, a.c, a.common.seed)?,
    };
    let regime = format!("{:?}", a.regime).to_lowercase();
    let mut report = Report::new(
        "calibrate",
        json!({"regime": regime, "n": a.n, "s": a.s, "k": a.k, "trials": a.trials, "fpr": a.fpr, "c": a.c, "seed": a.common.seed}),
    );
    report.result = json!({"z": z, "null_seeds": [a.common.seed, a.common.seed.wrapping_add(a.trials)]});
    let report = report.finish(started);
    write_report(&report, &a.common, None)?;
    Ok(ExitCode::SUCCESS)
}
