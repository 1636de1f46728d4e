use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use krcrit::asymptotics::{
    matrix_m0, matrix_mbar_m1, matrix_mtilde, type2_disk_solve, type2_disk_thresholds, TheoremId, Thresholds, Type2DiskSolution,
};
use krcrit::config::RunFile;
use krcrit::critical::{enumerate_critical_points, nontrivially_different, CriticalPoint, PointType, Problem, SearchConfig};
use krcrit::greens::{mfs_fit, OuterRepresentation};
use krcrit::linalg::{sym_eigen2, Eigen2, Mat2};
use krcrit::validate::{green_report, sweep, type2_d_scan, DScanRow, GreenCheck, SweepResult};
use krcrit::{Domain, DomainSpec, GreenModel, KrEvaluator, MfsConfig, Point2, RobinData, VortexConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{svg, Cli, Command, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] krcrit::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("strict mode: {0}")]
    Strict(String),
}

impl CliError {
    pub fn status(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Lib(krcrit::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<ExitCode> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    fs::create_dir_all(&cli.out).map_err(|source| CliError::Write { path: cli.out.clone(), source })?;
    match &cli.command {
        Command::GreenCheck { config, dump_green } => green_check(cli, config, dump_green.as_deref()),
        Command::Find { config, eps, seed_density, plot } => find(cli, config, *eps, *seed_density, *plot),
        Command::Sweep { config, seed_density, plot } => run_sweep(cli, config, *seed_density, *plot),
        Command::DiskType2 { lambda1, lambda2, s } => disk_type2(cli, *lambda1, *lambda2, s),
        Command::Matrices { config } => matrices(cli, config),
        Command::Report { inputs, output } => report(cli, inputs, output),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    write(path, &s)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Write { path: path.to_path_buf(), source },
        other => CliError::Usage(format!("{other:?}")),
    })?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

fn search_config(cli: &Cli, rf: &RunFile, seed_density: Option<usize>) -> Result<SearchConfig> {
    let mut cfg = rf.search.clone();
    cfg.threads = cli.threads;
    if let Some(d) = seed_density {
        cfg.seed_density = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn green_check(cli: &Cli, config: &Path, dump: Option<&Path>) -> Result<ExitCode> {
    let rf = RunFile::load(config)?;
    let spec = rf.domain.spec()?;
    let holes = rf.domain.holes();
    let fitted_cfg = MfsConfig { outer: OuterRepresentation::Sources, ..rf.mfs };
    let domain = if holes.is_empty() {
        Domain::Plain(spec.clone())
    } else {
        Domain::Punctured(krcrit::PuncturedDomain::with_holes(spec.clone(), holes.clone())?)
    };
    let model = mfs_fit(&domain, &fitted_cfg)?;
    let reference = match (&spec, holes.is_empty()) {
        (DomainSpec::Disk { center, radius }, true) => Some(GreenModel::closed_form_disk(*center, *radius)?),
        _ => None,
    };
    let g = &rf.green;
    let chk = GreenCheck { pairs: g.pairs, trials: g.trials, nodes: g.nodes, seed: g.seed, tolerance: g.tolerance };
    let rep = green_report(&model, reference.as_ref(), &chk)?;
    write_json(&cli.out.join("green_check.json"), &rep)?;
    if let Some(path) = dump {
        write_json(path, &model.dump())?;
    }
    println!(
        "boundary residual {:.3e}  symmetry {:.3e}  harmonicity {:.3e}  reference {}  identity {}",
        rep.boundary_residual,
        rep.symmetry,
        rep.harmonicity,
        rep.reference_error.map_or("n/a".into(), |e| format!("{e:.3e}")),
        rep.identity.as_ref().map_or("n/a".into(), |i| format!(
            "{:.3e} (refinement {})",
            i.max_residual,
            if i.refinement_ok { "ok" } else { "failed" }
        )),
    );
    println!("{}", if rep.pass { "PASS" } else { "FAIL" });
    Ok(if rep.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Output of the `find` command.
#[derive(Debug, Serialize, Deserialize)]
pub struct FindOutput {
    pub domain: DomainSpec,
    pub p: Point2,
    pub lambda: [f64; 2],
    pub eps: f64,
    pub count: usize,
    pub nontrivially_different: usize,
    pub points: Vec<CriticalPoint>,
}

/// Flat CSV row for one critical point.
#[derive(Debug, Serialize)]
struct PointRow<'a> {
    source: &'a str,
    eps: f64,
    index: usize,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
    #[serde(rename = "type")]
    kind: PointType,
    grad_norm: f64,
    morse_index: u8,
    local_index: i8,
    nondegenerate: bool,
    gauge: Option<f64>,
    paired_with: Option<usize>,
}

fn point_rows<'a>(source: &'a str, eps: f64, pts: &[CriticalPoint]) -> Vec<PointRow<'a>> {
    pts.iter()
        .enumerate()
        .map(|(index, c)| PointRow {
            source,
            eps,
            index,
            x1: c.x.x1,
            x2: c.x.x2,
            y1: c.y.x1,
            y2: c.y.x2,
            kind: c.kind,
            grad_norm: c.grad_norm,
            morse_index: c.morse_index,
            local_index: c.local_index,
            nondegenerate: c.nondegenerate,
            gauge: c.gauge,
            paired_with: c.paired_with,
        })
        .collect()
}

fn find(cli: &Cli, config: &Path, eps: Option<f64>, seed_density: Option<usize>, plot: bool) -> Result<ExitCode> {
    let rf = RunFile::load(config)?;
    let eps = match eps {
        Some(e) => e,
        None => rf.eps()?,
    };
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CliError::Usage(format!("eps = {eps} must lie in (0, 1)")));
    }
    let cfg = search_config(cli, &rf, seed_density)?;
    let (l1, l2) = rf.strengths()?;
    let p = rf.p()?;
    let prob = Problem::new(rf.outer()?, p, eps, l1, l2, &rf.mfs)?;
    let points = enumerate_critical_points(&prob, &cfg)?;
    let out = FindOutput {
        domain: rf.domain.spec()?,
        p,
        lambda: [l1, l2],
        eps,
        count: points.len(),
        nontrivially_different: nontrivially_different(&points),
        points,
    };
    match cli.format {
        Format::Json => write_json(&cli.out.join("critical_points.json"), &out)?,
        Format::Csv => write_csv(&cli.out.join("critical_points.csv"), &point_rows("find", eps, &out.points))?,
    }
    if plot {
        let pairs: Vec<(Point2, Point2)> = out.points.iter().map(|c| (c.x, c.y)).collect();
        write(&cli.out.join("locations.svg"), &svg::locations(&out.domain, p, &pairs)?)?;
    }
    println!("{} critical points ({} nontrivially different)", out.count, out.nontrivially_different);
    for c in &out.points {
        println!(
            "  {:<12} x=({:+.6}, {:+.6}) y=({:+.6}, {:+.6}) morse={} index={:+}",
            format!("{:?}", c.kind),
            c.x.x1,
            c.x.x2,
            c.y.x1,
            c.y.x2,
            c.morse_index,
            c.local_index
        );
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct SweepRow {
    eps: f64,
    predicted: usize,
    found_target: usize,
    found_total: usize,
    radius_x: Option<f64>,
    radius_y: Option<f64>,
    ratio: Option<f64>,
    alignment: Option<f64>,
    total_distance: f64,
    count_mismatch: bool,
}

#[derive(Debug, Serialize)]
struct DScanCsv {
    d: f64,
    predicted: usize,
    found_type2: usize,
    found_total: usize,
}

fn run_sweep(cli: &Cli, config: &Path, seed_density: Option<usize>, plot: bool) -> Result<ExitCode> {
    let rf = RunFile::load(config)?;
    let cfg = search_config(cli, &rf, seed_density)?;
    let sc = rf.scenario()?;
    let sw = rf.sweep.as_ref().ok_or_else(|| CliError::Usage("missing [sweep] section".into()))?;
    let mut problems = Vec::new();
    if sc.theorem == TheoremId::T1_6 && !sw.d.is_empty() {
        let rows = type2_d_scan(&sc.domain, &sw.d, sc.lambda1, sc.lambda2, rf.eps()?, &cfg, &rf.mfs)?;
        match cli.format {
            Format::Json => write_json(&cli.out.join("d_scan.json"), &rows)?,
            Format::Csv => {
                let flat: Vec<DScanCsv> = rows
                    .iter()
                    .map(|r| DScanCsv { d: r.d, predicted: r.predicted, found_type2: r.found_type2, found_total: r.found_total })
                    .collect();
                write_csv(&cli.out.join("d_scan.csv"), &flat)?
            }
        }
        println!("{:>10} {:>10} {:>12} {:>12}", "d", "predicted", "type II", "total");
        for r in &rows {
            println!("{:>10.5} {:>10} {:>12} {:>12}", r.d, r.predicted, r.found_type2, r.found_total);
        }
        problems.extend(d_scan_flags(&rows));
        if sw.eps.is_empty() {
            return finish(cli, problems);
        }
    }
    let eps = rf.sweep_eps()?;
    let res = sweep(&sc, &eps, &cfg, &rf.mfs)?;
    match cli.format {
        Format::Json => write_json(&cli.out.join("sweep.json"), &res)?,
        Format::Csv => write_csv(&cli.out.join("sweep.csv"), &sweep_rows(&res))?,
    }
    if plot {
        write(&cli.out.join("scaling.svg"), &svg::scaling(&res))?;
        let pairs: Vec<(Point2, Point2)> =
            res.records.iter().flat_map(|r| r.target.iter().map(|&i| (r.points[i].x, r.points[i].y))).collect();
        write(&cli.out.join("locations.svg"), &svg::locations(&sc.domain, sc.p, &pairs)?)?;
    }
    for r in sweep_rows(&res) {
        println!(
            "eps {:.1e}: predicted {} found {} (total {})  |x-P| {}",
            r.eps,
            r.predicted,
            r.found_target,
            r.found_total,
            r.radius_x.map_or("-".into(), |v| format!("{v:.6e}"))
        );
    }
    if let Some(f) = &res.fit {
        println!("exponent {:.5} ± {:.5}  constant {:.5}  R² {:.6}", f.exponent, f.exponent_half_width, f.constant, f.r2);
    }
    problems.extend(res.flags.iter().cloned());
    finish(cli, problems)
}

fn d_scan_flags(rows: &[DScanRow]) -> Vec<String> {
    rows.iter()
        .filter(|r| r.found_type2 != r.predicted)
        .map(|r| format!("d={}: {} type II found, {} predicted", r.d, r.found_type2, r.predicted))
        .collect()
}

fn finish(cli: &Cli, problems: Vec<String>) -> Result<ExitCode> {
    for p in &problems {
        eprintln!("flag: {p}");
    }
    if cli.strict && !problems.is_empty() {
        return Err(CliError::Strict(problems.join("; ")));
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep_rows(res: &SweepResult) -> Vec<SweepRow> {
    res.records
        .iter()
        .map(|r| SweepRow {
            eps: r.eps,
            predicted: r.prediction.as_ref().map_or(0, |s| s.count),
            found_target: r.target.len(),
            found_total: r.points.len(),
            radius_x: r.radius_x,
            radius_y: r.radius_y,
            ratio: r.ratio,
            alignment: r.alignment,
            total_distance: r.total_distance,
            count_mismatch: r.count_mismatch,
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct DiskType2Output {
    lambda: [f64; 2],
    thresholds: Thresholds,
    rows: Vec<Type2DiskSolution>,
}

#[derive(Debug, Serialize)]
struct DiskType2Row {
    s: f64,
    zero_count: usize,
    t: String,
    slope_signs: String,
    fold: bool,
}

fn disk_type2(cli: &Cli, l1: f64, l2: f64, s: &[f64]) -> Result<ExitCode> {
    let th = type2_disk_thresholds(l1, l2)?;
    let grid: Vec<f64> = if s.is_empty() { (0..=39).map(|k| 0.8 + 0.005 * k as f64).collect() } else { s.to_vec() };
    let rows = grid.iter().map(|&s| type2_disk_solve(s, l1, l2)).collect::<krcrit::Result<Vec<_>>>()?;
    println!("s̄ = {:.8}  d1 = {:.8}  d2 = {:.8}", th.s_bar, th.d1, th.d2);
    println!("{:>8} {:>6}  zeros (t, slope sign)", "s", "count");
    let flat: Vec<DiskType2Row> = rows
        .iter()
        .map(|r| DiskType2Row {
            s: r.s,
            zero_count: r.zeros.len(),
            t: r.zeros.iter().map(|z| format!("{:.8}", z.t)).collect::<Vec<_>>().join(" "),
            slope_signs: r.zeros.iter().map(|z| if z.slope_sign > 0 { "+" } else { "-" }).collect::<Vec<_>>().join(" "),
            fold: r.fold.is_some(),
        })
        .collect();
    for r in &flat {
        println!("{:>8.4} {:>6}  {} [{}]{}", r.s, r.zero_count, r.t, r.slope_signs, if r.fold { " near fold" } else { "" });
    }
    match cli.format {
        Format::Json => {
            write_json(&cli.out.join("disk_type2.json"), &DiskType2Output { lambda: [l1, l2], thresholds: th, rows })?
        }
        Format::Csv => write_csv(&cli.out.join("disk_type2.csv"), &flat)?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct MatrixData {
    matrix: Mat2,
    eigen: Eigen2,
}

impl MatrixData {
    fn new(matrix: Mat2) -> Self {
        MatrixData { matrix, eigen: sym_eigen2(&matrix) }
    }
}

#[derive(Debug, Serialize)]
struct MatricesOutput {
    x: Point2,
    tau: f64,
    robin: RobinData,
    mtilde: MatrixData,
    mbar: MatrixData,
    m1: MatrixData,
    m0: Option<MatrixData>,
}

fn matrices(cli: &Cli, config: &Path) -> Result<ExitCode> {
    let rf = RunFile::load(config)?;
    let outer = rf.outer()?;
    let x = rf.x()?;
    let (l1, l2) = rf.strengths()?;
    let tau = l1 / l2;
    let robin = outer.robin(x)?;
    let (mbar, m1) = matrix_mbar_m1(&robin, tau);
    let m0 = match rf.y0()? {
        Some(y0) => {
            let d = KrEvaluator::new(outer.clone()).derivs(&VortexConfig::new(rf.p()?, y0, l1, l2)?)?;
            Some(MatrixData::new(matrix_m0(&d.hess)?))
        }
        None => None,
    };
    let out = MatricesOutput {
        x,
        tau,
        robin,
        mtilde: MatrixData::new(matrix_mtilde(&robin)),
        mbar: MatrixData::new(mbar),
        m1: MatrixData::new(m1),
        m0,
    };
    let show = |name: &str, m: &MatrixData| {
        println!(
            "{name:<3} [[{:+.8e}, {:+.8e}], [{:+.8e}, {:+.8e}]]  eigenvalues {:+.8e} {:+.8e}",
            m.matrix[0][0], m.matrix[0][1], m.matrix[1][0], m.matrix[1][1], m.eigen.values[0], m.eigen.values[1]
        )
    };
    println!("R = {:.10e}  ∇R = ({:+.6e}, {:+.6e})", robin.r, robin.grad_r.x1, robin.grad_r.x2);
    show("M~", &out.mtilde);
    show("M-", &out.mbar);
    show("M1", &out.m1);
    if let Some(m) = &out.m0 {
        show("M0", m);
    }
    write_json(&cli.out.join("matrices.json"), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn report(cli: &Cli, inputs: &[PathBuf], output: &Path) -> Result<ExitCode> {
    if inputs.is_empty() {
        return Err(CliError::Usage("report needs at least one input file".into()));
    }
    let mut names = Vec::new();
    let mut docs = Vec::new();
    for path in inputs {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        names.push(path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned()));
        docs.push(v);
    }
    let mut finds = Vec::new();
    let mut sweeps = Vec::new();
    for (name, v) in names.iter().zip(docs) {
        if v.get("records").is_some() {
            sweeps.push((name.as_str(), serde_json::from_value::<SweepResult>(v)?));
        } else if v.get("points").is_some() {
            finds.push((name.as_str(), serde_json::from_value::<FindOutput>(v)?));
        } else {
            return Err(CliError::Usage(format!("{name}: neither a find nor a sweep output")));
        }
    }
    let mut rows = Vec::new();
    for (name, f) in &finds {
        rows.extend(point_rows(name, f.eps, &f.points));
    }
    for (name, s) in &sweeps {
        for r in &s.records {
            rows.extend(point_rows(name, r.eps, &r.points));
        }
    }
    let path = if output.is_absolute() { output.to_path_buf() } else { cli.out.join(output) };
    write_csv(&path, &rows)?;
    println!("{} rows from {} files written to {}", rows.len(), inputs.len(), path.display());
    Ok(ExitCode::SUCCESS)
}
