use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ising_traj::experiment::{run_experiment, sweep_pump, trajectory_seed, ExperimentOptions};
use ising_traj::graph::{
    default_k_j0, default_sk_std, gen_k, gen_sk, load_graph, max_eigenvalue, save_graph, scale_to_feasibility,
    threshold_pump, validate_rates,
};
use ising_traj::oracle::{default_tolerance, enumerate_spectrum, write_spectrum_csv, MAX_ENUMERATION_MODES};
use ising_traj::sampling::{fit_temperature, read_histogram_csv, write_histogram_csv, FitOptions};
use ising_traj::seeds::{derive_seed, GRAPH_STREAM};
use ising_traj::spins::format_config;
use ising_traj::{CouplingGraph, Error, Experiment, GraphKind, SimParams, SpectrumTable};
use serde::Serialize;

use crate::args::{
    EnumerateArgs, FitArgs, FitCmdArgs, GenerateArgs, GraphArgs, KindArg, PhysicsArgs, SimulateArgs, SweepArgs,
};
use crate::output::{create, fit_json, line_rows, write_json, SampleSink};
use crate::CliError;

/// Margin below the feasibility boundary used by `--rescale-to-feasible`.
const RESCALE_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
struct GraphInfo {
    source: String,
    fingerprint: String,
    n: usize,
    kind: String,
    generator_seed: Option<u64>,
    /// Factor applied by `--rescale-to-feasible` (1 when untouched).
    rescale_factor: f64,
    lambda_max: f64,
    threshold_pump: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    status: &'a str,
    args: &'a [String],
    base_seed: u64,
    graph: &'a GraphInfo,
    params: &'a SimParams,
    details: P,
    outputs: Vec<String>,
}

struct ResolvedGraph {
    graph: CouplingGraph,
    info: GraphInfo,
}

fn generate(kind: KindArg, n: usize, std_dev: Option<f64>, j0: Option<f64>, gamma: f64, seed: u64) -> ising_traj::Result<CouplingGraph> {
    match kind {
        KindArg::Sk => gen_sk(n, std_dev.unwrap_or_else(|| default_sk_std(n, gamma)), seed),
        KindArg::K => gen_k(n, j0.unwrap_or_else(|| default_k_j0(n, gamma)), seed),
    }
}

/// Loads or generates the graph, applies the feasibility policy and computes
/// the threshold.
fn resolve_graph(a: &GraphArgs, gamma: f64, base_seed: u64) -> Result<ResolvedGraph, CliError> {
    let (graph, source, generator_seed) = match (&a.graph, a.kind, a.n) {
        (Some(path), _, _) => (load_graph(path)?, path.display().to_string(), None),
        (None, Some(kind), Some(n)) => {
            let seed = a.graph_seed.unwrap_or_else(|| derive_seed(base_seed, GRAPH_STREAM, 0));
            (generate(kind, n, a.std_dev, a.j0, gamma, seed)?, "generated".to_string(), Some(seed))
        }
        _ => return Err(CliError::Usage("give either --graph FILE or both --kind and --n".into())),
    };
    let (graph, rescale_factor) = feasible(graph, gamma, a.rescale_to_feasible)?;
    let info = GraphInfo {
        source,
        fingerprint: graph.fingerprint(),
        n: graph.n(),
        kind: graph.kind().to_string(),
        generator_seed: generator_seed.or(graph.seed()),
        rescale_factor,
        lambda_max: max_eigenvalue(&graph),
        threshold_pump: threshold_pump(&graph, gamma)?,
    };
    Ok(ResolvedGraph { graph, info })
}

fn feasible(g: CouplingGraph, gamma: f64, rescale: bool) -> Result<(CouplingGraph, f64), CliError> {
    match validate_rates(&g, gamma) {
        Ok(_) => Ok((g, 1.0)),
        Err(Error::InfeasibleRates { .. }) if rescale => {
            let (scaled, factor) = scale_to_feasibility(&g, gamma, RESCALE_MARGIN)?;
            eprintln!("rescaled couplings by {factor:.6} to make every one-photon rate non-negative");
            Ok((scaled, factor))
        }
        Err(e) => Err(e.into()),
    }
}

fn spectrum_for(g: &CouplingGraph, tolerance: Option<f64>) -> Result<Option<SpectrumTable>, CliError> {
    if g.n() > MAX_ENUMERATION_MODES {
        eprintln!(
            "n = {} exceeds the enumeration limit {MAX_ENUMERATION_MODES}: fitting visited configurations only",
            g.n()
        );
        return Ok(None);
    }
    Ok(Some(enumerate_spectrum(g, tolerance.unwrap_or_else(|| default_tolerance(g)))?))
}

fn sim_params(p: &PhysicsArgs, pump: f64, seed: u64) -> SimParams {
    SimParams {
        gamma: p.gamma,
        eta: p.eta,
        pump,
        dt: p.dt,
        t_max: p.t_max,
        sample_interval: p.sample_interval,
        burn_in: p.burn_in,
        seed,
        noise: !(p.no_noise || p.mean_field),
        damping_index: p.damping_index.into(),
    }
}

fn fit_options(f: &FitArgs) -> FitOptions {
    FitOptions { min_count: f.min_count, target: f.fit_target.into(), weights: f.fit_weights.into() }
}

fn experiment_options(p: &PhysicsArgs, f: &FitArgs) -> ExperimentOptions {
    ExperimentOptions { fit: fit_options(f), tie_break: p.tie_break.into(), mean_field: p.mean_field }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn cmd_generate_graph(a: &GenerateArgs) -> Result<(), CliError> {
    let seed = a.graph_seed.unwrap_or_else(|| derive_seed(a.seed, GRAPH_STREAM, 0));
    let g = generate(a.kind, a.n, a.std_dev, a.j0, a.gamma, seed)?;
    let (g, factor) = feasible(g, a.gamma, a.rescale_to_feasible)?;
    let rates = validate_rates(&g, a.gamma)?;
    save_graph(&g, &a.out)?;
    let (lambda, gth) = (max_eigenvalue(&g), threshold_pump(&g, a.gamma)?);
    let worst = rates.iter().copied().enumerate().min_by(|x, y| x.1.total_cmp(&y.1)).expect("n >= 2");
    println!("wrote {} ({} n={} seed={seed})", a.out.display(), GraphKind::from(a.kind), g.n());
    println!("fingerprint {}", g.fingerprint());
    println!("lambda_max {lambda:.12}");
    println!("threshold G_th/gamma {:.12}", gth / a.gamma);
    println!("rescale factor {factor}");
    println!("smallest one-photon rate {:.6} (mode {})", worst.1, worst.0);
    Ok(())
}

#[derive(Serialize)]
struct SimulateDetails {
    pump_ratio: Option<f64>,
    trajectory_seed: u64,
    mean_field: bool,
    fit: FitOptions,
    samples_collected: u64,
    success_probability: Option<f64>,
    ground_energy: Option<f64>,
    most_visited_energy: Option<f64>,
    error: Option<String>,
}

fn resolve_pump(pump: Option<f64>, ratio: Option<f64>, gth: f64) -> Result<(f64, Option<f64>), CliError> {
    match (pump, ratio) {
        (Some(g), _) => Ok((g, (gth > 0.0).then(|| g / gth))),
        (None, r) => {
            let r = r.unwrap_or(1.25);
            if !(gth > 0.0) {
                return Err(CliError::Usage(format!(
                    "threshold is {gth}, so a pump ratio is meaningless; give --pump instead"
                )));
            }
            Ok((r * gth, Some(r)))
        }
    }
}

/// Writes histogram and fit report of one experiment into `dir`.
fn write_experiment(dir: &Path, e: &Experiment) -> Result<Vec<String>, CliError> {
    let hist = dir.join("histogram.csv");
    write_histogram_csv(&e.levels, create(&hist)?)?;
    let fit = dir.join("fit.json");
    write_json(&fit, &fit_json(&e.fit, e.autocorrelation_time, e.samples()))?;
    Ok(vec![display(&hist), display(&fit)])
}

pub fn cmd_simulate(a: &SimulateArgs, recorded: &[String]) -> Result<(), CliError> {
    let p = &a.physics;
    let rg = resolve_graph(&a.graph, p.gamma, p.seed)?;
    let (pump, ratio) = resolve_pump(a.pump, a.pump_ratio, rg.info.threshold_pump)?;
    let params = sim_params(p, pump, trajectory_seed(p.seed, 0));
    params.validate()?;
    let spectrum = spectrum_for(&rg.graph, a.tolerance)?;
    std::fs::create_dir_all(&a.out).map_err(CliError::io(format!("cannot create {}", a.out.display())))?;

    let mut sink = SampleSink::open(a.samples, &a.out, rg.graph.n())?;
    let mut sink_error = None;
    let opts = experiment_options(p, &a.fit);
    let e = run_experiment(&params, &rg.graph, spectrum.as_ref(), &opts, |t, alpha| {
        if sink_error.is_none() {
            sink_error = sink.write(t, alpha).err();
        }
    })?;
    if let Some(err) = sink_error {
        return Err(CliError::Io { context: "cannot write samples".into(), source: err });
    }
    let mut outputs = write_experiment(&a.out, &e)?;
    outputs.extend(sink.finish()?.map(|p| display(&p)));

    let failure = match (&e.abort, &e.fit) {
        (Some(err), _) => Some(err.to_string()),
        (None, Err(err)) if !p.mean_field => Some(err.to_string()),
        _ => None,
    };
    let status = match (&e.abort, &failure) {
        (Some(_), _) => "aborted",
        (None, Some(_)) => "fit-failed",
        _ => "ok",
    };
    let details = SimulateDetails {
        pump_ratio: ratio,
        trajectory_seed: params.seed,
        mean_field: p.mean_field,
        fit: fit_options(&a.fit),
        samples_collected: e.samples(),
        success_probability: e.success_probability,
        ground_energy: spectrum.as_ref().map(|s| s.ground_energy()),
        most_visited_energy: e.most_visited_energy(&rg.graph),
        error: failure.clone(),
    };
    let manifest_path = a.out.join("manifest.json");
    outputs.push(display(&manifest_path));
    let manifest = Manifest {
        tool: "ising-traj",
        version: env!("CARGO_PKG_VERSION"),
        command: "simulate",
        status,
        args: recorded,
        base_seed: p.seed,
        graph: &rg.info,
        params: &params,
        details,
        outputs,
    };
    write_json(&manifest_path, &manifest)?;

    println!("samples {} (pump G = {pump:.6}, G/G_th = {})", e.samples(), ratio.map_or("n/a".into(), |r| format!("{r:.4}")));
    match &e.fit {
        Ok(f) => println!("t_eff {:.6} +- {:.6}  r^2 {:.4}  levels {}", f.t_eff, f.std_err, f.r_squared, f.n_points),
        Err(err) => println!("fit: {err}"),
    }
    if let Some(s) = e.success_probability {
        println!("ground-state probability {s:.6}");
    }
    if let Some(tau) = e.autocorrelation_time {
        println!("energy autocorrelation time {tau:.4}");
    }
    match (e.abort, failure) {
        (Some(err), _) => Err(err.into()),
        (None, Some(msg)) => Err(CliError::Numerical(msg)),
        _ => Ok(()),
    }
}

pub fn cmd_enumerate(a: &EnumerateArgs) -> Result<(), CliError> {
    let rg = resolve_graph(&a.graph, a.gamma, a.seed)?;
    let g = &rg.graph;
    let spec = enumerate_spectrum(g, a.tolerance.unwrap_or_else(|| default_tolerance(g)))?;
    let mut report: Box<dyn Write> = match &a.out {
        Some(path) => {
            write_spectrum_csv(&spec, create(path)?)?;
            Box::new(io::stdout())
        }
        None => {
            write_spectrum_csv(&spec, io::stdout().lock())?;
            Box::new(io::stderr())
        }
    };
    let n = g.n();
    let lines = [
        format!("n {n}, configurations {}, canonical {}", 1u64 << n, 1u64 << (n - 1)),
        format!("levels {} (tolerance {:e})", spec.levels().len(), spec.tolerance()),
        format!("ground energy {:.12}", spec.ground_energy()),
    ];
    let result = (|| -> io::Result<()> {
        for l in &lines {
            writeln!(report, "{l}")?;
        }
        for s in spec.ground_states() {
            writeln!(report, "ground state {}", format_config(s))?;
        }
        Ok(())
    })();
    result.map_err(CliError::io("cannot write the report"))
}

pub fn cmd_fit(a: &FitCmdArgs) -> Result<(), CliError> {
    let file = std::fs::File::open(&a.histogram).map_err(CliError::io(format!("cannot open {}", a.histogram.display())))?;
    let levels = read_histogram_csv(io::BufReader::new(file), &a.histogram)?;
    let total: u64 = levels.iter().map(|l| l.count).sum();
    let fit = fit_temperature(&levels, &fit_options(&a.fit));
    let value = fit_json(&fit, None, total);
    match &a.out {
        Some(path) => write_json(path, &value)?,
        None => println!("{}", serde_json::to_string_pretty(&value)?),
    }
    fit.map(|_| ()).map_err(Into::into)
}

#[derive(Serialize)]
struct PointInfo {
    index: usize,
    g_ratio: f64,
    pump: f64,
    seed: u64,
    samples: u64,
    status: String,
    error: Option<String>,
    directory: Option<String>,
}

#[derive(Serialize)]
struct SweepDetails {
    ratios: Vec<f64>,
    workers: usize,
    fit: FitOptions,
    mean_field: bool,
    points: Vec<PointInfo>,
}

pub fn cmd_sweep_pump(a: &SweepArgs, recorded: &[String]) -> Result<(), CliError> {
    let p = &a.physics;
    let rg = resolve_graph(&a.graph, p.gamma, p.seed)?;
    let gth = rg.info.threshold_pump;
    if !(gth > 0.0) {
        return Err(CliError::Usage(format!("threshold is {gth}; pump ratios need a positive threshold")));
    }
    let base = sim_params(p, 0.0, p.seed);
    base.validate()?;
    let spectrum = spectrum_for(&rg.graph, a.tolerance)?;
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))?;
    let opts = experiment_options(p, &a.fit);
    let ratios = &a.ratios.0;
    let points = pool.install(|| sweep_pump(&base, &rg.graph, spectrum.as_ref(), gth, ratios, &opts));

    std::fs::create_dir_all(&a.out).map_err(CliError::io(format!("cannot create {}", a.out.display())))?;
    let table_path = a.out.join("sweep.csv");
    let lines_path = a.out.join("lines.csv");
    let mut table = create(&table_path)?;
    let mut lines = create(&lines_path)?;
    let werr = CliError::io("cannot write sweep tables");
    let mut outputs = vec![display(&table_path), display(&lines_path)];
    let mut infos = Vec::new();
    let mut failures = 0;
    let mut rows = vec!["g_ratio,t_eff,std_err,r_squared,samples".to_string()];
    let mut line_text = vec!["g_ratio,energy,ln_p_per_config,count,fitted_ln_p".to_string()];

    for point in &points {
        let dir: PathBuf = a.out.join(format!("point-{:03}", point.index));
        let (status, error, samples) = match &point.outcome {
            Ok(e) => {
                std::fs::create_dir_all(&dir).map_err(CliError::io(format!("cannot create {}", dir.display())))?;
                outputs.extend(write_experiment(&dir, e)?);
                match (&e.abort, &e.fit) {
                    (Some(err), _) => ("aborted", Some(err.to_string()), e.samples()),
                    (None, Err(err)) => ("fit-failed", Some(err.to_string()), e.samples()),
                    (None, Ok(_)) => ("ok", None, e.samples()),
                }
            }
            Err(err) => ("failed", Some(err.to_string()), 0),
        };
        match point.outcome.as_ref().ok().and_then(|e| e.fit.as_ref().ok().map(|f| (e, f))) {
            Some((e, f)) if e.abort.is_none() => {
                rows.push(format!("{},{},{},{},{}", point.ratio, f.t_eff, f.std_err, f.r_squared, samples));
                for (energy, lnp, count, fitted) in line_rows(&e.levels, f, a.fit.min_count) {
                    line_text.push(format!("{},{energy},{lnp},{count},{fitted}", point.ratio));
                }
            }
            _ => rows.push(format!("{},NaN,NaN,NaN,{samples}", point.ratio)),
        }
        if status != "ok" {
            failures += 1;
            eprintln!("point {} (G/G_th = {}): {}", point.index, point.ratio, error.as_deref().unwrap_or(status));
        }
        infos.push(PointInfo {
            index: point.index,
            g_ratio: point.ratio,
            pump: point.pump,
            seed: point.seed,
            samples,
            status: status.to_string(),
            error,
            directory: point.outcome.is_ok().then(|| display(&dir)),
        });
    }
    (|| -> io::Result<()> {
        for r in &rows {
            writeln!(table, "{r}")?;
        }
        for l in &line_text {
            writeln!(lines, "{l}")?;
        }
        table.flush()?;
        lines.flush()
    })()
    .map_err(werr)?;

    let manifest_path = a.out.join("manifest.json");
    outputs.push(display(&manifest_path));
    let status = if failures == 0 { "ok" } else { "partial-failure" };
    let manifest = Manifest {
        tool: "ising-traj",
        version: env!("CARGO_PKG_VERSION"),
        command: "sweep-pump",
        status,
        args: recorded,
        base_seed: p.seed,
        graph: &rg.info,
        params: &base,
        details: SweepDetails {
            ratios: ratios.clone(),
            workers,
            fit: fit_options(&a.fit),
            mean_field: p.mean_field,
            points: infos,
        },
        outputs,
    };
    write_json(&manifest_path, &manifest)?;
    for r in &rows {
        println!("{r}");
    }
    if failures > 0 {
        return Err(CliError::Numerical(format!("{failures} of {} sweep points failed", points.len())));
    }
    Ok(())
}
