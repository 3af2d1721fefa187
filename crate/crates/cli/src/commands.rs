use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use ecr_screen::harness::{parse_run_config, run_grid, variance_filter, CellResult};
use ecr_screen::screening::{default_top_m, iterative_screen, threshold_select, top_m_select};
use ecr_screen::{
    bootstrap_rank_intervals, score_all, BootstrapConfig, DataMatrix, Method, NeighborhoodConfig,
    ScreeningConfig, DEFAULT_RIDGE,
};

use crate::dataset::CsvDataset;
use crate::error::{io_error, CliError, CliResult};
use crate::settings::{Layers, Source};
use crate::{BootstrapArgs, DataArgs, MethodArgs, ScreenArgs, SimulateArgs};

fn pool(workers: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        b = b.num_threads(w);
    }
    b.build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))
}

fn output(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn csv_writer(out: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(output(out)?))
}

fn write_failed(out: Option<&Path>, e: impl std::fmt::Display) -> CliError {
    let name = out.map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string());
    CliError::Runtime(format!("{name}: {e}"))
}

fn load_data(args: &DataArgs, layers: &Layers) -> CliResult<DataMatrix<f64>> {
    let delimiter = layers
        .get::<char>("delimiter", args.delimiter)?
        .unwrap_or(',');
    if !delimiter.is_ascii() {
        return Err(CliError::Usage(format!(
            "delimiter `{delimiter}` must be a single ASCII character"
        )));
    }
    let dataset = CsvDataset {
        path: args.input.clone(),
        response: layers
            .get::<String>("response", args.response.clone())?
            .unwrap_or_else(|| "0".into()),
        delimiter: delimiter as u8,
        header: !layers.flag_set("no_header", args.no_header)?,
    };
    let data = dataset.load()?;
    log::info!(
        "{}: n = {}, p = {}, response `{}`",
        dataset.path.display(),
        data.n(),
        data.p(),
        data.response_label()
    );
    match layers.get::<usize>("variance_keep", args.variance_keep)? {
        Some(keep) => Ok(variance_filter(&data, keep)?),
        None => Ok(data),
    }
}

fn method_config(args: &MethodArgs, layers: &Layers) -> CliResult<ScreeningConfig> {
    let method: Method = layers.get("method", args.method)?.unwrap_or(Method::Cch);
    let k = layers.get::<usize>("k", args.k)?.unwrap_or(2);
    let kn = layers.get::<usize>("kn", args.kn)?.unwrap_or(2);
    let ridge = layers
        .get::<f64>("ridge", args.ridge)?
        .unwrap_or(DEFAULT_RIDGE);
    let neighborhood = if method.uses_neighborhood() {
        Some(NeighborhoodConfig::new(k, kn)?)
    } else {
        None
    };
    Ok(ScreeningConfig::new(method, neighborhood, ridge)?)
}

enum Rule {
    TopM(usize),
    Threshold(f64),
    Iterative { delta: f64, stop_below: usize },
}

fn selection_rule(args: &ScreenArgs, layers: &Layers, data: &DataMatrix<f64>) -> CliResult<Rule> {
    let top_m = layers.get_with_source::<usize>("top_m", args.top_m)?;
    let threshold = layers.get_with_source::<f64>("threshold", args.threshold)?;
    let delta = layers.get_with_source::<f64>("delta", args.delta)?;
    let sources = [
        top_m.map(|v| v.1),
        threshold.map(|v| v.1),
        delta.map(|v| v.1),
    ];
    let rank = |s: Source| match s {
        Source::Flag => 0,
        Source::Config => 1,
        Source::Env => 2,
    };
    let Some(best) = sources.iter().flatten().map(|&s| rank(s)).min() else {
        return Ok(Rule::TopM(default_top_m(data.n())));
    };
    let chosen: Vec<usize> = (0..3)
        .filter(|&i| sources[i].map(rank) == Some(best))
        .collect();
    if chosen.len() > 1 {
        return Err(CliError::Usage(
            "choose only one of --top-m, --threshold and --delta".into(),
        ));
    }
    Ok(match chosen[0] {
        0 => Rule::TopM(top_m.unwrap().0),
        1 => Rule::Threshold(threshold.unwrap().0),
        _ => Rule::Iterative {
            delta: delta.unwrap().0,
            stop_below: layers
                .get::<usize>("stop_below", args.stop_below)?
                .unwrap_or(data.n().min(data.p())),
        },
    })
}

pub fn screen(args: ScreenArgs) -> CliResult<()> {
    let layers = Layers::load(args.run.config.as_deref())?;
    let config = method_config(&args.method, &layers)?;
    let _ = layers.get::<u64>("seed", args.run.seed)?;
    let workers = layers.get::<usize>("workers", args.run.workers)?;
    let data = load_data(&args.data, &layers)?;
    let rule = selection_rule(&args, &layers, &data)?;

    let (scores, active) = pool(workers)?.install(|| -> CliResult<_> {
        let scores = score_all(&data, &config)?;
        let active = match rule {
            Rule::TopM(m) => top_m_select(&scores, m),
            Rule::Threshold(t) => threshold_select(&scores, t),
            Rule::Iterative { delta, stop_below } => {
                iterative_screen(&data, &config, delta, stop_below)?
            }
        };
        Ok((scores, active))
    })?;
    for w in &scores.warnings {
        log::warn!("{w}");
    }
    log::info!("{} of {} covariates selected", active.len(), data.p());

    let out = args.run.out.as_deref();
    let mut w = csv_writer(out)?;
    let fail = |e: csv::Error| write_failed(out, e);
    w.write_record(["rank", "covariate", "score", "selected", "argmax_subset"])
        .map_err(fail)?;
    for (r, j) in scores.order().into_iter().enumerate() {
        let subset: Vec<&str> = scores.argmax_subsets[j]
            .members()
            .iter()
            .map(|&m| data.covariate_label(m))
            .collect();
        w.write_record([
            (r + 1).to_string(),
            data.covariate_label(j).to_string(),
            scores.scores[j].to_string(),
            active.contains(j).to_string(),
            subset.join(";"),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| write_failed(out, e))
}

fn progress_line(i: usize, total: usize, res: &CellResult) -> String {
    let s = &res.cell.spec;
    let design = match (s.rho, s.t_mix) {
        (Some(rho), _) => format!(
            "rho={rho} cov={} noise={}",
            s.covariate_family(),
            s.noise_family()
        ),
        (_, Some(t)) => format!("t_mix={t}"),
        _ => String::new(),
    };
    let props: Vec<String> = res
        .results
        .iter()
        .map(|r| format!("{}={:.3}", r.label, r.proportion))
        .collect();
    format!(
        "[{}/{total}] {} p={} n={} {design}: {} ({} reps, {:.1}s)",
        i + 1,
        s.model,
        s.p,
        s.n,
        props.join(" "),
        res.cell.replications,
        res.seconds
    )
}

pub fn simulate(args: SimulateArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| io_error(&args.config, e))?;
    let mut run = parse_run_config(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        for cell in &mut run.cells {
            cell.base_seed = seed;
        }
    }
    let total = run.cells.len();
    eprintln!("simulate: {total} cell(s) from {}", args.config.display());
    let out: PathBuf = args.out.clone();
    pool(args.workers)?.install(|| {
        run_grid::<f64>(&run.cells, &out, |i, res| {
            eprintln!("{}", progress_line(i, total, res))
        })
    })?;
    Ok(())
}

pub fn bootstrap(args: BootstrapArgs) -> CliResult<()> {
    let layers = Layers::load(args.run.config.as_deref())?;
    let config = method_config(&args.method, &layers)?;
    let defaults = BootstrapConfig::default();
    let boot = BootstrapConfig {
        replicates: layers
            .get("replicates", args.replicates)?
            .unwrap_or(defaults.replicates),
        alpha: layers.get("alpha", args.alpha)?.unwrap_or(defaults.alpha),
        top_k: layers.get("top_k", args.top_k)?.unwrap_or(defaults.top_k),
        seed: layers.get("seed", args.run.seed)?.unwrap_or(defaults.seed),
    };
    boot.validate()?;
    let workers = layers.get::<usize>("workers", args.run.workers)?;
    eprintln!(
        "bootstrap: B={}, alpha={}, top_k={}, seed={}, method={}",
        boot.replicates, boot.alpha, boot.top_k, boot.seed, config.method
    );
    let data = load_data(&args.data, &layers)?;
    let res = pool(workers)?.install(|| bootstrap_rank_intervals(&data, &config, &boot))?;

    let out = args.run.out.as_deref();
    let mut w = csv_writer(out)?;
    let fail = |e: csv::Error| write_failed(out, e);
    w.write_record(["covariate", "point_rank", "lower", "upper", "influential"])
        .map_err(fail)?;
    for s in &res.summaries {
        w.write_record([
            s.label.clone(),
            s.point_rank.to_string(),
            s.lower.to_string(),
            s.upper.to_string(),
            s.influential.to_string(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| write_failed(out, e))?;
    let influential = res.summaries.iter().filter(|s| s.influential).count();
    eprintln!("bootstrap: {influential} influential covariate(s)");

    if let Some(path) = args.ranks_out.as_deref() {
        let mut w = csv_writer(Some(path))?;
        let fail = |e: csv::Error| write_failed(Some(path), e);
        w.write_record(["replicate", "covariate", "rank"])
            .map_err(fail)?;
        for (b, ranks) in res.replicate_ranks.iter().enumerate() {
            for (j, r) in ranks.iter().enumerate() {
                w.write_record([
                    (b + 1).to_string(),
                    data.covariate_label(j).to_string(),
                    r.to_string(),
                ])
                .map_err(fail)?;
            }
        }
        w.flush().map_err(|e| write_failed(Some(path), e))?;
    }
    Ok(())
}
