//! Command execution and manifest writing.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chainscope::discretization::{bilipschitz_ratio, discretize, estimate_df, refine_study, Quantity, SystemSpec};
use chainscope::metric::SizeCap;
use chainscope::mixing::{
    classify, classify_instances, cyclic_factor, default_single_jumps, product_pseudometric, quotient_factor,
    ClassifyOptions, ProductOptions,
};
use chainscope::transitivity::Section4Report;
use chainscope::{barrier_with_jumps, DiscreteSystem, FiniteMetricSpace, Error, Mode, Result, Sources};
use serde_json::{json, Value};

use crate::input::{check_epsilons, check_zero, jump_graph, resolve, schedule};
use crate::{Cli, Command, Common};

struct Outcome {
    outputs: Vec<PathBuf>,
    config: Value,
    summary: Value,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut s = text.to_string();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn single_epsilon(c: &Common) -> Result<Option<f64>> {
    match c.epsilon.as_slice() {
        [] => Ok(None),
        [e] => Ok(Some(*e)),
        _ => Err(invalid("this command takes a single --epsilon")),
    }
}

fn system(spec: &SystemSpec) -> Result<DiscreteSystem> {
    discretize::<f64>(spec)
}

pub fn run(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let c = &cli.common;
    if let Some(t) = c.threads {
        if t == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| invalid(e.to_string()))?;
    }
    check_epsilons(&c.epsilon)?;
    check_zero(c.numerical_zero)?;
    let jg = jump_graph(&c.jump_graph)?;
    std::fs::create_dir_all(&c.out)?;

    let (name, outcome) = match &cli.command {
        Command::Classify { diagnostics } => ("classify", run_classify(c, *diagnostics)?),
        Command::Barrier => ("barrier", run_barrier(c)?),
        Command::Factor { factor } => ("factor", run_factor(c, factor)?),
        Command::Section4 => ("section4", run_section4(c)?),
        Command::Study { quantities } => ("study", run_study(c, quantities)?),
        Command::Metrics { df_iterations } => ("metrics", run_metrics(c, *df_iterations)?),
    };

    let cap = SizeCap::from_env();
    let manifest = json!({
        "tool": "chainscope",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "config": {
            "mode": c.mode.as_str(),
            "policy": c.policy.as_str(),
            "jump_graph_flag": jg.map_or("auto".to_string(), |g| g.to_string()),
            "threads": rayon::current_num_threads(),
            "size_cap": { "materialized": cap.materialized, "product_search": cap.product_search },
            "out": c.out.display().to_string(),
            "resolved": outcome.config,
        },
        "summary": outcome.summary,
        "outputs": outcome.outputs.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "wall_time_ms": start.elapsed().as_secs_f64() * 1e3,
    });
    write_text(&c.out.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

fn run_classify(c: &Common, diagnostics: bool) -> Result<Outcome> {
    let opts = ClassifyOptions {
        jump_graph: jump_graph(&c.jump_graph)?,
        diagnostics,
        ..ClassifyOptions::default()
    };
    let sched = schedule(c.schedule.as_deref())?;
    let first_n = sched.as_ref().and_then(|s| s.n.first().copied());
    let spec = resolve(c, first_n)?;
    let result = if spec.is_grid() {
        let mut ns = sched.map_or(vec![spec.n], |s| s.n);
        ns.sort_unstable();
        ns.dedup();
        let mut instances = Vec::new();
        for n in ns {
            let sys = system(&spec.clone().with_n(n))?;
            if c.epsilon.is_empty() {
                instances.push(sys.scale_instance(None, c.numerical_zero));
            }
            for &e in &c.epsilon {
                instances.push(sys.scale_instance(Some(e), c.numerical_zero));
            }
        }
        classify_instances(&instances, &opts)?
    } else {
        if sched.is_some() {
            return Err(invalid("--schedule lists grid sizes; use --epsilon for finite instances"));
        }
        let sys = system(&spec)?;
        let eps = if c.epsilon.is_empty() { vec![sys.default_epsilon()] } else { c.epsilon.clone() };
        let zero = c.numerical_zero.unwrap_or_else(|| sys.default_numerical_zero());
        classify(&sys.relation, &sys.space, &eps, zero, &opts)?
    };
    let json_path = c.out.join("classification.json");
    let csv_path = c.out.join("evidence.csv");
    write_text(&json_path, &result.to_json()?)?;
    result.evidence_csv(create(&csv_path)?)?;
    Ok(Outcome {
        outputs: vec![json_path, csv_path],
        config: json!({
            "system": spec.to_json_value(),
            "diagnostics": diagnostics,
            "max_chain_len": opts.max_chain_len,
            "rows": result.evidence.iter().map(|r| json!({
                "n_points": r.n_points,
                "scale": r.scale,
                "epsilon": r.epsilon,
                "numerical_zero": r.numerical_zero,
                "jump_graph": r.jump_graph,
            })).collect::<Vec<_>>(),
        }),
        summary: json!({
            "chain_transitive": result.chain_transitive.as_str(),
            "chain_mixing": result.chain_mixing.as_str(),
            "strong_chain_transitive": result.strong_chain_transitive.as_str(),
            "strong_chain_mixing": result.strong_chain_mixing.as_str(),
            "period": result.period,
        }),
    })
}

fn run_barrier(c: &Common) -> Result<Outcome> {
    let spec = resolve(c, None)?;
    let sys = system(&spec)?;
    let n = sys.space.len();
    let jg = jump_graph(&c.jump_graph)?.unwrap_or_else(|| default_single_jumps(n));
    let field = barrier_with_jumps(&sys.relation, &sys.space, c.mode, c.policy, &Sources::All, jg)?;
    let path = c.out.join("barrier.csv");
    field.to_csv(create(&path)?, sys.space.labels())?;
    Ok(Outcome {
        outputs: vec![path],
        config: json!({ "system": spec.to_json_value(), "jump_graph": jg.to_string() }),
        summary: json!({ "max_value": field.max_value(), "n_points": n }),
    })
}

fn run_factor(c: &Common, factor: &str) -> Result<Outcome> {
    let spec = resolve(c, None)?;
    let sys = system(&spec)?;
    let n = sys.space.len();
    let (q, config) = match factor {
        "cyclic" => {
            let eps = single_epsilon(c)?.unwrap_or_else(|| sys.default_epsilon());
            let q = cyclic_factor(&sys.relation, &sys.space, eps)?;
            (q, json!({ "factor": "cyclic", "epsilon": eps }))
        }
        "isometric" => {
            let mut popts = ProductOptions::fast(n);
            if let Some(g) = jump_graph(&c.jump_graph)? {
                popts = popts.with_jump_graph(g);
            }
            let pseudo = product_pseudometric(&sys.relation, &sys.space, c.mode, &popts)?;
            let zero = c.numerical_zero.unwrap_or_else(|| sys.default_numerical_zero());
            let q = quotient_factor(&sys.relation, &pseudo.table, zero)?;
            let config = json!({
                "factor": "isometric",
                "pseudo_metric": if c.mode == Mode::Length { "rho" } else { "theta" },
                "numerical_zero": zero,
                "jump_graph": popts.jump_graph.to_string(),
            });
            (q, config)
        }
        other => return Err(invalid(format!("unknown factor '{other}' (cyclic or isometric)"))),
    };
    let path = c.out.join("quotient.json");
    write_text(&path, &q.to_json()?)?;
    let mut config = config;
    config["system"] = spec.to_json_value();
    Ok(Outcome {
        outputs: vec![path],
        config,
        summary: json!({
            "factor_kind": q.factor_kind,
            "classes": q.class_count(),
            "isometry_defect": q.isometry_defect,
        }),
    })
}

fn run_section4(c: &Common) -> Result<Outcome> {
    let spec = resolve(c, None)?;
    let sys = system(&spec)?;
    let report = Section4Report::compute(&sys.relation)?;
    let path = c.out.join("section4.json");
    write_text(&path, &report.to_json()?)?;
    Ok(Outcome {
        outputs: vec![path],
        config: json!({ "system": spec.to_json_value() }),
        summary: json!({
            "transitive": report.transitive,
            "weak_mixing": report.weak_mixing,
            "witness": report.witness,
        }),
    })
}

fn run_study(c: &Common, quantities: &[String]) -> Result<Outcome> {
    if !c.epsilon.is_empty() || c.numerical_zero.is_some() {
        return Err(invalid("study uses the default scale of each grid; drop --epsilon/--numerical-zero"));
    }
    let sched = schedule(c.schedule.as_deref())?.ok_or_else(|| invalid("study needs --schedule"))?;
    let spec = resolve(c, sched.n.first().copied())?;
    if !spec.is_grid() {
        return Err(invalid("study needs a grid system"));
    }
    let mut qs: Vec<Quantity> = quantities.iter().map(|q| q.parse()).collect::<Result<_>>()?;
    if qs.is_empty() {
        qs = sched.quantities;
    }
    if qs.is_empty() {
        qs = Quantity::ALL.to_vec();
    }
    let opts = ClassifyOptions {
        jump_graph: jump_graph(&c.jump_graph)?,
        ..ClassifyOptions::default()
    };
    let table = refine_study::<f64>(&spec, &sched.n, &qs, &opts)?;
    let path = c.out.join("trend.csv");
    table.to_csv(create(&path)?)?;
    Ok(Outcome {
        outputs: vec![path],
        config: json!({
            "system": spec.to_json_value(),
            "N": sched.n,
            "quantities": qs.iter().map(|q| q.as_str()).collect::<Vec<_>>(),
            "epsilon": table.rows.iter().map(|r| r.epsilon).collect::<Vec<_>>(),
        }),
        summary: json!(table.trends.iter().map(|(q, t)| (q.as_str().to_string(), json!(t.as_str()))).collect::<serde_json::Map<_, _>>()),
    })
}

fn run_metrics(c: &Common, df_iterations: Option<usize>) -> Result<Outcome> {
    let spec = resolve(c, None)?;
    let sys = system(&spec)?;
    let path = c.out.join("metric.csv");
    sys.space.write_csv_file(&path)?;
    let mut outputs = vec![path];
    let mut summary = json!({ "report": sys.space.report(), "n_points": sys.space.len() });
    if let Some(k) = df_iterations {
        let df = estimate_df(&sys.space, &sys.relation, k)?;
        let ratio = bilipschitz_ratio(&df.table, sys.space.table())?;
        let space = FiniteMetricSpace::from_table_unchecked(sys.space.labels().to_vec(), df.table.clone());
        let df_path = c.out.join("df.csv");
        space.write_csv_file(&df_path)?;
        outputs.push(df_path);
        summary["df"] = json!({ "iterations": k, "ratio_to_d": ratio, "report": df.validate(1e-12) });
    }
    Ok(Outcome {
        outputs,
        config: json!({ "system": spec.to_json_value(), "df_iterations": df_iterations }),
        summary,
    })
}
