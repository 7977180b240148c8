use std::path::Path;
use std::time::Instant;

use fars_core::io::write_atomic;
use fars_core::simulation::{
    aggregate_results, make_population_model, run_condition_with, summary_csv, ConditionResult, Preset, RunOptions,
    SimulationCondition,
};
use fars_core::Error;
use serde::Deserialize;

use crate::svg;
use crate::{SimulateArgs, EXIT_INADMISSIBLE, EXIT_INPUT, EXIT_OK};

pub const SUMMARY_FILE: &str = "simulation.csv";
pub const ARCHIVE_FILE: &str = "replications.json";

/// Contents of a `--config` file. Conditions are re-indexed by position.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimConfig {
    conditions: Vec<SimulationCondition>,
    #[serde(default)]
    options: RunOptions,
}

fn load(args: &SimulateArgs) -> Result<(Vec<SimulationCondition>, RunOptions), String> {
    if let Some(name) = &args.preset {
        let preset = Preset::from_name(name).ok_or_else(|| {
            let known: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset `{name}` (known: {})", known.join(", "))
        })?;
        return Ok((preset.conditions(), RunOptions::default()));
    }
    let path = args.config.as_deref().ok_or("either --preset or --config is required")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg: SimConfig = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if cfg.conditions.is_empty() {
        return Err(format!("{}: `conditions` is empty", path.display()));
    }
    Ok((cfg.conditions, cfg.options))
}

fn write_outputs(out: &Path, results: &[ConditionResult], args: &SimulateArgs) -> fars_core::Result<usize> {
    let rows = aggregate_results(results);
    write_atomic(&out.join(SUMMARY_FILE), summary_csv(&rows).as_bytes())?;
    if args.archive {
        let json = serde_json::to_string(results).map_err(|e| Error::Parse(e.to_string()))?;
        write_atomic(&out.join(ARCHIVE_FILE), json.as_bytes())?;
    }
    let mut charts = 0;
    if args.svg {
        for panel in svg::panels(&rows) {
            write_atomic(&out.join(panel.file_name()), svg::render(&panel).as_bytes())?;
            charts += 1;
        }
    }
    Ok(charts)
}

pub(crate) fn run(args: &SimulateArgs) -> u8 {
    let (mut conditions, opts) = match load(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    for (i, c) in conditions.iter_mut().enumerate() {
        c.index = i;
        c.master_seed = args.seed;
        if let (Some(reps), false) = (args.reps, c.is_population_only()) {
            c.replications = reps;
        }
    }
    for c in &conditions {
        if let Err(e) = make_population_model(c) {
            eprintln!("error: {e}");
            return EXIT_INADMISSIBLE;
        }
    }

    let started = Instant::now();
    let mut results = Vec::with_capacity(conditions.len());
    for (k, c) in conditions.iter().enumerate() {
        let t = Instant::now();
        match run_condition_with(c, &opts) {
            Ok(r) => {
                if !c.is_population_only() {
                    let n = &r.counts;
                    eprintln!(
                        "[{}/{}] {}: {} converged, {} not converged, {} failed, {} heywood ({:.1}s)",
                        k + 1,
                        conditions.len(),
                        c.label(),
                        n.converged,
                        n.not_converged,
                        n.failed,
                        n.heywood,
                        t.elapsed().as_secs_f64()
                    );
                }
                results.push(r);
            }
            Err(e @ Error::InadmissibleCondition { .. }) => {
                eprintln!("error: {e}");
                return EXIT_INADMISSIBLE;
            }
            Err(e) => {
                eprintln!("error: {}: {e}", c.label());
                return EXIT_INPUT;
            }
        }
    }

    match write_outputs(&args.out, &results, args) {
        Ok(charts) => {
            eprintln!(
                "wrote {} ({} conditions{}) in {:.1}s",
                args.out.join(SUMMARY_FILE).display(),
                results.len(),
                if charts > 0 { format!(", {charts} charts") } else { String::new() },
                started.elapsed().as_secs_f64()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: writing to {}: {e}", args.out.display());
            EXIT_INPUT
        }
    }
}
