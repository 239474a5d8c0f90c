use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use estimand_lab::analysis_sets::selection_bias_demo;
use estimand_lab::dgp::{simulate_population, split_seed, ScenarioConfig};
use estimand_lab::estimand::EstimandSpec;
use estimand_lab::estimators::{bootstrap_ci, estimate as run_estimate, EstimatorOptions};
use estimand_lab::montecarlo::{replicate, GapSummary};
use estimand_lab::oracle::oracle_estimand;
use estimand_lab::potential_outcomes::derive_all;
use estimand_lab::speclang::{parse_spec, plan_of, print_specs, AnalysisPlan};
use estimand_lab::{Error, Estimate};
use sha2::{Digest, Sha256};

use crate::output::{self, flag, num, opt_num};
use crate::CliError;

/// Share of failed replications above which a run is reported unstable.
const MAX_FAILURE_SHARE: f64 = 0.5;
const LEVEL: f64 = 0.95;

fn read_text(path: &Path, what: &str) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(format!("reading {what} {}", path.display())))?;
    String::from_utf8(bytes).map_err(|_| CliError::Usage(format!("{what} {} is not valid UTF-8", path.display())))
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let text = read_text(path, "config")?;
    let mut cfg = ScenarioConfig::from_kv_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

struct LoadedSpec {
    specs: Vec<EstimandSpec>,
    sha256: String,
}

fn load_spec(path: &Path) -> Result<LoadedSpec, CliError> {
    let text = read_text(path, "spec")?;
    let specs = parse_spec(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(LoadedSpec { specs, sha256: hex::encode(Sha256::digest(text.as_bytes())) })
}

fn plans(specs: &[EstimandSpec]) -> Result<Vec<AnalysisPlan>, CliError> {
    specs
        .iter()
        .map(|s| plan_of(s).map_err(|e| CliError::Usage(format!("estimand \"{}\": {e}", s.name))))
        .collect()
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

fn manifest(command: &str, cfg: &ScenarioConfig, spec_sha: Option<&str>, reps: usize) -> String {
    format!(
        "# estimand-lab run manifest\ntool_version = {}\ncommand = {command}\nseed = {}\nreps = {reps}\nspec_sha256 = {}\ntimestamp = {}\n\n# scenario\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        spec_sha.unwrap_or("none"),
        timestamp(),
        cfg.to_kv_string()
    )
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(CliError::io(format!("writing {}", path.display())))
}

/// Writes `bytes` to `dir/name` (next to a manifest) or to standard output.
fn emit(dir: Option<&Path>, name: &str, bytes: &[u8], manifest_text: &str) -> Result<(), CliError> {
    match dir {
        Some(d) => {
            prepare_dir(d)?;
            write_file(&d.join(name), bytes)?;
            write_file(&d.join("manifest.txt"), manifest_text.as_bytes())
        }
        None => io::stdout().write_all(bytes).map_err(CliError::io("writing to standard output")),
    }
}

pub fn simulate(config: &Path, seed: Option<u64>, out: &Path, emit_latent: bool) -> Result<(), CliError> {
    let cfg = load_config(config, seed)?;
    let pop = simulate_population::<f64>(&cfg)?;
    let records = derive_all(&pop);
    prepare_dir(out)?;
    let mut buf = Vec::new();
    output::write_observed(&mut buf, &records, cfg.k)?;
    write_file(&out.join("observed.csv"), &buf)?;
    if emit_latent {
        let mut buf = Vec::new();
        output::write_latent(&mut buf, &pop, cfg.k)?;
        write_file(&out.join("latent.csv"), &buf)?;
    }
    write_file(&out.join("manifest.txt"), manifest("simulate", &cfg, None, 1).as_bytes())
}

pub fn truth(config: &Path, seed: Option<u64>, spec: &Path) -> Result<(), CliError> {
    let cfg = load_config(config, seed)?;
    let loaded = load_spec(spec)?;
    let pop = simulate_population::<f64>(&cfg)?;
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(output::TRUTH_HEADER)?;
    for s in &loaded.specs {
        let v = oracle_estimand(&pop, s)
            .map_err(|e| CliError::from(e).with_context(&format!("estimand \"{}\"", s.name)))?;
        out.write_record([s.name.clone(), v.strategy.to_string(), num(v.value), v.population_size_used.to_string()])?;
    }
    let bytes = out.into_inner().map_err(|e| CliError::Io { context: "writing CSV".into(), source: e.into_error() })?;
    emit(None, "", &bytes, "")
}

struct RepOutcome {
    oracle: Result<f64, Error>,
    estimate: Result<Estimate, Error>,
}

impl RepOutcome {
    fn pair(&self) -> Option<(f64, f64)> {
        match (&self.estimate, &self.oracle) {
            (Ok(e), Ok(o)) => Some((e.point, *o)),
            _ => None,
        }
    }

    fn status(&self) -> &'static str {
        match (&self.estimate, &self.oracle) {
            (Err(e), _) | (_, Err(e)) => e.code(),
            _ => "ok",
        }
    }
}

/// Exit status of a finished run: undefined when no replication has an
/// oracle, unstable when more than half fail.
fn judge(name: &str, outcomes: &[&RepOutcome]) -> Result<(), CliError> {
    if outcomes.iter().all(|o| o.oracle.is_err()) {
        let e = outcomes[0].oracle.as_ref().unwrap_err();
        return Err(CliError::Undefined(format!("estimand \"{name}\": {e}")));
    }
    let failed = outcomes.iter().filter(|o| o.pair().is_none()).count();
    if failed as f64 > MAX_FAILURE_SHARE * outcomes.len() as f64 {
        return Err(CliError::Unstable(format!(
            "estimand \"{name}\": estimation failed in {failed} of {} replications",
            outcomes.len()
        )));
    }
    Ok(())
}

pub fn estimate(
    config: &Path,
    seed: Option<u64>,
    spec: &Path,
    reps: usize,
    boot: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if boot != 0 && boot < 100 {
        return Err(CliError::Usage(format!("--boot must be 0 or at least 100, got {boot}")));
    }
    let cfg = load_config(config, seed)?;
    let loaded = load_spec(spec)?;
    let plans = plans(&loaded.specs)?;
    let specs = &loaded.specs;

    let per_rep = replicate::<f64, _, _>(&cfg, reps, |rep, pop, records| {
        let rep_seed = split_seed(cfg.seed, rep);
        let opts = EstimatorOptions { seed: rep_seed, level: LEVEL, ..Default::default() };
        specs
            .iter()
            .zip(&plans)
            .map(|(s, plan)| RepOutcome {
                oracle: oracle_estimand(pop, s).map(|v| v.value),
                estimate: if boot > 0 {
                    bootstrap_ci(records, &plan.target, &opts, boot, LEVEL, rep_seed)
                } else {
                    run_estimate(records, &plan.target, &opts)
                },
            })
            .collect::<Vec<_>>()
    })?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(output::RESULTS_HEADER)?;
    let blank = String::new;
    for (i, s) in specs.iter().enumerate() {
        let tag = plans[i].oracle.to_string();
        for (rep, outcomes) in per_rep.iter().enumerate() {
            let o = &outcomes[i];
            let e = o.estimate.as_ref().ok();
            let mut row = vec![
                "replication".to_string(),
                s.name.clone(),
                tag.clone(),
                rep.to_string(),
                o.status().to_string(),
                opt_num(e.map(|e| e.point)),
                opt_num(e.map(|e| e.std_error)),
                opt_num(e.map(|e| e.ci_low)),
                opt_num(e.map(|e| e.ci_high)),
                e.map(|e| e.n_used.to_string()).unwrap_or_default(),
                e.map(|e| e.n_imputations.to_string()).unwrap_or_default(),
                opt_num(o.oracle.as_ref().ok().copied()),
            ];
            row.resize(output::RESULTS_HEADER.len(), blank());
            w.write_record(&row)?;
        }
        let pairs: Vec<Option<(f64, f64)>> = per_rep.iter().map(|o| o[i].pair()).collect();
        let g = GapSummary::from_pairs(&pairs);
        let mut row = vec!["summary".to_string(), s.name.clone(), tag, blank(), blank()];
        row.resize(11, blank());
        row.extend([
            num(g.oracle),
            g.reps.to_string(),
            g.failures.to_string(),
            num(g.mean),
            num(g.mc_se),
            num(g.gap),
            num(g.gap_se),
            flag(g.within_3se()),
        ]);
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { context: "writing CSV".into(), source: e.into_error() })?;
    emit(out, "results.csv", &bytes, &manifest("estimate", &cfg, Some(&loaded.sha256), reps))?;
    for (i, s) in specs.iter().enumerate() {
        let column: Vec<&RepOutcome> = per_rep.iter().map(|o| &o[i]).collect();
        judge(&s.name, &column)?;
    }
    Ok(())
}

pub fn compare(config: &Path, seed: Option<u64>, spec: &Path, reps: usize, out: Option<&Path>) -> Result<(), CliError> {
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let cfg = load_config(config, seed)?;
    let loaded = load_spec(spec)?;
    let plans = plans(&loaded.specs)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(output::COMPARE_HEADER)?;
    let mut unstable = None;
    for (s, plan) in loaded.specs.iter().zip(&plans) {
        let opts = EstimatorOptions { seed: cfg.seed, level: LEVEL, ..Default::default() };
        let rows = selection_bias_demo(&cfg, s, reps, &opts)?;
        for r in rows {
            let g = &r.summary;
            if g.failure_rate() > MAX_FAILURE_SHARE && unstable.is_none() {
                unstable = Some(format!(
                    "estimand \"{}\" on {}: estimation failed in {} of {} replications",
                    s.name, r.set, g.failures, g.reps
                ));
            }
            w.write_record([
                s.name.clone(),
                plan.oracle.to_string(),
                r.set.label().to_string(),
                g.reps.to_string(),
                g.failures.to_string(),
                num(g.mean),
                num(g.mc_se),
                num(g.oracle),
                num(g.gap),
                num(g.gap_se),
                flag(g.within_3se()),
                num(r.mean_max_abs_smd),
                num(r.flagged_share),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { context: "writing CSV".into(), source: e.into_error() })?;
    emit(out, "compare.csv", &bytes, &manifest("compare", &cfg, Some(&loaded.sha256), reps))?;
    match unstable {
        Some(msg) => Err(CliError::Unstable(msg)),
        None => Ok(()),
    }
}

pub fn check(spec: &Path) -> Result<(), CliError> {
    let loaded = load_spec(spec)?;
    plans(&loaded.specs)?;
    emit(None, "", print_specs(&loaded.specs).as_bytes(), "")
}
