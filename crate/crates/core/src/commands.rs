//! Implementations behind the CLI subcommands.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::accept::{run_all, run_suite, Suite, SuiteOutcome};
use crate::analysis::{classify, gamma0, is_symmetric_prior, is_totally_symmetric};
use crate::config::ExperimentConfig;
use crate::engine::{run_all_states, run_dynamics};
use crate::error::Error;
use crate::prior::Prior;
use crate::random::random_table_prior;
use crate::security::Security;
use crate::state::state_count;
use crate::trace::Trace;

/// Command failures, mapped onto process exit codes.
#[derive(Debug)]
pub enum CmdError {
    /// Malformed config, schema violation, unknown suite — exit 2.
    Schema(String),
    /// A size cap was exceeded — exit 3.
    Resource(String),
    /// Filesystem trouble — exit 1.
    Io(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Schema(_) => 2,
            CmdError::Resource(_) => 3,
            CmdError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Schema(m) => write!(f, "{m}"),
            CmdError::Resource(m) => write!(f, "{m}"),
            CmdError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceCap(m) => CmdError::Resource(format!("resource cap exceeded: {m}")),
            other => CmdError::Schema(other.to_string()),
        }
    }
}

/// What a command produced: a payload for `--out`/stdout and a one-line
/// human summary for stderr.
#[derive(Debug)]
pub struct CmdOutput {
    pub payload: String,
    pub summary: String,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CmdError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

pub fn write_payload(payload: &str, out: Option<&Path>) -> Result<(), CmdError> {
    match out {
        Some(path) => fs::write(path, payload)
            .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{payload}");
            Ok(())
        }
    }
}

fn require_security(cfg: &ExperimentConfig) -> Result<&Security, CmdError> {
    cfg.security
        .as_ref()
        .ok_or_else(|| CmdError::Schema("config is missing a 'security'".into()))
}

fn require_prior(cfg: &ExperimentConfig) -> Result<&Prior, CmdError> {
    cfg.prior
        .as_ref()
        .ok_or_else(|| CmdError::Schema("config is missing a 'prior'".into()))
}

/// Runs the dynamics for the configured true state and emits the trace.
pub fn cmd_run(cfg: &ExperimentConfig, max_rounds: Option<u32>) -> Result<CmdOutput, CmdError> {
    let g = require_security(cfg)?;
    let prior = require_prior(cfg)?;
    let n = g.n_players();
    cfg.check_n(n)?;
    let state_spec = cfg
        .true_state
        .as_ref()
        .ok_or_else(|| CmdError::Schema("config is missing a 'true_state'".into()))?;
    let state = state_spec.resolve(n)?;
    // 2^N rounds always suffice for stationarity
    let budget = max_rounds
        .or(cfg.max_rounds)
        .unwrap_or(state_count(n) as u32);
    let trace = run_dynamics(g, prior, &state, budget)?;
    Ok(CmdOutput {
        payload: trace.to_json_string(),
        summary: trace.summary(),
    })
}

/// Runs every true state and emits the traces as a JSON array.
pub fn cmd_all_states(cfg: &ExperimentConfig) -> Result<CmdOutput, CmdError> {
    let g = require_security(cfg)?;
    let prior = require_prior(cfg)?;
    cfg.check_n(g.n_players())?;
    let all = run_all_states(g, prior)?;
    let converged = all.traces.iter().filter(|t| t.converged_to_truth).count();
    let payload = format!(
        "[{}]",
        all.traces
            .iter()
            .map(Trace::to_json_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(CmdOutput {
        payload,
        summary: format!(
            "{converged}/{} states reach the true payoff; stationary after round {}",
            all.traces.len(),
            all.rounds
        ),
    })
}

/// Classifies the configured security (against the prior when present).
pub fn cmd_classify(cfg: &ExperimentConfig) -> Result<CmdOutput, CmdError> {
    let g = require_security(cfg)?;
    cfg.check_n(g.n_players())?;
    let report = classify(g, cfg.prior.as_ref())?;
    let mut tags = Vec::new();
    if report.is_parity.is_some() {
        tags.push("parity");
    }
    if report.is_symmetric.is_some() {
        tags.push("symmetric");
    }
    if report.threshold_witness.is_some() {
        tags.push("threshold");
    }
    let summary = format!(
        "classes: [{}] predicted_round_two={}",
        tags.join("+"),
        report.predicted_round_two
    );
    let payload = serde_json::to_string_pretty(&report)
        .map_err(|e| CmdError::Io(format!("serialization failed: {e}")))?;
    Ok(CmdOutput { payload, summary })
}

pub const SWEEP_CSV_HEADER: &str =
    "security,prior,true_state,equilibrium_round,final_price,converged,gamma0,tags";

/// Sweeps securities × (explicit + seeded random priors); one CSV row per
/// true state, ordered by grid index regardless of scheduling.
pub fn cmd_sweep(
    cfg: &ExperimentConfig,
    seed_override: Option<u64>,
    jobs: Option<usize>,
) -> Result<CmdOutput, CmdError> {
    let mut securities: Vec<Security> = cfg.securities.clone();
    if securities.is_empty() {
        if let Some(g) = &cfg.security {
            securities.push(g.clone());
        }
    }
    if securities.is_empty() {
        return Err(CmdError::Schema(
            "sweep needs 'securities' (or a single 'security')".into(),
        ));
    }
    let n = securities[0].n_players();
    cfg.check_n(n)?;
    if let Some(g) = securities.iter().find(|g| g.n_players() != n) {
        return Err(CmdError::Schema(format!(
            "sweep mixes player counts {n} and {}",
            g.n_players()
        )));
    }

    let mut priors: Vec<(String, Prior)> = cfg
        .priors
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, p)| (format!("p{i}"), p))
        .collect();
    if let Some(p) = &cfg.prior {
        if cfg.priors.is_empty() {
            priors.push(("p0".into(), p.clone()));
        }
    }
    let seed = seed_override.or(cfg.seed).unwrap_or(0);
    if cfg.random_priors > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..cfg.random_priors {
            priors.push((format!("r{k}"), random_table_prior(n, &mut rng)));
        }
    }
    if priors.is_empty() {
        return Err(CmdError::Schema(
            "sweep needs 'priors', a 'prior', or 'random_priors'".into(),
        ));
    }
    for (label, p) in &priors {
        if p.n_players() != n {
            return Err(CmdError::Schema(format!(
                "prior {label} has {} players, securities have {n}",
                p.n_players()
            )));
        }
    }

    // Per-security class tags, computed once.
    let tags: Vec<String> = securities
        .iter()
        .map(|g| security_tags(g))
        .collect::<Result<_, _>>()?;

    let grid: Vec<(usize, usize)> = (0..securities.len())
        .flat_map(|si| (0..priors.len()).map(move |pi| (si, pi)))
        .collect();

    let run_grid = || -> Result<Vec<String>, CmdError> {
        let mut cells: Vec<(usize, Result<Vec<String>, Error>)> = grid
            .par_iter()
            .enumerate()
            .map(|(idx, &(si, pi))| {
                let g = &securities[si];
                let (_, prior) = &priors[pi];
                let result = sweep_cell(g, prior, &format!("s{si}"), &priors[pi].0, &tags[si]);
                (idx, result)
            })
            .collect();
        cells.sort_by_key(|(idx, _)| *idx);
        let mut rows = Vec::new();
        for (_, cell) in cells {
            rows.extend(cell?);
        }
        Ok(rows)
    };

    let rows = match jobs {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CmdError::Io(format!("cannot build worker pool: {e}")))?;
            pool.install(run_grid)?
        }
        None => run_grid()?,
    };

    let mut payload = String::from(SWEEP_CSV_HEADER);
    for row in &rows {
        payload.push('\n');
        payload.push_str(row);
    }
    Ok(CmdOutput {
        payload,
        summary: format!(
            "{} securities × {} priors × {} states = {} rows (seed {seed})",
            securities.len(),
            priors.len(),
            state_count(n),
            rows.len()
        ),
    })
}

fn security_tags(g: &Security) -> Result<String, CmdError> {
    let report = classify(g, None)?;
    let mut tags = Vec::new();
    if report.is_parity.is_some() {
        tags.push("parity");
    }
    if report.is_symmetric.is_some() {
        tags.push("symmetric");
    }
    if report.threshold_witness.is_some() {
        tags.push("threshold");
    }
    Ok(tags.join("+"))
}

fn sweep_cell(
    g: &Security,
    prior: &Prior,
    sec_label: &str,
    prior_label: &str,
    tags: &str,
) -> Result<Vec<String>, Error> {
    let symmetric_pair = is_totally_symmetric(g).is_some() && is_symmetric_prior(prior).is_some();
    let gamma = if symmetric_pair {
        Some(gamma0(g, prior)?.slope)
    } else {
        None
    };
    let gamma_field = gamma.map(|v| v.to_string()).unwrap_or_default();
    let all = run_all_states(g, prior)?;
    Ok(all
        .traces
        .iter()
        .map(|t| format!("{sec_label},{prior_label},{},{gamma_field},{tags}", t.csv_row()))
        .collect())
}

/// Runs one verification suite (or `all`); returns the report and whether
/// everything passed.
pub fn cmd_verify(suite: &str) -> Result<(CmdOutput, bool), CmdError> {
    let outcomes: Vec<SuiteOutcome> = if suite.eq_ignore_ascii_case("all") {
        run_all()
    } else {
        let parsed = Suite::parse(suite)
            .ok_or_else(|| CmdError::Schema(format!("unknown suite '{suite}' (A1..A9 or all)")))?;
        vec![run_suite(parsed)]
    };

    let mut payload = String::new();
    for outcome in &outcomes {
        payload.push_str(&outcome.line());
        payload.push('\n');
        for failure in &outcome.failures {
            payload.push_str(&format!("    {failure}\n"));
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let all_passed = passed == outcomes.len();
    let summary = format!("{passed}/{} suites passed", outcomes.len());
    Ok((CmdOutput { payload, summary }, all_passed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rat;

    fn run_cfg() -> ExperimentConfig {
        ExperimentConfig {
            schema: 1,
            mode: None,
            n: Some(2),
            security: Some(Security::parity(2, 1, 0b11).unwrap()),
            prior: Some(Prior::product_biased(2, Rat::new(3, 4)).unwrap()),
            true_state: Some(crate::config::StateSpec::Spins(vec![1, -1])),
            securities: vec![],
            priors: vec![],
            random_priors: 0,
            seed: None,
            max_rounds: None,
            suite: None,
            out: None,
        }
    }

    #[test]
    fn run_summary_matches_trace_format() {
        let out = cmd_run(&run_cfg(), None).unwrap();
        assert_eq!(out.summary, "eq@2 price=-1 truth=true");
        let parsed: serde_json::Value = serde_json::from_str(&out.payload).unwrap();
        assert_eq!(parsed["true_state"], 1);
    }

    #[test]
    fn missing_pieces_are_schema_errors() {
        let mut cfg = run_cfg();
        cfg.true_state = None;
        let err = cmd_run(&cfg, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);

        let mut cfg = run_cfg();
        cfg.security = None;
        assert_eq!(cmd_all_states(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn sweep_rows_are_deterministic() {
        let mut cfg = run_cfg();
        cfg.true_state = None;
        cfg.random_priors = 2;
        cfg.seed = Some(9);
        let a = cmd_sweep(&cfg, None, None).unwrap();
        let b = cmd_sweep(&cfg, None, Some(2)).unwrap();
        assert_eq!(a.payload, b.payload);
        assert!(a.payload.starts_with(SWEEP_CSV_HEADER));
        // 1 security × (1 + 2) priors × 4 states
        assert_eq!(a.payload.lines().count(), 1 + 12);
    }

    #[test]
    fn verify_rejects_unknown_suites() {
        let err = cmd_verify("A17").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
