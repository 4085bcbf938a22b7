//! Batch runner and report generator: protocol x game-family sweeps,
//! machine-readable records (CSV or JSON), summaries against each protocol's
//! declared guarantee, and the on-disk formats for games, profiles, and
//! replayable run records.
//!
//! Sweeps are deterministic functions of their configuration: instance seeds
//! are derived from the base seed with a splitmix hash, per-instance
//! failures become records with an `error` field rather than aborting, and
//! records are sorted by (protocol, family, n, seed) before output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{replay, run_protocol, ChannelPolicy, ProtocolOutcome};
use crate::game::{BimatrixGame, GameError, MixedStrategy, StrategyProfile};
use crate::generators::{
    column_indicator, identity_indicator_game, padded_subset_game, random_game, GeneratorError,
    SubsetMatrix,
};
use crate::protocols::{
    guarantee, lookup, natural_policy, GuaranteeMetric, ProtocolParams,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// Instance families addressable by name from sweeps and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilySpec {
    /// Seeded uniform random game.
    Random,
    /// Subset-gadget matrix as a square game, paired with a column
    /// indicator. Only square for n <= 3; other sizes yield no instance.
    Mn,
    /// Identity row matrix against a column indicator (column = seed mod n).
    Indicator,
    /// The 2x2 identity/indicator pair; defined only at n = 2.
    WsneOneway,
    /// Padded subset gadget with seeded host sets, against an indicator on
    /// a gadget column. Needs n >= 4.
    PaddedMn,
}

impl FamilySpec {
    pub fn id(self) -> &'static str {
        match self {
            FamilySpec::Random => "random",
            FamilySpec::Mn => "mn",
            FamilySpec::Indicator => "indicator",
            FamilySpec::WsneOneway => "wsne-oneway",
            FamilySpec::PaddedMn => "padded-mn",
        }
    }

    pub fn parse(s: &str) -> Result<FamilySpec, HarnessError> {
        match s {
            "random" => Ok(FamilySpec::Random),
            "mn" => Ok(FamilySpec::Mn),
            "indicator" => Ok(FamilySpec::Indicator),
            "wsne-oneway" => Ok(FamilySpec::WsneOneway),
            "padded-mn" => Ok(FamilySpec::PaddedMn),
            other => Err(HarnessError::UnknownFamily(other.to_string())),
        }
    }

    pub fn all() -> [FamilySpec; 5] {
        [
            FamilySpec::Random,
            FamilySpec::Mn,
            FamilySpec::Indicator,
            FamilySpec::WsneOneway,
            FamilySpec::PaddedMn,
        ]
    }

    /// Builds the family instance at size `n` for `seed`, or `None` when the
    /// family has no instance of that size.
    pub fn instantiate(self, n: usize, seed: u64) -> Result<Option<BimatrixGame>, HarnessError> {
        if n == 0 {
            return Err(HarnessError::Config("n must be at least 1".into()));
        }
        match self {
            FamilySpec::Random => Ok(Some(random_game(n, seed))),
            FamilySpec::Indicator => {
                let game = BimatrixGame::new(
                    crate::game::Matrix::identity(n),
                    column_indicator(n, (seed % n as u64) as usize)?,
                )?;
                Ok(Some(game))
            }
            FamilySpec::WsneOneway => {
                if n != 2 {
                    return Ok(None);
                }
                Ok(Some(identity_indicator_game(2, (seed % 2) as usize)?))
            }
            FamilySpec::Mn => {
                // The subset matrix is square exactly when it has n rows.
                let gadget = SubsetMatrix::new(n)?;
                if gadget.row_count() != n {
                    return Ok(None);
                }
                let game = BimatrixGame::new(
                    gadget.matrix().clone(),
                    column_indicator(n, (seed % n as u64) as usize)?,
                )?;
                Ok(Some(game))
            }
            FamilySpec::PaddedMn => {
                if n < 4 {
                    return Ok(None);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                // Largest gadget leaving at least one free row and column.
                let mut dims = None;
                for n_prime in 1..n {
                    let k = n_prime.isqrt().max(1);
                    if let Some(rows) = binomial_small(n_prime, k) {
                        if rows < n {
                            dims = Some((n_prime, rows));
                        }
                    }
                }
                let (n_prime, row_count) = dims.expect("n >= 4 always fits a gadget");
                let mut all_rows: Vec<usize> = (0..n).collect();
                all_rows.shuffle(&mut rng);
                let host_rows = &all_rows[..row_count];
                let mut all_cols: Vec<usize> = (0..n).collect();
                all_cols.shuffle(&mut rng);
                let host_cols = &all_cols[..n_prime];
                let padded = padded_subset_game(n, host_rows, host_cols)?;
                let target = padded.gadget_cols()[(seed % n_prime as u64) as usize];
                let game =
                    BimatrixGame::new(padded.matrix().clone(), column_indicator(n, target)?)?;
                Ok(Some(game))
            }
        }
    }
}

fn binomial_small(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul((n - k + i) as u128)?;
        acc /= i as u128;
    }
    usize::try_from(acc).ok()
}

impl std::fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Output format for sweep records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(HarnessError::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// Full description of a sweep; two sweeps with equal configs produce
/// identical records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub protocols: Vec<String>,
    pub families: Vec<FamilySpec>,
    pub n_values: Vec<usize>,
    pub base_seed: u64,
    /// Instances per (family, n) cell.
    pub runs: u32,
    pub delta: f64,
    /// Per-protocol default when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
    pub resample_cap: u32,
    /// Record destination; stdout when absent.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Record format; CSV when absent.
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.protocols.is_empty() {
            return Err(HarnessError::Config("no protocols selected".into()));
        }
        if self.families.is_empty() {
            return Err(HarnessError::Config("no families selected".into()));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(HarnessError::Config("n values must be positive".into()));
        }
        if self.runs == 0 {
            return Err(HarnessError::Config("runs must be at least 1".into()));
        }
        for p in &self.protocols {
            if lookup(p).is_none() {
                return Err(HarnessError::UnknownProtocol(p.clone()));
            }
        }
        Ok(())
    }

    /// Effective parameters for one protocol of the sweep.
    pub fn params_for(&self, protocol_id: &str) -> ProtocolParams {
        let mut params = crate::protocols::default_params(protocol_id);
        if let Some(alpha) = self.alpha {
            params.alpha = alpha;
        }
        params.delta = self.delta;
        params.resample_cap = self.resample_cap;
        params
    }
}

/// One row of a sweep report. Failures keep the identifying fields and
/// carry the error text instead of measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub protocol: String,
    pub family: String,
    pub n: usize,
    pub seed: u64,
    pub eps_ne: Option<f64>,
    pub eps_wsne: Option<f64>,
    pub bits_total: Option<u64>,
    pub bits_row_to_col: Option<u64>,
    pub bits_col_to_row: Option<u64>,
    pub case_label: Option<String>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

/// Splitmix64 hash step, used to derive per-instance seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Seed of one sweep instance.
pub fn instance_seed(base: u64, family: FamilySpec, n: usize, rep: u32) -> u64 {
    let mix = splitmix64(base)
        ^ splitmix64(fnv(family.id()))
        ^ splitmix64(n as u64)
        ^ splitmix64(0xf00d ^ rep as u64);
    splitmix64(mix)
}

fn fnv(s: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Player seeds derived from an instance seed.
pub fn player_seeds(instance: u64) -> [u64; 2] {
    [splitmix64(instance ^ 1), splitmix64(instance ^ 2)]
}

/// Runs one protocol on one game with derived seeds; shared by sweeps, the
/// CLI, and the verification suites.
pub fn run_instance(
    protocol_id: &str,
    game: &BimatrixGame,
    instance: u64,
    params: &ProtocolParams,
) -> Result<ProtocolOutcome, HarnessError> {
    let protocol =
        lookup(protocol_id).ok_or_else(|| HarnessError::UnknownProtocol(protocol_id.into()))?;
    let policy = natural_policy(protocol);
    run_protocol(game, protocol, &policy, player_seeds(instance), params)
        .map_err(|e| HarnessError::Config(e.to_string()))
}

/// Executes the whole sweep: one record per (protocol, family instance).
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>, HarnessError> {
    config.validate()?;
    let mut records = Vec::new();
    for protocol_id in &config.protocols {
        let protocol = lookup(protocol_id).expect("validated");
        let policy = natural_policy(protocol);
        let params = config.params_for(protocol_id);
        for &family in &config.families {
            for &n in &config.n_values {
                for rep in 0..config.runs {
                    let seed = instance_seed(config.base_seed, family, n, rep);
                    let game = match family.instantiate(n, seed) {
                        Ok(Some(game)) => game,
                        // Family has no instance at this size.
                        Ok(None) => continue,
                        // Instance-generation failures are data, like run
                        // failures.
                        Err(err) => {
                            records.push(SweepRecord {
                                protocol: protocol_id.clone(),
                                family: family.id().to_string(),
                                n,
                                seed,
                                eps_ne: None,
                                eps_wsne: None,
                                bits_total: None,
                                bits_row_to_col: None,
                                bits_col_to_row: None,
                                case_label: None,
                                wall_ms: 0.0,
                                error: Some(err.to_string()),
                            });
                            continue;
                        }
                    };
                    let start = Instant::now();
                    let result =
                        run_protocol(&game, protocol, &policy, player_seeds(seed), &params);
                    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                    let record = match result {
                        Ok(outcome) => SweepRecord {
                            protocol: protocol_id.clone(),
                            family: family.id().to_string(),
                            n,
                            seed,
                            eps_ne: Some(outcome.report.eps_ne),
                            eps_wsne: Some(outcome.report.eps_wsne),
                            bits_total: Some(outcome.transcript.bits_total()),
                            bits_row_to_col: Some(outcome.transcript.bits_row_to_col),
                            bits_col_to_row: Some(outcome.transcript.bits_col_to_row),
                            case_label: Some(outcome.case_label),
                            wall_ms,
                            error: None,
                        },
                        Err(err) => SweepRecord {
                            protocol: protocol_id.clone(),
                            family: family.id().to_string(),
                            n,
                            seed,
                            eps_ne: None,
                            eps_wsne: None,
                            bits_total: None,
                            bits_row_to_col: None,
                            bits_col_to_row: None,
                            case_label: None,
                            wall_ms,
                            error: Some(err.to_string()),
                        },
                    };
                    records.push(record);
                }
            }
        }
    }
    records.sort_by(|a, b| {
        (&a.protocol, &a.family, a.n, a.seed).cmp(&(&b.protocol, &b.family, b.n, b.seed))
    });
    Ok(records)
}

/// Per-protocol aggregate of a sweep, including the count of records whose
/// measured epsilon breaks the protocol's declared guarantee.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolSummary {
    pub protocol: String,
    pub runs: usize,
    pub errors: usize,
    pub max_eps_ne: f64,
    pub mean_eps_ne: f64,
    pub max_eps_wsne: f64,
    pub mean_eps_wsne: f64,
    pub max_bits_total: u64,
    pub violations: usize,
}

pub fn summarize(records: &[SweepRecord], config: &SweepConfig) -> Vec<ProtocolSummary> {
    let mut protocols: Vec<String> = records.iter().map(|r| r.protocol.clone()).collect();
    protocols.sort();
    protocols.dedup();

    let mut out = Vec::new();
    for protocol in protocols {
        let rows: Vec<&SweepRecord> =
            records.iter().filter(|r| r.protocol == protocol).collect();
        let params = config.params_for(&protocol);
        let bound = guarantee(&protocol, &params);
        let mut summary = ProtocolSummary {
            protocol: protocol.clone(),
            runs: rows.len(),
            errors: 0,
            max_eps_ne: 0.0,
            mean_eps_ne: 0.0,
            max_eps_wsne: 0.0,
            mean_eps_wsne: 0.0,
            max_bits_total: 0,
            violations: 0,
        };
        let mut ok_runs = 0usize;
        for r in rows {
            if r.error.is_some() {
                summary.errors += 1;
                continue;
            }
            ok_runs += 1;
            let eps_ne = r.eps_ne.unwrap_or(0.0);
            let eps_wsne = r.eps_wsne.unwrap_or(0.0);
            summary.max_eps_ne = summary.max_eps_ne.max(eps_ne);
            summary.mean_eps_ne += eps_ne;
            summary.max_eps_wsne = summary.max_eps_wsne.max(eps_wsne);
            summary.mean_eps_wsne += eps_wsne;
            summary.max_bits_total = summary.max_bits_total.max(r.bits_total.unwrap_or(0));
            if let Some(g) = bound {
                let measured = match g.metric {
                    GuaranteeMetric::EpsNe => eps_ne,
                    GuaranteeMetric::EpsWsne => eps_wsne,
                };
                if measured > g.threshold {
                    summary.violations += 1;
                }
            }
        }
        if ok_runs > 0 {
            summary.mean_eps_ne /= ok_runs as f64;
            summary.mean_eps_wsne /= ok_runs as f64;
        }
        out.push(summary);
    }
    out
}

/// Renders the summary as an aligned text table.
pub fn summary_table(summaries: &[ProtocolSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:>6} {:>7} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "protocol", "runs", "errors", "max_ne", "mean_ne", "max_wsne", "mean_wsne", "max_bits",
        "violations"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<14} {:>6} {:>7} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10} {:>10}",
            s.protocol,
            s.runs,
            s.errors,
            s.max_eps_ne,
            s.mean_eps_ne,
            s.max_eps_wsne,
            s.mean_eps_wsne,
            s.max_bits_total,
            s.violations
        );
    }
    out
}

const CSV_HEADER: &str =
    "protocol,family,n,seed,eps_ne,eps_wsne,bits_total,bits_row_to_col,bits_col_to_row,case,wall_ms,error";

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// Fixed-column CSV rendering of sweep records (header above).
pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.protocol),
            csv_field(&r.family),
            r.n,
            r.seed,
            opt(&r.eps_ne),
            opt(&r.eps_wsne),
            opt(&r.bits_total),
            opt(&r.bits_row_to_col),
            opt(&r.bits_col_to_row),
            csv_field(r.case_label.as_deref().unwrap_or("")),
            r.wall_ms,
            csv_field(r.error.as_deref().unwrap_or("")),
        );
    }
    out
}

/// JSON rendering, mirroring the CSV columns.
pub fn records_to_json(records: &[SweepRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}

pub fn write_records(
    records: &[SweepRecord],
    path: &Path,
    format: OutputFormat,
) -> Result<(), HarnessError> {
    let body = match format {
        OutputFormat::Csv => records_to_csv(records),
        OutputFormat::Json => records_to_json(records),
    };
    std::fs::write(path, body).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_to_string(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, body: &str) -> Result<T, HarnessError> {
    serde_json::from_str(body).map_err(|source| HarnessError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a game file: JSON with fields `n`, `R` (n rows of n numbers in
/// [0, 1]), and `C`.
pub fn load_game(path: &Path) -> Result<BimatrixGame, HarnessError> {
    let body = read_to_string(path)?;
    parse_json(path, &body)
}

pub fn save_game(game: &BimatrixGame, path: &Path) -> Result<(), HarnessError> {
    let body = serde_json::to_string_pretty(game).expect("game serializes");
    std::fs::write(path, body).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Profile file: JSON object with `row` and `col` weight vectors.
#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    row: Vec<f64>,
    col: Vec<f64>,
}

pub fn load_profile(path: &Path) -> Result<StrategyProfile, HarnessError> {
    let body = read_to_string(path)?;
    let repr: ProfileRepr = parse_json(path, &body)?;
    Ok(StrategyProfile::new(
        MixedStrategy::new(repr.row)?,
        MixedStrategy::new(repr.col)?,
    ))
}

pub fn save_profile(profile: &StrategyProfile, path: &Path) -> Result<(), HarnessError> {
    let repr = ProfileRepr {
        row: profile.row.probs().to_vec(),
        col: profile.col.probs().to_vec(),
    };
    let body = serde_json::to_string_pretty(&repr).expect("profile serializes");
    std::fs::write(path, body).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Self-contained record of one run: everything needed to re-execute it and
/// check the transcript bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub protocol: String,
    pub policy: ChannelPolicy,
    pub params: ProtocolParams,
    pub seeds: [u64; 2],
    pub game: BimatrixGame,
    pub outcome: ProtocolOutcome,
}

impl RunRecord {
    pub fn from_run(
        protocol: String,
        policy: ChannelPolicy,
        params: ProtocolParams,
        seeds: [u64; 2],
        game: BimatrixGame,
        outcome: ProtocolOutcome,
    ) -> Self {
        RunRecord {
            protocol,
            policy,
            params,
            seeds,
            game,
            outcome,
        }
    }

    /// Re-executes the run and compares transcripts.
    pub fn replay(&self) -> Result<bool, HarnessError> {
        let protocol = lookup(&self.protocol)
            .ok_or_else(|| HarnessError::UnknownProtocol(self.protocol.clone()))?;
        Ok(replay(
            &self.outcome.transcript,
            &self.game,
            protocol,
            &self.policy,
            self.seeds,
            &self.params,
        ))
    }
}

pub fn load_run_record(path: &Path) -> Result<RunRecord, HarnessError> {
    let body = read_to_string(path)?;
    parse_json(path, &body)
}

pub fn save_run_record(record: &RunRecord, path: &Path) -> Result<(), HarnessError> {
    let body = serde_json::to_string_pretty(record).expect("record serializes");
    std::fs::write(path, body).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::regret_report;

    fn small_config() -> SweepConfig {
        SweepConfig {
            protocols: vec!["no-comm".into()],
            families: vec![FamilySpec::Random],
            n_values: vec![8],
            base_seed: 1,
            runs: 10,
            delta: 0.05,
            alpha: None,
            resample_cap: 100,
            out: None,
            format: None,
        }
    }

    #[test]
    fn no_comm_sweep_has_zero_bits_and_bounded_eps() {
        let records = run_sweep(&small_config()).unwrap();
        assert_eq!(records.len(), 10);
        for r in &records {
            assert_eq!(r.bits_total, Some(0));
            assert!(r.eps_ne.unwrap() <= 0.75 + 1e-9);
            assert!(r.error.is_none());
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let config = SweepConfig {
            protocols: vec!["no-comm".into(), "dmp-oneway".into(), "polylog-ne".into()],
            families: vec![FamilySpec::Random, FamilySpec::Indicator],
            n_values: vec![4, 8],
            base_seed: 42,
            runs: 3,
            delta: 0.2,
            alpha: None,
            resample_cap: 100,
            out: None,
            format: None,
        };
        let a = run_sweep(&config).unwrap();
        let b = run_sweep(&config).unwrap();
        let strip = |rs: &[SweepRecord]| {
            rs.iter()
                .map(|r| SweepRecord {
                    wall_ms: 0.0,
                    ..r.clone()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn polylog_bits_match_closed_form() {
        let config = SweepConfig {
            protocols: vec!["polylog-ne".into()],
            families: vec![FamilySpec::Random],
            n_values: vec![16],
            base_seed: 3,
            runs: 5,
            delta: 0.5,
            alpha: None,
            resample_cap: 100,
            out: None,
            format: None,
        };
        let records = run_sweep(&config).unwrap();
        for r in &records {
            let case_two = r.case_label.as_deref().unwrap().starts_with("case2");
            let expected = crate::protocols::polylog_bits(16, 0.5, case_two);
            assert_eq!(r.bits_total, Some(expected));
            assert!(r.bits_total.unwrap() <= 2 * 12 * 4 + 2 * 4 + 2);
        }
    }

    #[test]
    fn empty_protocol_list_is_config_error() {
        let mut config = small_config();
        config.protocols.clear();
        assert!(matches!(
            run_sweep(&config),
            Err(HarnessError::Config(_))
        ));
    }

    #[test]
    fn unknown_protocol_is_rejected() {
        let mut config = small_config();
        config.protocols = vec!["mystery".into()];
        assert!(matches!(
            run_sweep(&config),
            Err(HarnessError::UnknownProtocol(_))
        ));
    }

    #[test]
    fn summaries_count_violations() {
        let config = small_config();
        let mut records = run_sweep(&config).unwrap();
        let summaries = summarize(&records, &config);
        assert_eq!(summaries.len(), 1);
        assert_eq!(summaries[0].violations, 0);
        assert!(summaries[0].mean_eps_ne <= summaries[0].max_eps_ne);

        // Injected out-of-bound record counts as a violation.
        records.push(SweepRecord {
            protocol: "no-comm".into(),
            family: "random".into(),
            n: 8,
            seed: 999,
            eps_ne: Some(0.9),
            eps_wsne: Some(0.9),
            bits_total: Some(0),
            bits_row_to_col: Some(0),
            bits_col_to_row: Some(0),
            case_label: Some("no-comm".into()),
            wall_ms: 0.0,
            error: None,
        });
        let summaries = summarize(&records, &config);
        assert_eq!(summaries[0].violations, 1);
    }

    #[test]
    fn records_agree_with_regret_recomputation() {
        let config = SweepConfig {
            protocols: vec!["dmp-oneway".into()],
            families: vec![FamilySpec::Random],
            n_values: vec![6],
            base_seed: 9,
            runs: 4,
            delta: 0.05,
            alpha: None,
            resample_cap: 100,
            out: None,
            format: None,
        };
        let records = run_sweep(&config).unwrap();
        for r in &records {
            let game = FamilySpec::Random.instantiate(r.n, r.seed).unwrap().unwrap();
            let params = config.params_for(&r.protocol);
            let outcome = run_instance(&r.protocol, &game, r.seed, &params).unwrap();
            let report = regret_report(&game, &outcome.profile).unwrap();
            assert_eq!(r.eps_ne, Some(report.eps_ne));
            assert_eq!(r.eps_wsne, Some(report.eps_wsne));
        }
    }

    #[test]
    fn csv_has_fixed_columns() {
        let records = run_sweep(&small_config()).unwrap();
        let csv = records_to_csv(&records);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), records.len());
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), 12);
        }
    }

    #[test]
    fn game_file_round_trip(){
        let dir = std::env::temp_dir().join("nashcomm-harness-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("game.json");
        let game = random_game(5, 77);
        save_game(&game, &path).unwrap();
        let back = load_game(&path).unwrap();
        assert_eq!(game, back);
    }

    #[test]
    fn game_file_rejects_bad_payoffs_and_ragged_rows() {
        let dir = std::env::temp_dir().join("nashcomm-harness-test");
        std::fs::create_dir_all(&dir).unwrap();

        let path = dir.join("bad-range.json");
        std::fs::write(&path, r#"{"n":2,"R":[[1.5,0],[0,1]],"C":[[0,1],[1,0]]}"#).unwrap();
        let err = load_game(&path).unwrap_err();
        assert!(err.to_string().contains("outside [0, 1]"), "{err}");

        let path = dir.join("ragged.json");
        std::fs::write(&path, r#"{"n":2,"R":[[1.0,0],[0]],"C":[[0,1],[1,0]]}"#).unwrap();
        let err = load_game(&path).unwrap_err();
        assert!(err.to_string().contains("ragged"), "{err}");
    }

    #[test]
    fn generation_failures_become_error_records() {
        // The subset family blows past its row cap at n = 36; the sweep
        // keeps going and records the failure.
        let config = SweepConfig {
            protocols: vec!["no-comm".into()],
            families: vec![FamilySpec::Mn, FamilySpec::Random],
            n_values: vec![36],
            base_seed: 0,
            runs: 1,
            delta: 0.05,
            alpha: None,
            resample_cap: 100,
            out: None,
            format: None,
        };
        let records = run_sweep(&config).unwrap();
        assert_eq!(records.len(), 2);
        let mn = records.iter().find(|r| r.family == "mn").unwrap();
        assert!(mn.error.as_deref().unwrap().contains("cap"));
        let random = records.iter().find(|r| r.family == "random").unwrap();
        assert!(random.error.is_none());
    }

    #[test]
    fn wsne_oneway_family_only_exists_at_two() {
        assert!(FamilySpec::WsneOneway.instantiate(2, 5).unwrap().is_some());
        assert!(FamilySpec::WsneOneway.instantiate(4, 5).unwrap().is_none());
        assert!(FamilySpec::Mn.instantiate(3, 0).unwrap().is_some());
        assert!(FamilySpec::Mn.instantiate(4, 0).unwrap().is_none());
        assert!(FamilySpec::PaddedMn.instantiate(3, 0).unwrap().is_none());
        assert!(FamilySpec::PaddedMn.instantiate(8, 0).unwrap().is_some());
    }

    #[test]
    fn run_record_replays() {
        // Mixed maximin with value 0.8: the row player is flagged and its
        // transmitted sample depends on its seed.
        let game = BimatrixGame::new(
            crate::game::Matrix::from_rows(vec![vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap(),
            random_game(2, 4).col_matrix().clone(),
        )
        .unwrap();
        let params = ProtocolParams::ne_defaults();
        let protocol = lookup("polylog-ne").unwrap();
        let policy = natural_policy(protocol);
        let seeds = [11, 22];
        let outcome = run_protocol(&game, protocol, &policy, seeds, &params).unwrap();
        assert_eq!(outcome.case_label, "case2-row");
        let record = RunRecord::from_run(
            "polylog-ne".into(),
            policy,
            params,
            seeds,
            game,
            outcome,
        );
        assert!(record.replay().unwrap());

        let mut tampered = record.clone();
        tampered.seeds = [12, 22];
        assert!(!tampered.replay().unwrap());

        // Serde round trip preserves replayability.
        let json = serde_json::to_string(&record).unwrap();
        let back: RunRecord = serde_json::from_str(&json).unwrap();
        assert!(back.replay().unwrap());
    }
}
