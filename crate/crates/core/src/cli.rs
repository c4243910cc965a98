//! The `lqkd` command-line front end.
//!
//! Exit codes: 0 accept or success, 1 usage/config/IO error, 2 abort or
//! inconclusive eavesdropping check, 3 table discrepancy.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::adversary::{channel_distribution, EveStrategy, Interception};
use crate::analysis::{
    summarize, summary_csv, verify_table, CheckParams, Decision, Materials, SessionSummary,
    TableId, TableSpec, VerificationReport,
};
use crate::protocol::{CharliePolicy, ProtocolId, Session, SessionConfig};
use crate::qudit::format::parse_state;
use crate::qudit::{
    basis, builtin, decimal_to_binary_map, reducibility_scan_with_tolerance, BasisKind,
    DistributionTable, FactorizationResult, PureState, PRODUCT_TOLERANCE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ABORT: i32 = 2;
pub const EXIT_DISCREPANCY: i32 = 3;

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "LQKD_SEED";

#[derive(Debug, Parser)]
#[command(name = "lqkd", version, about = "Layered qudit key distribution simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a session and write records, summary, manifest and keys.
    Run(RunArgs),
    /// Print the exact outcome distribution of a state in given bases.
    Oracle(OracleArgs),
    /// Check the bd-SSSKD correlation tables against the oracle.
    VerifyTables(VerifyArgs),
    /// Scan every qubit bipartition of a binary-mapped state.
    Factorize(FactorizeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML settings file, or a manifest.json from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// p1, p2, p3, p4, c-sskd or bd-ssskd.
    #[arg(long, value_parser = parse_protocol)]
    pub protocol: Option<ProtocolId>,
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Falls back to the config file, then $LQKD_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `none` or `intercept-resend:<party,...>:<computational|conjugate|random>`.
    #[arg(long)]
    pub eve: Option<String>,
    /// Probability of the computational basis: one value or one per party.
    #[arg(long)]
    pub basis_prob: Option<String>,
    /// c-SSKD controller policy, e.g. `key=0.3,secret=0.3,conj-check=0.3,decoy=0.1`.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub check_fraction: Option<f64>,
    /// Conjugate basis on four-level subsystems: mub4 or fourier.
    #[arg(long)]
    pub conjugate4: Option<String>,
    /// Abort threshold on per-group total-variation distance.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub min_samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value = "lqkd-run")]
    pub out: PathBuf,
    /// Also write the rate table as CSV to this path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StateArg {
    /// Built-in state: eq1, eq3, eq6, eq8, bell, ghz3.
    #[arg(long, conflicts_with = "state_file", required_unless_present = "state_file")]
    pub state: Option<String>,
    /// Plain-text state literal.
    #[arg(long)]
    pub state_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub state: StateArg,
    /// One basis per subsystem: comp, conj, fourier or mub4.
    #[arg(long)]
    pub bases: String,
    /// Intercept-resend spec whose targets are subsystem indices.
    #[arg(long)]
    pub eve: Option<String>,
    /// Conjugate basis used for `conj` on four-level subsystems.
    #[arg(long, default_value = "mub4")]
    pub conjugate4: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Table id (3, 4 or 5); repeatable. Defaults to all.
    #[arg(long = "table")]
    pub tables: Vec<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[command(flatten)]
    pub state: StateArg,
    #[arg(long, default_value_t = PRODUCT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long)]
    pub json: bool,
}

fn parse_protocol(s: &str) -> Result<ProtocolId, String> {
    s.parse::<ProtocolId>().map_err(|e| {
        let names: Vec<_> = ProtocolId::ALL.iter().map(|p| p.as_str()).collect();
        format!("{e} (expected one of {})", names.join(", "))
    })
}

/// Everything that determines a run's records and summary.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSettings {
    #[serde(flatten)]
    pub session: SessionConfig,
    pub check: CheckParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub settings: RunSettings,
    pub workers: usize,
    pub input_config: Option<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub started_at_unix: u64,
    pub duration_seconds: f64,
}

/// Settings from a TOML file or a prior manifest, plus whether the file
/// set the seed explicitly.
pub fn load_settings(path: &Path) -> anyhow::Result<(RunSettings, bool)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    if is_json {
        let mut value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(settings) = value.get_mut("settings") {
            value = settings.take();
        }
        let has_seed = value.get("seed").is_some();
        let settings = serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))?;
        Ok((settings, has_seed))
    } else {
        let table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let has_seed = table.contains_key("seed");
        let settings = table
            .try_into()
            .with_context(|| format!("parsing {}", path.display()))?;
        Ok((settings, has_seed))
    }
}

fn parse_f64_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|w| w.trim().parse::<f64>().map_err(|_| anyhow!("not a number: `{w}`")))
        .collect()
}

fn parse_basis_prob(s: &str) -> anyhow::Result<[f64; 3]> {
    match *parse_f64_list(s)?.as_slice() {
        [p] => Ok([p; 3]),
        [a, b, c] => Ok([a, b, c]),
        _ => bail!("--basis-prob takes one value or three comma-separated values"),
    }
}

pub fn parse_policy(s: &str) -> anyhow::Result<CharliePolicy> {
    if !s.contains('=') {
        let v = parse_f64_list(s)?;
        let [key, secret, conjugate_check, decoy] = v[..] else {
            bail!("--policy takes four values: key,secret,conj-check,decoy");
        };
        return Ok(CharliePolicy {
            key,
            secret,
            conjugate_check,
            decoy,
        });
    }
    let mut p = CharliePolicy {
        key: 0.0,
        secret: 0.0,
        conjugate_check: 0.0,
        decoy: 0.0,
    };
    for part in s.split(',') {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("malformed policy entry `{part}`"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| anyhow!("not a number in policy entry `{part}`"))?;
        match name.trim() {
            "key" => p.key = value,
            "secret" => p.secret = value,
            "conj-check" | "conjugate-check" | "conjugate_check" => p.conjugate_check = value,
            "decoy" => p.decoy = value,
            other => bail!("unknown policy entry `{other}`"),
        }
    }
    Ok(p)
}

fn parse_conjugate4(s: &str) -> anyhow::Result<BasisKind> {
    match s.parse::<BasisKind>().map_err(|e| anyhow!(e))? {
        BasisKind::Computational => bail!("the conjugate basis cannot be computational"),
        k => Ok(k),
    }
}

/// Resolves flags over the config file over the environment.
pub fn resolve_settings(args: &RunArgs, seed_env: Option<&str>) -> anyhow::Result<RunSettings> {
    let (mut settings, file_has_seed) = match &args.config {
        Some(path) => load_settings(path)?,
        None => (RunSettings::default(), false),
    };
    let s = &mut settings.session;
    if let Some(p) = args.protocol {
        s.protocol = p;
    }
    if let Some(n) = args.rounds {
        s.rounds = n;
    }
    match (args.seed, file_has_seed, seed_env) {
        (Some(seed), _, _) => s.seed = seed,
        (None, true, _) => {}
        (None, false, Some(v)) => {
            s.seed = v
                .trim()
                .parse()
                .map_err(|_| anyhow!("{SEED_ENV}=`{v}` is not an unsigned integer"))?
        }
        (None, false, None) => {}
    }
    if let Some(e) = &args.eve {
        s.eve = e.parse::<EveStrategy>()?;
    }
    if let Some(b) = &args.basis_prob {
        s.basis_probabilities = parse_basis_prob(b)?;
    }
    if let Some(p) = &args.policy {
        s.charlie_policy = parse_policy(p)?;
    }
    if let Some(f) = args.check_fraction {
        s.check_fraction = f;
    }
    if let Some(c) = &args.conjugate4 {
        s.conjugate4 = parse_conjugate4(c)?;
    }
    if let Some(t) = args.threshold {
        settings.check.threshold = t;
    }
    if let Some(m) = args.min_samples {
        settings.check.min_samples = m;
    }
    settings.session.validate()?;
    if !(settings.check.threshold > 0.0 && settings.check.threshold <= 1.0) {
        bail!("threshold must lie in (0, 1], got {}", settings.check.threshold);
    }
    if args.workers == 0 {
        bail!("--workers must be at least 1");
    }
    Ok(settings)
}

fn symbols_text(symbols: &[u8]) -> String {
    let mut s: String = symbols.iter().map(|d| char::from(b'0' + d)).collect();
    s.push('\n');
    s
}

fn write_file(path: &Path, content: &[u8], outputs: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    outputs.push(path.to_path_buf());
    Ok(())
}

fn write_materials(dir: &Path, m: &Materials, outputs: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, k) in &m.keys {
        for (i, party) in k.parties.iter().enumerate() {
            write_file(&dir.join(format!("{name}.{party}.hex")), k.hex(i).as_bytes(), outputs)?;
            write_file(&dir.join(format!("{name}.{party}.symbols")), symbols_text(&k.strings[i]).as_bytes(), outputs)?;
        }
    }
    for (name, s) in &m.secrets {
        write_file(&dir.join(format!("{name}.hex")), s.hex().as_bytes(), outputs)?;
        write_file(&dir.join(format!("{name}.symbols")), symbols_text(&s.symbols).as_bytes(), outputs)?;
    }
    Ok(())
}

fn render_summary(s: &SessionSummary, out_dir: &Path) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "protocol {}  rounds {}  seed {}  eve {}", s.protocol, s.rounds, s.seed, s.eve);
    let v = &s.verdict;
    let _ = writeln!(
        t,
        "decision {}  (threshold {}, min samples {}, max tv {:.4})",
        v.decision,
        v.threshold,
        v.min_samples,
        v.max_tv()
    );
    for g in &v.groups {
        let flag = if g.exceeds {
            "  EXCEEDS"
        } else if !g.sufficient {
            "  short"
        } else {
            ""
        };
        let _ = writeln!(t, "  check {:<28} n={:<7} tv={:.4}{flag}", g.group, g.samples, g.tv);
    }
    for r in &s.rates {
        let _ = writeln!(
            t,
            "  {} {:<6} {:<10} {:<5} rounds={:<7} bits={:.1} rate={:.5}{}",
            r.kind,
            r.layer.as_str(),
            r.class,
            r.subpopulation.as_deref().unwrap_or("-"),
            r.rounds,
            r.bits,
            r.rate,
            r.qber.map(|q| format!(" qber={q:.4}")).unwrap_or_default()
        );
    }
    let _ = writeln!(t, "output {}", out_dir.display());
    t
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let seed_env = std::env::var(SEED_ENV).ok();
    let settings = resolve_settings(args, seed_env.as_deref())?;
    let started = Instant::now();
    let started_at_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let session = Session::new(settings.session.clone())?;
    let records = session.execute(args.workers)?;
    let summary = summarize(&settings.session, &records, &settings.check)?;
    let mut outputs = Vec::new();

    let records_path = args.out.join("records.jsonl");
    {
        let f = fs::File::create(&records_path).with_context(|| format!("writing {}", records_path.display()))?;
        let mut w = BufWriter::new(f);
        for r in &records {
            w.write_all(r.to_json().as_bytes())?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        outputs.push(records_path);
    }
    let mut summary_json = serde_json::to_string_pretty(&summary)?;
    summary_json.push('\n');
    write_file(&args.out.join("summary.json"), summary_json.as_bytes(), &mut outputs)?;
    let materials = Materials::collect(&records, settings.session.protocol)?;
    write_materials(&args.out.join("keys"), &materials, &mut outputs)?;
    if let Some(csv) = &args.csv {
        write_file(csv, summary_csv(&summary).as_bytes(), &mut outputs)?;
    }

    let manifest_path = args.out.join("manifest.json");
    outputs.push(manifest_path.clone());
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        settings,
        workers: args.workers,
        input_config: args.config.clone(),
        outputs,
        started_at_unix,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    let mut manifest_json = serde_json::to_string_pretty(&manifest)?;
    manifest_json.push('\n');
    fs::write(&manifest_path, manifest_json).with_context(|| format!("writing {}", manifest_path.display()))?;

    out.write_all(render_summary(&summary, &args.out).as_bytes())?;
    Ok(match summary.verdict.decision {
        Decision::Accept => EXIT_OK,
        Decision::Abort | Decision::Inconclusive => EXIT_ABORT,
    })
}

fn load_state(arg: &StateArg) -> anyhow::Result<(String, PureState)> {
    match (&arg.state, &arg.state_file) {
        (Some(id), _) => Ok((id.clone(), builtin::by_name(id)?)),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok((path.display().to_string(), parse_state(&text)?))
        }
        (None, None) => bail!("one of --state or --state-file is required"),
    }
}

/// Maps `comp`/`conj`/`fourier`/`mub4` per subsystem; `conj` means
/// `conjugate4` on four-level subsystems and Fourier elsewhere.
pub fn resolve_bases(spec: &str, dims: &[usize], conjugate4: BasisKind) -> anyhow::Result<Vec<BasisKind>> {
    let tags: Vec<_> = spec.split(',').map(str::trim).collect();
    if tags.len() != dims.len() {
        bail!("--bases lists {} bases for {} subsystems", tags.len(), dims.len());
    }
    tags.iter()
        .zip(dims)
        .map(|(t, &d)| match t.to_ascii_lowercase().as_str() {
            "conj" | "conjugate" | "j" | "x" => Ok(if d == 4 { conjugate4 } else { BasisKind::Fourier }),
            other => other.parse::<BasisKind>().map_err(|e| anyhow!("bad bases spec: {e}")),
        })
        .collect()
}

/// Renders `p` rounded to 12 significant digits.
pub fn sig12(p: f64) -> String {
    let rounded: f64 = format!("{p:.11e}").parse().expect("formatted float");
    rounded.to_string()
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

/// Exact distribution of a state measured in the given bases, optionally
/// behind an intercept-resend channel.
pub fn oracle_table(
    state: &PureState,
    bases: &[BasisKind],
    eve: Option<&str>,
    conjugate4: BasisKind,
) -> anyhow::Result<DistributionTable> {
    let sets = bases
        .iter()
        .zip(state.dims())
        .map(|(&k, &d)| basis(k, d))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<_> = sets.iter().collect();
    let mut attack = Interception::none();
    if let Some(spec) = eve {
        let strategy: EveStrategy = spec.parse()?;
        if strategy.is_active() {
            let subsystems = strategy
                .targets
                .iter()
                .map(|t| {
                    t.trim_start_matches('s')
                        .parse::<usize>()
                        .map_err(|_| anyhow!("oracle eve targets are subsystem indices, got `{t}`"))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            attack = Interception::new(subsystems, strategy.basis);
            attack.conjugate4 = conjugate4;
        }
    }
    Ok(channel_distribution(state, &attack, &refs)?)
}

/// Text listing: a `#` header, one `outcome probability` line per
/// supported outcome, then one `# marginal` line per subsystem.
pub fn render_listing(label: &str, t: &DistributionTable, dims: &[usize]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# state {label}  dims {}  bases {}", join(dims, ","), t.bases.join(","));
    for (o, p) in t.iter() {
        let _ = writeln!(s, "{} {}", join(o, ","), sig12(p));
    }
    for k in 0..dims.len() {
        let parts: Vec<_> = t.marginal(k).iter().map(|(v, p)| format!("{v}={}", sig12(*p))).collect();
        let _ = writeln!(s, "# marginal {k}: {}", parts.join(" "));
    }
    s
}

/// Reads back the outcome lines of [`render_listing`].
pub fn parse_listing(text: &str) -> anyhow::Result<DistributionTable> {
    let mut bases = Vec::new();
    let mut probs = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(b) = rest.split("bases ").nth(1) {
                bases = b.trim().split(',').map(str::to_string).collect();
            }
            continue;
        }
        let (o, p) = line
            .split_once(' ')
            .ok_or_else(|| anyhow!("malformed listing line `{line}`"))?;
        let outcome = o
            .split(',')
            .map(|x| x.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| anyhow!("bad outcome `{o}`"))?;
        let p: f64 = p.trim().parse().map_err(|_| anyhow!("bad probability `{p}`"))?;
        probs.insert(outcome, p);
    }
    Ok(DistributionTable::from_map(bases, probs))
}

fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (label, state) = load_state(&args.state)?;
    let conj4 = parse_conjugate4(&args.conjugate4)?;
    let bases = resolve_bases(&args.bases, state.dims(), conj4)?;
    let table = oracle_table(&state, &bases, args.eve.as_deref(), conj4)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&table)?)?;
    } else {
        out.write_all(render_listing(&label, &table, state.dims()).as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn render_report(r: &VerificationReport) -> String {
    let mut s = String::new();
    let status = if r.is_consistent() { "consistent" } else { "DISCREPANCY" };
    let _ = writeln!(s, "{} {status}: {}", r.table, r.caption);
    let _ = writeln!(s, "  bases {}", r.bases.join(","));
    let _ = writeln!(
        s,
        "  support {}  relations {}",
        if r.support_match { "match" } else { "mismatch" },
        if r.relation_match { "hold" } else { "fail" }
    );
    for rel in &r.relations {
        let _ = writeln!(s, "  claim   {}: {}", rel.name, if rel.holds { "holds" } else { "fails" });
    }
    for f in &r.findings {
        let _ = writeln!(s, "  oracle  {}: {}", f.name, if f.holds { "yes" } else { "no" });
    }
    for d in &r.discrepancies {
        let _ = writeln!(s, "  - {d}");
    }
    s
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let ids = if args.tables.is_empty() {
        TableId::ALL.to_vec()
    } else {
        args.tables
            .iter()
            .map(|t| t.parse::<TableId>())
            .collect::<Result<Vec<_>, _>>()?
    };
    let reports: Vec<_> = ids.iter().map(|&id| verify_table(&TableSpec::builtin(id))).collect();
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&reports)?)?;
    } else {
        for r in &reports {
            out.write_all(render_report(r).as_bytes())?;
        }
    }
    Ok(if reports.iter().all(VerificationReport::is_consistent) {
        EXIT_OK
    } else {
        EXIT_DISCREPANCY
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FactorizeReport {
    pub state: String,
    /// Dimensions after the decimal-to-binary map.
    pub qubits: usize,
    pub tolerance: f64,
    pub reducible: bool,
    pub min_ratio: f64,
    pub cuts: Vec<FactorizationResult>,
}

pub fn factorize_report(label: &str, state: &PureState, tolerance: f64) -> anyhow::Result<FactorizeReport> {
    let binary = decimal_to_binary_map(state)?;
    let cuts = reducibility_scan_with_tolerance(&binary, tolerance);
    Ok(FactorizeReport {
        state: label.to_string(),
        qubits: binary.num_subsystems(),
        tolerance,
        reducible: cuts.iter().any(|c| c.is_product),
        min_ratio: cuts.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min),
        cuts,
    })
}

fn cmd_factorize(args: &FactorizeArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (label, state) = load_state(&args.state)?;
    let report = factorize_report(&label, &state, args.tolerance)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "# state {label}  qubits {}  tolerance {:e}", report.qubits, report.tolerance)?;
    for c in &report.cuts {
        writeln!(
            out,
            "{{{}}} | {{{}}}  ratio {:.6e}  {}",
            join(c.bipartition.group_a(), ","),
            join(c.bipartition.group_b(), ","),
            c.ratio,
            if c.is_product { "product" } else { "entangled" }
        )?;
    }
    if report.reducible {
        writeln!(out, "verdict reducible")?;
    } else {
        writeln!(out, "verdict irreducible  min ratio {:.6e}", report.min_ratio)?;
    }
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::VerifyTables(a) => cmd_verify(a, out),
        Command::Factorize(a) => cmd_factorize(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_cli(std::iter::once("lqkd").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn sig12_rounding() {
        assert_eq!(sig12(4.0 / 7.0), "0.571428571429");
        assert_eq!(sig12(0.25), "0.25");
        assert_eq!(sig12(1.0 / 7.0), "0.142857142857");
        assert_eq!(sig12(0.0), "0");
    }

    #[test]
    fn policy_forms() {
        let p = parse_policy("key=0.4,secret=0.2,conj-check=0.3,decoy=0.1").unwrap();
        assert_eq!((p.key, p.secret, p.conjugate_check, p.decoy), (0.4, 0.2, 0.3, 0.1));
        assert_eq!(parse_policy("0.4,0.2,0.3,0.1").unwrap(), p);
        assert!(parse_policy("key=0.4,bogus=0.6").is_err());
        assert!(parse_policy("0.5,0.5").is_err());
    }

    #[test]
    fn bases_resolution() {
        let b = resolve_bases("conj,comp,conj", &[4, 4, 2], BasisKind::Mub4).unwrap();
        assert_eq!(b, [BasisKind::Mub4, BasisKind::Computational, BasisKind::Fourier]);
        assert!(resolve_bases("comp,comp", &[4, 4, 2], BasisKind::Mub4).is_err());
        assert!(resolve_bases("comp,bogus,comp", &[4, 4, 2], BasisKind::Mub4).is_err());
    }

    #[test]
    fn oracle_eq8_comp_has_four_quarter_lines() {
        let (code, out, _) = run(&["oracle", "--state", "eq8", "--bases", "comp,comp,comp"]);
        assert_eq!(code, 0);
        let lines: Vec<_> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.ends_with(" 0.25")));
    }

    #[test]
    fn oracle_listing_roundtrips() {
        let (_, out, _) = run(&["oracle", "--state", "eq6", "--bases", "conj,comp,conj"]);
        assert!(out.contains("# marginal 1:") && out.contains("3=0.571428571429"), "{out}");
        let parsed = parse_listing(&out).unwrap();
        let exact = oracle_table(
            &builtin::eq6(),
            &[BasisKind::Mub4, BasisKind::Computational, BasisKind::Mub4],
            None,
            BasisKind::Mub4,
        )
        .unwrap();
        assert_eq!(parsed.bases, exact.bases);
        assert!(parsed.tv_distance(&exact) < 1e-11);
        let (_, json, _) = run(&["oracle", "--state", "eq6", "--bases", "conj,comp,conj", "--json"]);
        assert_eq!(serde_json::from_str::<DistributionTable>(&json).unwrap(), exact);
    }

    #[test]
    fn oracle_with_eve_on_subsystem() {
        let s = builtin::bell();
        let b = [BasisKind::Fourier, BasisKind::Fourier];
        let t = oracle_table(&s, &b, Some("intercept-resend:1:computational"), BasisKind::Mub4).unwrap();
        assert_eq!(t.len(), 4);
        assert!(oracle_table(&s, &b, Some("intercept-resend:bob:computational"), BasisKind::Mub4).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(&["run", "--protocol", "p9"]).0, EXIT_USAGE);
        assert_eq!(run(&["oracle", "--state", "nope", "--bases", "comp"]).0, EXIT_USAGE);
        assert_eq!(run(&["verify-tables", "--table", "9"]).0, EXIT_USAGE);
        assert_eq!(run(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn seed_precedence() {
        let mut args = RunArgs::parse_from_run(&["--rounds", "10"]);
        assert_eq!(resolve_settings(&args, Some("17")).unwrap().session.seed, 17);
        args.seed = Some(3);
        assert_eq!(resolve_settings(&args, Some("17")).unwrap().session.seed, 3);
        args.seed = None;
        assert!(resolve_settings(&args, Some("x")).is_err());

        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, "protocol = \"p3\"\nseed = 5\n[check]\nthreshold = 0.1\n").unwrap();
        args.config = Some(cfg);
        let s = resolve_settings(&args, Some("17")).unwrap();
        assert_eq!((s.session.protocol, s.session.seed, s.session.rounds), (ProtocolId::P3, 5, 10));
        assert_eq!(s.check.threshold, 0.1);
        assert_eq!(s.check.min_samples, CheckParams::default().min_samples);
    }

    impl RunArgs {
        fn parse_from_run(args: &[&str]) -> RunArgs {
            let cli = Cli::parse_from(["lqkd", "run"].iter().chain(args));
            match cli.command {
                Command::Run(a) => a,
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn settings_toml_roundtrip() {
        let s = RunSettings::default();
        let text = toml::to_string(&s).unwrap();
        let back: RunSettings = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn factorize_verdicts() {
        let r = factorize_report("eq1", &builtin::eq1(), PRODUCT_TOLERANCE).unwrap();
        assert!(r.reducible);
        let r = factorize_report("eq8", &builtin::eq8(), PRODUCT_TOLERANCE).unwrap();
        assert!(!r.reducible && r.cuts.len() == 15 && r.min_ratio >= 1e-3);
        let (code, out, _) = run(&["factorize", "--state", "eq3"]);
        assert_eq!(code, 0);
        assert!(out.contains("verdict irreducible"));
    }
}
