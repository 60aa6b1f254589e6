//! `dynmds`: verify, derive, classify, price, and demo dynamic MDS matrices.
//!
//! Matrix files use the library text format: a field header line such as
//! `gf(2^8, 0x11B)` followed by one row of space-separated hex bytes per
//! line. Every subcommand honors the global `--json` flag. Exit codes:
//! 0 success (for `verify`, the matrix is MDS), 1 failure or error,
//! 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dynmds::{
    classify, derive_constant, derive_demo_key, derive_session_matrix_with_tables,
    estimate_generation, find_optimal_instance, fixtures, is_mds, metrics, normalize_by_pivot,
    rank_classes, render_rank_table, scale_mds, CostParams, FieldSpec, Matrix, MatrixMode,
    Session, Spn, SpnParams, BLOCK_BYTES,
};

#[derive(Parser)]
#[command(
    name = "dynmds",
    version,
    about = "Dynamic MDS matrix toolkit: per-session diffusion layers for SPN ciphers",
    propagate_version = true
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every square submatrix for nonsingularity; exit 0 iff MDS.
    Verify {
        /// Matrix file.
        matrix: PathBuf,
    },
    /// Scale a verified MDS seed by a nonzero constant (text output is a
    /// matrix file).
    Derive {
        /// Seed matrix file.
        seed: PathBuf,
        #[command(flatten)]
        constant: ConstantSource,
    },
    /// Divide a matrix by one of its own entries, mapping that entry to 1.
    Normalize {
        /// Matrix file.
        matrix: PathBuf,
        /// Entry value to normalize by, hex (0x1C) or decimal.
        #[arg(long, value_parser = parse_element)]
        pivot: u8,
    },
    /// Name the structure class of an MDS matrix.
    Classify {
        /// Matrix file.
        matrix: PathBuf,
    },
    /// Report free entries, distinct constants, and bi-regularity.
    Metrics {
        /// Matrix file.
        matrix: PathBuf,
    },
    /// Price one generation pass of constant * matrix under the cost model.
    Cost {
        /// Matrix file.
        matrix: PathBuf,
        /// Scaling constant, hex or decimal.
        #[arg(long, default_value = "0x02", value_parser = parse_element)]
        constant: u8,
        #[command(flatten)]
        params: CostArgs,
    },
    /// Rank one matrix per structure class by generation cost.
    Rank {
        /// Matrix files to rank (defaults to the built-in class fixtures).
        #[arg(long, num_args = 1..)]
        fixtures: Vec<PathBuf>,
        /// Scaling constant, hex or decimal.
        #[arg(long, default_value = "0x02", value_parser = parse_element)]
        constant: u8,
        #[command(flatten)]
        params: CostArgs,
    },
    /// Find the two-constant MDS instance with the most free entries.
    FindOptimal {
        /// Field spec, e.g. "gf(2^8, 0x11B)".
        #[arg(long, default_value = "gf(2^8, 0x11B)")]
        field: String,
    },
    /// Encrypt one 16-byte block with the demo cipher (NOT for production).
    DemoEncrypt {
        #[command(flatten)]
        session: SessionArgs,
        /// Plaintext block: 32 hex characters.
        block: String,
    },
    /// Decrypt one 16-byte block with the demo cipher.
    DemoDecrypt {
        #[command(flatten)]
        session: SessionArgs,
        /// Ciphertext block: 32 hex characters.
        block: String,
    },
    /// Measure per-round avalanche of the demo cipher.
    Avalanche {
        #[command(flatten)]
        session: SessionArgs,
        /// Number of random single-bit-flip trials.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Seed for the trial generator.
        #[arg(long, default_value_t = 1)]
        rng_seed: u64,
        /// Also measure an identity-mixing control cipher.
        #[arg(long)]
        control: bool,
    },
    /// Run the built-in check battery.
    Selftest,
}

/// Scaling constant given directly or derived from a shared secret.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConstantSource {
    /// Nonzero field element, hex (0x1C) or decimal.
    #[arg(long, value_parser = parse_element)]
    constant: Option<u8>,
    /// Derive the constant from this secret (UTF-8 string).
    #[arg(long)]
    secret: Option<String>,
    /// Derive the constant from this secret (hex bytes).
    #[arg(long)]
    secret_hex: Option<String>,
}

impl ConstantSource {
    fn element(&self) -> Result<u8> {
        if let Some(e) = self.constant {
            return Ok(e);
        }
        let secret = match (&self.secret, &self.secret_hex) {
            (Some(s), None) => s.as_bytes().to_vec(),
            (None, Some(h)) => hex::decode(h).context("invalid --secret-hex")?,
            _ => bail!("give exactly one of --constant, --secret, --secret-hex"),
        };
        Ok(derive_constant(&secret)?)
    }
}

/// Cipher session description. Flags override values from `--session` file;
/// the file holds `key = value` lines with keys `secret-hex`,
/// `seed-matrix-file` (relative paths resolve against the file's
/// directory), `rounds`, `mode`, and `key-hex`.
#[derive(Args)]
struct SessionArgs {
    /// Session descriptor file.
    #[arg(long)]
    session: Option<PathBuf>,
    /// Shared secret as a UTF-8 string.
    #[arg(long)]
    secret: Option<String>,
    /// Shared secret as hex bytes.
    #[arg(long)]
    secret_hex: Option<String>,
    /// Seed matrix file (default: the built-in circulant fixture).
    #[arg(long)]
    seed_file: Option<PathBuf>,
    /// Round count (default 8, minimum 4).
    #[arg(long)]
    rounds: Option<usize>,
    /// Matrix schedule: "session" or "round".
    #[arg(long, value_parser = MatrixMode::from_str)]
    mode: Option<MatrixMode>,
    /// 16-byte cipher key as 32 hex characters (default: derived from the
    /// secret; demo only).
    #[arg(long)]
    key: Option<String>,
}

#[derive(Default)]
struct Descriptor {
    secret: Option<Vec<u8>>,
    seed_file: Option<PathBuf>,
    rounds: Option<usize>,
    mode: Option<MatrixMode>,
    key: Option<[u8; BLOCK_BYTES]>,
}

fn parse_descriptor(path: &Path) -> Result<Descriptor> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read session file {}", path.display()))?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut d = Descriptor::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "secret-hex" => d.secret = Some(hex::decode(value).context("secret-hex")?),
            "seed-matrix-file" => d.seed_file = Some(dir.join(value)),
            "rounds" => d.rounds = Some(value.parse().context("rounds")?),
            "mode" => d.mode = Some(value.parse().map_err(|e: String| anyhow!(e))?),
            "key-hex" => d.key = Some(parse_key(value)?),
            other => bail!("line {}: unknown key {other:?}", lineno + 1),
        }
    }
    Ok(d)
}

fn parse_key(hex_key: &str) -> Result<[u8; BLOCK_BYTES]> {
    let bytes = hex::decode(hex_key).context("key must be hex")?;
    let len = bytes.len();
    bytes
        .try_into()
        .map_err(|_| anyhow!("key must be {BLOCK_BYTES} bytes (32 hex characters), got {len}"))
}

impl SessionArgs {
    fn resolve(&self) -> Result<(SpnParams, Session)> {
        let file = match &self.session {
            Some(path) => parse_descriptor(path)?,
            None => Descriptor::default(),
        };
        let secret = match (&self.secret, &self.secret_hex) {
            (Some(_), Some(_)) => bail!("give at most one of --secret and --secret-hex"),
            (Some(s), None) => s.as_bytes().to_vec(),
            (None, Some(h)) => hex::decode(h).context("invalid --secret-hex")?,
            (None, None) => file
                .secret
                .ok_or_else(|| anyhow!("no secret: pass --secret/--secret-hex or a session file with secret-hex"))?,
        };
        let seed = match self.seed_file.as_ref().or(file.seed_file.as_ref()) {
            Some(path) => load_matrix(path)?,
            None => fixtures::aes_circulant(),
        };
        let rounds = self.rounds.or(file.rounds).unwrap_or(8);
        let mode = self.mode.or(file.mode).unwrap_or(MatrixMode::Session);
        let key = match (&self.key, file.key) {
            (Some(k), _) => parse_key(k)?,
            (None, Some(k)) => k,
            (None, None) => derive_demo_key(&secret)?,
        };
        let session = Session::new(&seed, &secret)?;
        let params = SpnParams::new(key, rounds, mode)?;
        Ok((params, session))
    }
}

/// Cost model knobs.
#[derive(Args)]
struct CostArgs {
    /// Cycle price of one full multiplication.
    #[arg(long, default_value_t = CostParams::default().cost_mul)]
    cost_mul: u64,
    /// Cycle price of one table lookup.
    #[arg(long, default_value_t = CostParams::default().cost_lookup)]
    cost_lookup: u64,
    /// Cycle price of a multiplication by one.
    #[arg(long, default_value_t = CostParams::default().cost_free)]
    cost_free: u64,
    /// Bytes per table entry.
    #[arg(long, default_value_t = CostParams::default().bytes_per_table_entry)]
    bytes_per_entry: u64,
    /// Fixed utility tables charged to every pass.
    #[arg(long, default_value_t = CostParams::default().fixed_overhead_tables)]
    overhead_tables: u64,
}

impl CostArgs {
    fn to_params(&self) -> CostParams {
        CostParams {
            cost_mul: self.cost_mul,
            cost_lookup: self.cost_lookup,
            cost_free: self.cost_free,
            bytes_per_table_entry: self.bytes_per_entry,
            fixed_overhead_tables: self.overhead_tables,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let json = cli.json;
    match cli.command {
        Command::Verify { matrix } => {
            let m = load_matrix(&matrix)?;
            let report = is_mds(&m)?;
            print_value(json, &report.to_json(), &report.to_text());
            Ok(if report.is_mds { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Derive { seed, constant } => {
            let m = load_matrix(&seed)?;
            let e = constant.element()?;
            let (derived, tables) = derive_session_matrix_with_tables(&m, e)?;
            if json {
                let mut v = matrix_json(&derived);
                v["constant"] = json!(format!("{e:#04x}"));
                v["tables"] = json!(tables.constants().count());
                println!("{v}");
            } else {
                print!("{derived}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Normalize { matrix, pivot } => {
            let m = load_matrix(&matrix)?;
            let normalized = normalize_by_pivot(&m, pivot)?;
            if json {
                let mut v = matrix_json(&normalized);
                v["pivot"] = json!(format!("{pivot:#04x}"));
                println!("{v}");
            } else {
                print!("{normalized}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { matrix } => {
            let m = load_matrix(&matrix)?;
            let class = classify(&m)?;
            if json {
                println!("{}", json!({ "class": class.name() }));
            } else {
                println!("{class}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Metrics { matrix } => {
            let m = load_matrix(&matrix)?;
            let stats = metrics(&m);
            let class = classify(&m).ok();
            if json {
                let mut v = stats.to_json();
                v["class"] = class.map_or(Value::Null, |c| json!(c.name()));
                println!("{v}");
            } else {
                print!("{}", stats.to_text());
                match class {
                    Some(c) => println!("class: {c}"),
                    None => println!("class: (not MDS)"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Cost { matrix, constant, params } => {
            let m = load_matrix(&matrix)?;
            let report = estimate_generation(&m, constant, &params.to_params())?;
            print_value(json, &report.to_json(), &report.to_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Rank { fixtures: files, constant, params } => {
            let matrices: Vec<Matrix> = if files.is_empty() {
                fixtures::class_fixtures().into_iter().map(|(_, m)| m).collect()
            } else {
                files.iter().map(|p| load_matrix(p)).collect::<Result<_>>()?
            };
            let ranked = rank_classes(&matrices, constant, &params.to_params())?;
            if json {
                let rows: Vec<Value> = ranked.iter().map(|(_, r)| r.to_json()).collect();
                println!("{}", json!(rows));
            } else {
                print!("{}", render_rank_table(&ranked));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::FindOptimal { field } => {
            let spec: FieldSpec = field.parse()?;
            let instance = find_optimal_instance(spec)?;
            if json {
                let mut v = matrix_json(&instance.matrix);
                v["a"] = json!(format!("{:#04x}", instance.a));
                v["b"] = json!(format!("{:#04x}", instance.b));
                println!("{v}");
            } else {
                println!("a = {:#04x}", instance.a);
                println!("b = {:#04x}", instance.b);
                print!("{}", instance.matrix);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::DemoEncrypt { session, block } => {
            let (params, sess) = session.resolve()?;
            let spn = Spn::new(&params, &sess)?;
            let pt = parse_block(&block)?;
            let ct = spn.encrypt_block(&pt);
            if json {
                println!("{}", json!({ "ciphertext": hex::encode(ct) }));
            } else {
                println!("{}", hex::encode(ct));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::DemoDecrypt { session, block } => {
            let (params, sess) = session.resolve()?;
            let spn = Spn::new(&params, &sess)?;
            let ct = parse_block(&block)?;
            let pt = spn.decrypt_block(&ct);
            if json {
                println!("{}", json!({ "plaintext": hex::encode(pt) }));
            } else {
                println!("{}", hex::encode(pt));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Avalanche { session, trials, rng_seed, control } => {
            let (params, sess) = session.resolve()?;
            let spn = Spn::new(&params, &sess)?;
            let report = spn.avalanche_stats(trials, rng_seed);
            let control_report = if control {
                let identity = Matrix::identity(sess.matrix().spec(), sess.matrix().rows())?;
                Some(Spn::with_mix_matrix(&params, &identity)?.avalanche_stats(trials, rng_seed))
            } else {
                None
            };
            if json {
                let mut v = report.to_json();
                if let Some(c) = &control_report {
                    v["control_per_round"] = json!(c.per_round);
                    v["control_mean"] = json!(c.mean());
                }
                println!("{v}");
            } else {
                print!("{}", report.to_text());
                if let Some(c) = &control_report {
                    print!("identity control:\n{}", c.to_text());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => selftest(json),
    }
}

type Check = Box<dyn Fn() -> Result<()>>;

fn selftest(json: bool) -> Result<ExitCode> {
    let checks: Vec<(&str, Check)> = vec![
        ("field axioms over gf(2^2)", Box::new(selftest_field_axioms)),
        ("inverse matches Fermat power over gf(2^8)", Box::new(selftest_inverse)),
        ("builtin circulant fixture is MDS", Box::new(selftest_fixture_mds)),
        ("scaling preserves the MDS property", Box::new(selftest_scaling)),
        ("builtin fixtures classify canonically", Box::new(selftest_classes)),
        ("cost model ranks the classes", Box::new(selftest_rank)),
        ("demo cipher round-trips", Box::new(selftest_spn)),
        ("avalanche reaches one half", Box::new(selftest_avalanche)),
    ];
    let mut results = Vec::new();
    let mut all_ok = true;
    for (name, check) in &checks {
        let outcome = check();
        let ok = outcome.is_ok();
        all_ok &= ok;
        if !json {
            match &outcome {
                Ok(()) => println!("selftest: {name}: ok"),
                Err(e) => println!("selftest: {name}: FAILED ({e:#})"),
            }
        }
        results.push(json!({
            "name": name,
            "ok": ok,
            "detail": outcome.err().map(|e| format!("{e:#}")),
        }));
    }
    if json {
        println!("{}", json!({ "ok": all_ok, "checks": results }));
    } else if all_ok {
        println!("selftest: all checks passed");
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn selftest_field_axioms() -> Result<()> {
    let f = FieldSpec::new(2, 0x7)?;
    for a in f.elements() {
        for b in f.elements() {
            if f.mul(a, b) != f.mul(b, a) {
                bail!("multiplication is not commutative at ({a}, {b})");
            }
            for c in f.elements() {
                if f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)) {
                    bail!("distributivity fails at ({a}, {b}, {c})");
                }
            }
        }
    }
    let aes = FieldSpec::aes();
    if aes.mul(0x57, 0x83) != 0xC1 {
        bail!("known product 0x57 * 0x83 != 0xC1");
    }
    Ok(())
}

fn selftest_inverse() -> Result<()> {
    let f = FieldSpec::aes();
    for x in f.nonzero_elements() {
        let inv = f.inv(x)?;
        if f.mul(x, inv) != 1 || inv != f.pow(x, 254) {
            bail!("inverse mismatch at {x:#04x}");
        }
    }
    Ok(())
}

fn selftest_fixture_mds() -> Result<()> {
    let report = is_mds(&fixtures::aes_circulant())?;
    if !report.is_mds || report.minors_checked != 69 {
        bail!("builtin circulant fixture failed verification");
    }
    Ok(())
}

fn selftest_scaling() -> Result<()> {
    let seed = fixtures::aes_circulant();
    for e in [0x02u8, 0x1C, 0xFF] {
        let scaled = scale_mds(&seed, e)?;
        if !is_mds(&scaled)?.is_mds {
            bail!("scaling by {e:#04x} lost the MDS property");
        }
    }
    Ok(())
}

fn selftest_classes() -> Result<()> {
    for (expected, matrix) in fixtures::class_fixtures() {
        let got = classify(&matrix)?;
        if got != expected {
            bail!("fixture for {expected} classified as {got}");
        }
    }
    Ok(())
}

fn selftest_rank() -> Result<()> {
    let matrices: Vec<Matrix> = fixtures::class_fixtures().into_iter().map(|(_, m)| m).collect();
    let ranked = rank_classes(&matrices, 0x02, &CostParams::default())?;
    let cycles: Vec<u64> = ranked.iter().map(|(_, r)| r.cycle_proxy).collect();
    if cycles.windows(2).any(|w| w[0] > w[1]) {
        bail!("ranking is not ascending: {cycles:?}");
    }
    if ranked.first().map(|(c, _)| *c) != Some(dynmds::MatrixClass::Optimal) {
        bail!("optimal class is not ranked first");
    }
    Ok(())
}

fn selftest_spn() -> Result<()> {
    let session = Session::new(&fixtures::aes_circulant(), b"selftest secret")?;
    let params = SpnParams::new(*b"selftest demokey", 8, MatrixMode::Session)?;
    let spn = Spn::new(&params, &session)?;
    let mut pt = [0u8; BLOCK_BYTES];
    for trial in 0..100u8 {
        pt[0] = trial;
        if spn.decrypt_block(&spn.encrypt_block(&pt)) != pt {
            bail!("round trip failed at trial {trial}");
        }
    }
    Ok(())
}

fn selftest_avalanche() -> Result<()> {
    let session = Session::new(&fixtures::aes_circulant(), b"selftest secret")?;
    let params = SpnParams::new(*b"selftest demokey", 8, MatrixMode::Session)?;
    let mean = Spn::new(&params, &session)?.avalanche_stats(500, 7).mean();
    if !(0.40..=0.60).contains(&mean) {
        bail!("mean avalanche {mean:.4} outside [0.40, 0.60]");
    }
    Ok(())
}

fn load_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read matrix file {}", path.display()))?;
    let m: Matrix = text
        .parse()
        .with_context(|| format!("cannot parse matrix file {}", path.display()))?;
    Ok(m)
}

fn parse_block(hex_block: &str) -> Result<[u8; BLOCK_BYTES]> {
    let bytes = hex::decode(hex_block.trim()).context("block must be hex")?;
    let len = bytes.len();
    bytes
        .try_into()
        .map_err(|_| anyhow!("block must be {BLOCK_BYTES} bytes (32 hex characters), got {len}"))
}

fn parse_element(s: &str) -> Result<u8, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex_part) => u8::from_str_radix(hex_part, 16),
        None => t.parse::<u8>(),
    };
    parsed.map_err(|e| format!("invalid field element {s:?}: {e}"))
}

fn matrix_json(m: &Matrix) -> Value {
    let rows: Vec<String> = (0..m.rows())
        .map(|r| {
            m.row(r).iter().map(|v| format!("{v:02x}")).collect::<Vec<_>>().join(" ")
        })
        .collect();
    json!({ "field": m.spec().to_string(), "rows": rows })
}

fn print_value(json: bool, value: &Value, text: &str) {
    if json {
        println!("{value}");
    } else {
        print!("{text}");
    }
}
