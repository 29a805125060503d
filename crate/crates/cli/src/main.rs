use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use qacm_core::build::{build_str, Sheaf};
use qacm_core::descriptor::{parse_gluing, CiSpec, SheafSpec};
use qacm_core::exec::Execution;
use qacm_core::linalg::format_rational;
use qacm_core::mf::{
    cokernel_hilbert, default_q, det, example_aa1_matrix, mf_report, parse_pair_json, to_strings, verify_mf,
};
use qacm_core::quadric::gluing_variation_report;
use qacm_core::report::{records_to_csv, to_json, CohReport, Format};
use qacm_core::scan::{classify, ulrich_scan, ClassifyRecord, ScanConfig};

mod config;

use config::FileConfig;

#[derive(Parser, Debug)]
#[command(name = "qacm", version, about = "Cohomology, aCM and Ulrich checks for sheaves on two planes in P^3")]
struct Cli {
    /// TOML file with defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format: json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit the `generated_at` field from JSON reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Evaluate twists and scan rows on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Table of h^0, h^1, h^2 and chi over a window of twists.
    Cohomology {
        #[arg(long)]
        sheaf: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        tmin: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        tmax: Option<i64>,
    },
    /// Run the classification scan.
    Classify(ScanArgs),
    /// Ulrich status of every scanned kernel sheaf.
    UlrichScan(ScanArgs),
    /// Matrix-factorization tools.
    Mf {
        #[command(subcommand)]
        sub: MfCommand,
    },
    /// Cohomology tables of a kernel sheaf under several gluings.
    GluingReport {
        #[arg(long)]
        sheaf: Option<String>,
        /// Gluing such as `id`, `diag(2,3)` or `upper(1,1,v^3)`; repeatable.
        #[arg(long = "e", required = true)]
        e: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        tmin: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        tmax: Option<i64>,
    },
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    cmax: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    margin: Option<i64>,
}

#[derive(Subcommand, Debug)]
enum MfCommand {
    /// The presentation matrix of E_1 or E_2, its partner and its ranks.
    Example {
        #[arg(long)]
        component: Option<u8>,
    },
    /// Check a pair file `{"q": .., "A": .., "B": ..}`.
    Verify {
        #[arg(long)]
        file: PathBuf,
    },
    /// h^0 of the cokernel over a range of twists.
    Hilbert {
        #[arg(long)]
        component: Option<u8>,
        #[arg(long, allow_hyphen_values = true)]
        tmin: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        tmax: Option<i64>,
    },
}

/// Input errors exit with 2, failed internal cross-checks with 3.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let internal = error.chain().any(|e| e.downcast_ref::<qacm_core::Error>().is_some_and(|e| e.is_internal()));
        Failure { code: if internal { 3 } else { 2 }, error }
    }
}

impl From<qacm_core::Error> for Failure {
    fn from(e: qacm_core::Error) -> Self {
        anyhow::Error::new(e).into()
    }
}

struct Settings {
    file: FileConfig,
    format: Format,
    out: Option<PathBuf>,
    timestamp: bool,
    exec: Execution,
}

impl Settings {
    fn new(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let format = match cli.format.as_deref().or(file.format.as_deref()) {
            Some(f) => f.parse::<Format>()?,
            None => Format::Json,
        };
        let out = cli.out.clone().or_else(|| file.out.clone());
        let timestamp = !(cli.no_timestamp || file.no_timestamp.unwrap_or(false));
        let exec = if cli.sequential || file.sequential.unwrap_or(false) {
            Execution::Sequential
        } else {
            Execution::Parallel
        };
        Ok(Settings { file, format, out, timestamp, exec })
    }

    fn scan_config(&self, a: &ScanArgs) -> Result<ScanConfig> {
        let d = ScanConfig::default();
        let seed = config::env_seed()?.or(a.seed).or(self.file.seed).unwrap_or(d.seed);
        let cfg = ScanConfig {
            c_max: a.cmax.or(self.file.cmax).unwrap_or(d.c_max),
            seed,
            margin: a.margin.or(self.file.margin).unwrap_or(d.margin),
            exec: self.exec,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn sheaf(&self, flag: &Option<String>) -> Result<String> {
        flag.clone().or_else(|| self.file.sheaf.clone()).ok_or_else(|| anyhow!("--sheaf is required"))
    }

    fn window(&self, tmin: Option<i64>, tmax: Option<i64>, default: (i64, i64)) -> Result<(i64, i64)> {
        let w = (
            tmin.or(self.file.tmin).unwrap_or(default.0),
            tmax.or(self.file.tmax).unwrap_or(default.1),
        );
        if w.0 > w.1 {
            bail!("empty window: tmin = {} > tmax = {}", w.0, w.1);
        }
        Ok(w)
    }

    fn component(&self, flag: Option<u8>) -> u8 {
        flag.or(self.file.component).unwrap_or(1)
    }

    fn generated_at(&self) -> Option<u64> {
        self.timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
    }

    fn emit<T: Serialize>(&self, value: &T, csv: impl FnOnce() -> qacm_core::Result<String>) -> Result<()> {
        let text = match self.format {
            Format::Json => to_json(value, self.generated_at())?,
            Format::Csv => csv()?,
        };
        match &self.out {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => std::io::stdout().write_all(text.as_bytes()).context("writing to standard output")?,
        }
        Ok(())
    }
}

fn seed_points(spec: &SheafSpec, out: &mut Vec<[String; 3]>) {
    match spec {
        SheafSpec::Ideal { ci: CiSpec::Points(pts), .. } | SheafSpec::Ext { z: CiSpec::Points(pts), .. } => {
            out.extend(pts.iter().map(|p| p.clone().map(|r| format_rational(&r))));
        }
        SheafSpec::Kernel { f1, f2, .. } => {
            seed_points(f1, out);
            seed_points(f2, out);
        }
        _ => {}
    }
}

fn cmd_cohomology(s: &Settings, sheaf: &Option<String>, tmin: Option<i64>, tmax: Option<i64>) -> Result<(), Failure> {
    let text = s.sheaf(sheaf)?;
    let (desc, built) = build_str(&text)?;
    let window = s.window(tmin, tmax, (-6, 6))?;
    let (table, mut flags) = match &built {
        Sheaf::Kernel(k) => {
            let rows = k.kernel_rows(window, s.exec)?;
            let agree = rows.iter().all(|r| r.h1_fast == r.h1_full);
            let table = qacm_core::plane::CohTable { rows: rows.into_iter().map(|r| r.row).collect() };
            let mut f = serde_json::Map::new();
            f.insert("kind".into(), json!("kernel"));
            f.insert("c".into(), json!(k.c()));
            f.insert("h1_fast_equals_full".into(), json!(agree));
            (table, f)
        }
        Sheaf::Plane { side, sheaf } => {
            let mut f = serde_json::Map::new();
            f.insert("kind".into(), json!("plane"));
            f.insert("plane".into(), json!(side.to_string()));
            f.insert("rank".into(), json!(sheaf.rank()));
            (built.coh_table(window, s.exec)?, f)
        }
        Sheaf::RankOne(_) => {
            let mut f = serde_json::Map::new();
            f.insert("kind".into(), json!("rank1"));
            (built.coh_table(window, s.exec)?, f)
        }
    };
    flags.insert("h1_vanishes_in_window".into(), json!(table.rows.iter().all(|r| r.h1 == 0)));
    let mut report = CohReport::new(desc.to_string(), window, &table);
    report.flags = flags.into_iter().collect();
    seed_points(&desc.sheaf, &mut report.seedpoints);
    s.emit(&report, || report.to_csv())?;
    Ok(())
}

fn cmd_gluing(
    s: &Settings,
    sheaf: &Option<String>,
    e: &[String],
    tmin: Option<i64>,
    tmax: Option<i64>,
) -> Result<(), Failure> {
    let text = s.sheaf(sheaf)?;
    let (desc, built) = build_str(&text)?;
    let Sheaf::Kernel(k) = built else {
        return Err(anyhow!("gluing-report needs a kernel sheaf K(...)").into());
    };
    let gluings = e
        .iter()
        .map(|g| parse_gluing(g).map(|g| qacm_core::build::gluing_from_spec(&g)).map_err(qacm_core::Error::from))
        .collect::<qacm_core::Result<Vec<_>>>()?;
    let window = s.window(tmin, tmax, k.acm_window(8))?;
    let variants = gluing_variation_report(&k, &gluings, window, s.exec)?;
    #[derive(Serialize)]
    struct Record {
        gluing: String,
        asserted: bool,
        equal_to_identity: bool,
        t: i64,
        h0: usize,
        h1: usize,
        h2: usize,
        chi: i64,
    }
    let records: Vec<Record> = variants
        .iter()
        .flat_map(|v| {
            v.table.rows.iter().map(|r| Record {
                gluing: v.gluing.clone(),
                asserted: v.asserted,
                equal_to_identity: v.equal_to_identity,
                t: r.t,
                h0: r.h0,
                h1: r.h1,
                h2: r.h2,
                chi: r.chi,
            })
        })
        .collect();
    let value = json!({ "descriptor": desc.to_string(), "window": [window.0, window.1], "variants": variants });
    s.emit(&value, || records_to_csv(&records))?;
    Ok(())
}

fn cmd_mf(s: &Settings, sub: &MfCommand) -> Result<(), Failure> {
    let q = default_q();
    match sub {
        MfCommand::Example { component } => {
            let n = example_aa1_matrix(s.component(*component))?;
            let r = mf_report(&n, &q, (-1, 1))?;
            #[derive(Serialize)]
            struct Record<'a> {
                locus: &'a str,
                x: &'a str,
                y: &'a str,
                z: &'a str,
                w: &'a str,
                rank: usize,
            }
            let records: Vec<Record> = r
                .ranks_at_samples
                .iter()
                .map(|p| Record {
                    locus: p.point.locus,
                    x: &p.point.coords[0],
                    y: &p.point.coords[1],
                    z: &p.point.coords[2],
                    w: &p.point.coords[3],
                    rank: p.rank,
                })
                .collect();
            s.emit(&r, || records_to_csv(&records))?;
        }
        MfCommand::Verify { file } => {
            let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let pair = parse_pair_json(&text)?;
            let verified = verify_mf(&pair);
            let value = json!({
                "q": pair.q.to_string(),
                "n": pair.a.len(),
                "A": to_strings(&pair.a),
                "B": to_strings(&pair.b),
                "det_A": det(&pair.a)?.to_string(),
                "verified": verified,
            });
            #[derive(Serialize)]
            struct Record {
                n: usize,
                verified: bool,
            }
            s.emit(&value, || records_to_csv(&[Record { n: pair.a.len(), verified }]))?;
        }
        MfCommand::Hilbert { component, tmin, tmax } => {
            let c = s.component(*component);
            let n = example_aa1_matrix(c)?;
            let window = s.window(*tmin, *tmax, (-1, 4))?;
            #[derive(Serialize)]
            struct Record {
                t: i64,
                h0: usize,
            }
            let records = (window.0..=window.1)
                .map(|t| Ok(Record { t, h0: cokernel_hilbert(&n, t)? }))
                .collect::<qacm_core::Result<Vec<_>>>()?;
            let value = json!({ "component": c, "window": [window.0, window.1], "rows": records });
            s.emit(&value, || records_to_csv(&records))?;
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let s = Settings::new(cli)?;
    match &cli.command {
        Command::Cohomology { sheaf, tmin, tmax } => cmd_cohomology(&s, sheaf, *tmin, *tmax),
        Command::Classify(a) => {
            let report = classify(&s.scan_config(a)?)?;
            let records: Vec<ClassifyRecord> = report.rows.iter().map(ClassifyRecord::from).collect();
            s.emit(&report, || records_to_csv(&records))?;
            Ok(())
        }
        Command::UlrichScan(a) => {
            let report = ulrich_scan(&s.scan_config(a)?)?;
            s.emit(&report, || records_to_csv(&report.rows))?;
            Ok(())
        }
        Command::Mf { sub } => cmd_mf(&s, sub),
        Command::GluingReport { sheaf, e, tmin, tmax } => cmd_gluing(&s, sheaf, e, *tmin, *tmax),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let f: Failure = qacm_core::Error::Inconsistency("h^1 paths differ".into()).into();
        assert_eq!(f.code, 3);
        let f: Failure = qacm_core::Error::Input("bad".into()).into();
        assert_eq!(f.code, 2);
        let f: Failure = anyhow!("io").into();
        assert_eq!(f.code, 2);
        let wrapped: Failure = anyhow::Error::new(qacm_core::Error::Inconsistency("x".into())).context("scan").into();
        assert_eq!(wrapped.code, 3);
    }
}
