//! Config-driven experiment runner behind the `trace-forms` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::report::to_json_string;

pub mod commands;
pub mod config;

pub use config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Kloosterman,
    Satotate,
    Bilinear,
    Energy,
    Correlate,
    Kmspi,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Kloosterman => "kloosterman",
            Command::Satotate => "satotate",
            Command::Bilinear => "bilinear",
            Command::Energy => "energy",
            Command::Correlate => "correlate",
            Command::Kmspi => "kmspi",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "trace-forms", version, about = "Trace-function experiments over F_p")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; the value is read as JSON when possible.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker thread cap.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory (overrides the `out` key).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a subcommand produced: the `results`/`residuals` halves of the JSON
/// document plus any extra files.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: Value,
    pub residuals: Value,
    pub files: Vec<(String, String)>,
}

/// Runs one subcommand and returns the JSON document and extra files
/// without touching the filesystem except for reading inputs.
pub fn execute(cmd: Command, cfg: &mut Config, base: &Path) -> Result<(String, Vec<(String, String)>)> {
    let out = match cmd {
        Command::Kloosterman => commands::kloosterman(cfg)?,
        Command::Satotate => commands::satotate(cfg)?,
        Command::Bilinear => commands::bilinear(cfg)?,
        Command::Energy => commands::energy(cfg, base)?,
        Command::Correlate => commands::correlate(cfg)?,
        Command::Kmspi => commands::kmspi(cfg)?,
    };
    let doc = json!({
        "config_echo": cfg.echo(),
        "results": out.results,
        "residuals": out.residuals,
    });
    Ok((to_json_string(doc), out.files))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidInput(format!("{}: {e}", path.display()))
}

/// Parses arguments, runs the command, writes `<out>/<command>.json` and
/// companions, and returns the path of the JSON document.
pub fn run(args: Args) -> Result<PathBuf> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be >= 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut cfg = match &args.config {
        Some(path) => Config::from_json(&std::fs::read_to_string(path).map_err(|e| io_err(path, e))?)?,
        None => Config::default(),
    };
    for kv in &args.set {
        cfg.apply_set(kv)?;
    }
    let out_dir = match &args.out {
        Some(d) => d.clone(),
        None => PathBuf::from(cfg.string("out", Some("out"))?),
    };
    // the output location is not part of the experiment
    cfg.remove("out");
    let (doc, files) = execute(args.command, &mut cfg, &out_dir)?;
    std::fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
    let main = out_dir.join(format!("{}.json", args.command.name()));
    std::fs::write(&main, doc).map_err(|e| io_err(&main, e))?;
    for (name, contents) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    }
    Ok(main)
}

/// Entry point used by the binary; returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(args) {
        Ok(path) => {
            println!("{}", path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
