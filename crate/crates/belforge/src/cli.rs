//! Command-line entry point.
//!
//! Every subcommand takes `--config FILE`, `--quiet` and any number of
//! `--dotted.key VALUE` overrides applied on top of the config file.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::pipeline::{self, LinkInput};

#[derive(Parser)]
#[command(name = "belforge", version, about = "Biomedical entity linking pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter concept sources into the ontology
    OntologyBuild(CommonArgs),
    /// Compile the hyperlink corpus from a wiki dump
    CorpusCompile(CommonArgs),
    /// Split the corpus into the star train and validation subsets
    CorpusSubset(CommonArgs),
    /// Write pretraining and fine-tuning pairs
    Pairs(CommonArgs),
    /// Pretrain the encoder on ontology synonym pairs (--epochs N)
    Train(CommonArgs),
    /// Fine-tune the encoder on corpus pairs (--epochs N)
    Finetune(CommonArgs),
    /// Embed the ontology and build the PCA transform and index
    IndexBuild(CommonArgs),
    /// Link one mention (--mention TEXT) or a file (--input F --output F)
    Link(CommonArgs),
    /// Score linking on a gold corpus
    Evaluate(CommonArgs),
    /// Print ontology and corpus statistics
    Stats(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Pipeline configuration (JSON)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Only log warnings and errors
    #[arg(long)]
    quiet: bool,
    /// Configuration overrides as `--key value`, e.g. `--train.epochs 2`
    #[arg(value_name = "--KEY VALUE", trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
    rest: Vec<String>,
}

/// Flags of one invocation after the trailing arguments are sorted out.
#[derive(Debug, Default, PartialEq)]
struct Invocation {
    config: Option<PathBuf>,
    quiet: bool,
    overrides: Vec<(String, String)>,
    mention: Option<String>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
}

fn parse_rest(cmd: &str, args: CommonArgs) -> Result<Invocation> {
    let mut inv = Invocation { config: args.config, quiet: args.quiet, ..Default::default() };
    let mut it = args.rest.into_iter();
    while let Some(tok) = it.next() {
        let Some(flag) = tok.strip_prefix("--") else {
            return Err(Error::usage(format!("unexpected argument `{tok}`")));
        };
        if flag == "quiet" {
            inv.quiet = true;
            continue;
        }
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| Error::usage(format!("`--{flag}` needs a value")))?;
                (flag.to_string(), v)
            }
        };
        match (key.as_str(), cmd) {
            ("config", _) => inv.config = Some(value.into()),
            ("epochs", "train") => inv.overrides.push(("train.epochs".into(), value)),
            ("epochs", "finetune") => inv.overrides.push(("finetune.epochs".into(), value)),
            ("mention", "link") => inv.mention = Some(value),
            ("input", "link") => inv.input = Some(value.into()),
            ("output", "link") => inv.output = Some(value.into()),
            _ => inv.overrides.push((key, value)),
        }
    }
    Ok(inv)
}

fn init_logging(quiet: bool) {
    let level = if quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    log::set_max_level(level);
}

fn dispatch(cmd: &str, inv: Invocation) -> Result<Value> {
    let path = inv.config.ok_or_else(|| Error::usage("--config is required"))?;
    if !path.exists() {
        return Err(Error::io(&path, std::io::Error::new(std::io::ErrorKind::NotFound, "config file not found")));
    }
    let cfg = PipelineConfig::load(&path, &inv.overrides)?;
    match cmd {
        "ontology-build" => pipeline::ontology_build(&cfg),
        "corpus-compile" => pipeline::corpus_compile(&cfg),
        "corpus-subset" => pipeline::corpus_subset(&cfg),
        "pairs" => pipeline::pairs(&cfg),
        "train" => pipeline::train(&cfg, false),
        "finetune" => pipeline::train(&cfg, true),
        "index-build" => pipeline::index_build(&cfg),
        "link" => {
            if let Some(m) = &inv.mention {
                return pipeline::link(&cfg, LinkInput::Mention(m));
            }
            let input = inv.input.or_else(|| cfg.paths.link_input.clone());
            let output = inv.output.or_else(|| cfg.paths.link_output.clone());
            match (input, output) {
                (Some(input), Some(output)) => pipeline::link(&cfg, LinkInput::File { input: &input, output: &output }),
                _ => Err(Error::usage("link needs --mention, or an input and an output file")),
            }
        }
        "evaluate" => pipeline::evaluate(&cfg),
        "stats" => pipeline::stats(&cfg),
        _ => unreachable!("clap only accepts known subcommands"),
    }
}

/// Runs the command line and returns the process exit code: 0 success,
/// 1 usage or configuration error, 2 malformed input data, 3 I/O or network.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (name, args) = match cli.command {
        Command::OntologyBuild(a) => ("ontology-build", a),
        Command::CorpusCompile(a) => ("corpus-compile", a),
        Command::CorpusSubset(a) => ("corpus-subset", a),
        Command::Pairs(a) => ("pairs", a),
        Command::Train(a) => ("train", a),
        Command::Finetune(a) => ("finetune", a),
        Command::IndexBuild(a) => ("index-build", a),
        Command::Link(a) => ("link", a),
        Command::Evaluate(a) => ("evaluate", a),
        Command::Stats(a) => ("stats", a),
    };
    let result = parse_rest(name, args).and_then(|inv| {
        init_logging(inv.quiet);
        dispatch(name, inv)
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(rest: &[&str]) -> CommonArgs {
        CommonArgs { config: None, quiet: false, rest: rest.iter().map(|s| s.to_string()).collect() }
    }

    #[test]
    fn trailing_flags_are_sorted() {
        let inv = parse_rest("train", args(&["--epochs", "0", "--config", "c.json", "--index.top_k=3", "--quiet"])).unwrap();
        assert_eq!(inv.config, Some(PathBuf::from("c.json")));
        assert!(inv.quiet);
        assert_eq!(
            inv.overrides,
            vec![("train.epochs".to_string(), "0".to_string()), ("index.top_k".to_string(), "3".to_string())]
        );
    }

    #[test]
    fn link_flags() {
        let inv = parse_rest("link", args(&["--mention", "hartinfarct"])).unwrap();
        assert_eq!(inv.mention.as_deref(), Some("hartinfarct"));
        assert!(inv.overrides.is_empty());
    }

    #[test]
    fn dangling_flag_is_a_usage_error() {
        assert!(matches!(parse_rest("stats", args(&["--seed"])), Err(Error::Usage(_))));
        assert!(matches!(parse_rest("stats", args(&["seed"])), Err(Error::Usage(_))));
    }

    #[test]
    fn clap_accepts_trailing_overrides() {
        let cli = Cli::try_parse_from(["belforge", "train", "--config", "c.json", "--epochs", "2"]).unwrap();
        let Command::Train(a) = cli.command else { panic!("wrong subcommand") };
        assert_eq!(a.config, Some(PathBuf::from("c.json")));
        assert_eq!(a.rest, vec!["--epochs", "2"]);
    }
}
