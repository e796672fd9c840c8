use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use codemapper::demo;
use codemapper::graph::to_cmap_json;
use codemapper::minilang::{self, DEFAULT_STEP_LIMIT};
use codemapper::pdg::DEFAULT_ROUNDS;
use codemapper::store::{load_store, save_store, Concept, ConceptId, Store};

use crate::engine::{self, DEFAULT_PROVIDER};
use crate::error::ApiError;
use crate::server::{serve, AppState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "codemapper", version, about = "Compose programs from a database of code concepts")]
pub struct Cli {
    /// Store file to read and update.
    #[arg(long, global = true, default_value = "codemapper.cmdb.json")]
    pub store: PathBuf,
    /// Output style.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a store file.
    Init {
        /// Fill it with the example sorting and counting hierarchy, write the
        /// example snippets to `snippets/` and the sorting pipeline graph
        /// next to the store.
        #[arg(long)]
        demo: bool,
        /// Replace an existing store file.
        #[arg(long)]
        force: bool,
    },
    /// Add a concept from a JSON file.
    Add {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
    },
    /// Record that CHILD specializes PARENT.
    Link { child: ConceptId, parent: ConceptId },
    /// Rank concepts by keyword overlap with QUERY.
    Search { query: String },
    /// Synthesize a program from a concept graph file.
    Generate {
        graph: PathBuf,
        #[arg(long, default_value = "minilang")]
        backend: String,
        /// Write the source here instead of printing it.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Run a MiniImp program.
    Run {
        file: PathBuf,
        #[arg(long, default_value = "main")]
        entry: String,
        /// Argument literal, repeatable (`--arg 3 --arg "[1, 2]"`).
        #[arg(long = "arg")]
        args: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
        step_limit: u64,
    },
    /// Group terminal concepts by structural similarity of their snippets.
    Cluster {
        #[arg(long, default_value_t = 0.9)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_ROUNDS)]
        rounds: usize,
        /// Write the similarity matrix as CSV.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Include operator symbols in node labels.
        #[arg(long)]
        label_ops: bool,
    },
    /// Search a snippet provider with a short description.
    Harvest {
        description: String,
        #[arg(long, default_value = DEFAULT_PROVIDER)]
        provider: String,
        /// Provider configuration file.
        #[arg(long)]
        providers: Option<PathBuf>,
    },
    /// Serve the JSON HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        providers: Option<PathBuf>,
    },
}

/// Runs the command line and returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            let _ = std::io::stdout().flush();
            0
        }
        Err(e) => {
            match format {
                Format::Json => eprintln!("{}", e.to_json()),
                Format::Text => eprintln!("error: {}: {}", e.code, e.message.replace('\n', " ")),
            }
            1
        }
    }
}

fn read(path: &Path) -> Result<String, ApiError> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), ApiError> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> ApiError {
    ApiError::new(
        "io",
        "io-error",
        500,
        format!("{}: {e}", path.display()),
        json!({ "path": path.display().to_string() }),
    )
}

fn open(path: &Path) -> Result<Store, ApiError> {
    Ok(load_store(path)?)
}

fn line_count(text: &str) -> usize {
    text.lines().count()
}

fn run(cli: Cli) -> Result<String, ApiError> {
    let json = cli.format == Format::Json;
    let store_path = cli.store.as_path();
    match cli.command {
        Command::Init { demo, force } => {
            if store_path.exists() && !force {
                return Err(ApiError::bad_request(format!(
                    "{} already exists (use --force to replace it)",
                    store_path.display()
                )));
            }
            let store = if demo { demo::fig6_store() } else { Store::new() };
            save_store(&store, store_path)?;
            let mut written = vec![store_path.display().to_string()];
            if demo {
                let corpus = engine::default_corpus_dir(store_path);
                std::fs::create_dir_all(&corpus).map_err(|e| io_error(&corpus, e))?;
                for (stem, src) in demo::SNIPPETS {
                    write(&corpus.join(format!("{stem}.mini")), src)?;
                }
                written.push(corpus.display().to_string());
                let graph = corpus.with_file_name("sort-pipeline.cmap.json");
                write(&graph, &to_cmap_json(&demo::fig4_graph()))?;
                written.push(graph.display().to_string());
            }
            Ok(if json {
                engine::to_json(&json!({ "concepts": store.len(), "written": written }))
            } else {
                format!("created {} with {} concepts\n", written.join(", "), store.len())
            })
        }
        Command::Add { file } => {
            let concept: Concept = serde_json::from_str(&read(&file)?)
                .map_err(|e| ApiError::bad_request(format!("{}: {e}", file.display())))?;
            let mut store = open(store_path)?;
            let id = concept.id.clone();
            store.add_concept(concept)?;
            save_store(&store, store_path)?;
            Ok(if json {
                engine::to_json(store.get(&id).expect("just added"))
            } else {
                format!("added {id}\n")
            })
        }
        Command::Link { child, parent } => {
            let mut store = open(store_path)?;
            store.link_specialization(&child, &parent)?;
            save_store(&store, store_path)?;
            Ok(if json {
                engine::to_json(&json!({ "child": child, "parent": parent }))
            } else {
                format!("linked {child} -> {parent}\n")
            })
        }
        Command::Search { query } => {
            let store = open(store_path)?;
            let hits = engine::search(&store, &query);
            Ok(if json {
                engine::to_json(&hits)
            } else {
                hits.iter()
                    .map(|h| {
                        let name = store.get(&h.id).map_or("", |c| c.name.as_str());
                        format!("{}\t{}\t{}\n", h.score, h.id, name)
                    })
                    .collect()
            })
        }
        Command::Generate {
            graph,
            backend,
            output,
        } => {
            let backend = engine::parse_backend(&backend)?;
            let graph = engine::parse_graph(&read(&graph)?)?;
            let store = open(store_path)?;
            let body = engine::generate(&store, &graph, backend)?;
            let program: codemapper::synthesis::GeneratedProgram =
                serde_json::from_str(&body).expect("generated JSON parses back");
            if let Some(path) = &output {
                write(path, &program.source)?;
            }
            Ok(match (json, &output) {
                (true, _) => body,
                (false, Some(path)) => format!(
                    "wrote {} ({} lines, {})\n",
                    path.display(),
                    line_count(&program.source),
                    backend.as_str()
                ),
                (false, None) => program.source,
            })
        }
        Command::Run {
            file,
            entry,
            args,
            step_limit,
        } => {
            let program = minilang::parse(&read(&file)?)?;
            let values = args
                .iter()
                .map(|a| {
                    minilang::parse_value(a)
                        .map_err(|e| ApiError::bad_request(format!("--arg {a}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let outcome = minilang::evaluate(&program, &entry, &values, step_limit)?;
            Ok(if json {
                engine::to_json(&json!({
                    "stdout": outcome.stdout,
                    "result": outcome.result.map(|v| v.to_string()),
                }))
            } else {
                let mut out = outcome.stdout;
                if let Some(v) = outcome.result {
                    out.push_str(&format!("{v}\n"));
                }
                out
            })
        }
        Command::Cluster {
            threshold,
            rounds,
            matrix,
            label_ops,
        } => {
            let store = open(store_path)?;
            let report = engine::cluster(&store, threshold, rounds, label_ops)?;
            if let Some(path) = &matrix {
                write(path, &report.matrix_csv())?;
            }
            Ok(if json {
                engine::to_json(&report)
            } else {
                let mut out = String::new();
                for (i, members) in report.clusters.iter().enumerate() {
                    let names: Vec<&str> = members.iter().map(ConceptId::as_str).collect();
                    out.push_str(&format!("cluster {}: {}\n", i + 1, names.join(", ")));
                }
                for s in &report.suggestions {
                    out.push_str(&format!("suggestion: {}\n", s.message));
                }
                out
            })
        }
        Command::Harvest {
            description,
            provider,
            providers,
        } => {
            let harvester = engine::load_harvester(providers.as_deref(), store_path)?;
            let hits = engine::harvest(&harvester, &description, &provider)?;
            Ok(if json {
                engine::to_json(&hits)
            } else {
                hits.iter()
                    .map(|h| format!("{:.3}\t{}\t{}\n", h.score, h.locator, h.title))
                    .collect()
            })
        }
        Command::Serve {
            port,
            host,
            providers,
        } => {
            let harvester = engine::load_harvester(providers.as_deref(), store_path)?;
            let state = Arc::new(AppState::open(store_path, harvester)?);
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| ApiError::bad_request(format!("cannot start runtime: {e}")))?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| ApiError::bad_request(format!("cannot bind {host}:{port}: {e}")))?;
                let addr = listener.local_addr().expect("bound socket has an address");
                println!("listening on http://{addr}");
                let _ = std::io::stdout().flush();
                serve(listener, state)
                    .await
                    .map_err(|e| ApiError::bad_request(format!("server stopped: {e}")))
            })?;
            Ok(String::new())
        }
    }
}
