//! `shapeprog`: build shape graphs, turn edit requests into programs and
//! evaluate them. Commands that need a shape session talk to the service,
//! either at `--server` or in-process on an ephemeral port.

mod error;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shapeprog_client::{Client, NewSession, Params, RequestOptions};
use shapeprog_core::config::Config;
use shapeprog_core::dsl::{compose, parse, parse_for, print, EditProgram};
use shapeprog_core::metrics::{evaluate, write_csv};
use shapeprog_core::shape::io::load_graph;

use error::CliError;

#[derive(Parser)]
#[command(name = "shapeprog", version, about = "Parameterized shape editing programs")]
struct Cli {
    /// TOML settings file; SHAPEPROG_* variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base URL of a running service. Without it a private one is started.
    #[arg(long, global = true)]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a shape graph from a segmented mesh manifest or a fixture.
    Build {
        manifest: Option<PathBuf>,
        #[arg(long, conflicts_with = "manifest")]
        fixture: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Infer and propagate an edit from a natural-language request.
    Edit {
        graph: PathBuf,
        #[arg(long)]
        request: String,
        #[command(flatten)]
        llm: LlmArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the solver report to stderr.
        #[arg(long)]
        explain: bool,
    },
    /// Generate independent requests and stack their programs.
    Proxydural {
        graph: PathBuf,
        #[command(flatten)]
        llm: LlmArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        explain: bool,
    },
    /// Evaluate a program and write the deformed meshes.
    Eval {
        graph: PathBuf,
        program: PathBuf,
        /// Parameter values as name=value; unset parameters are 0.
        #[arg(long = "set", value_parser = parse_setting)]
        set: Vec<(String, f64)>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Evaluate at evenly spaced values of one parameter.
    Sweep {
        graph: PathBuf,
        program: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, default_value_t = 30)]
        frames: usize,
        #[arg(long = "set", value_parser = parse_setting)]
        set: Vec<(String, f64)>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compose two programs: the second is applied after the first.
    Compose {
        first: PathBuf,
        second: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare a program against a reference program.
    Metrics {
        graph: PathBuf,
        program: PathBuf,
        reference: PathBuf,
        /// Row name; the program's file name by default.
        #[arg(long)]
        name: Option<String>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(clap::Args)]
struct LlmArgs {
    /// mock or remote
    #[arg(long)]
    provider: Option<String>,
    #[arg(long)]
    votes: Option<usize>,
    /// Shape name for transcript lookup; the graph file's name up to the
    /// first dot by default.
    #[arg(long)]
    shape: Option<String>,
}

impl LlmArgs {
    fn options(&self) -> Result<RequestOptions, CliError> {
        if let Some(p) = &self.provider {
            if p != "mock" && p != "remote" {
                return Err(CliError::Input(format!("unknown provider `{p}` (expected mock or remote)")));
            }
        }
        Ok(RequestOptions { provider: self.provider.clone(), votes: self.votes, stack: false })
    }
}

fn parse_setting(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => write(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn shape_name(graph: &Path, given: Option<&str>) -> String {
    given.map(str::to_string).unwrap_or_else(|| {
        let name = graph.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        name.split('.').next().unwrap_or("shape").to_string()
    })
}

/// Start the service on a background runtime and return its URL.
fn spawn_service(config: Config) -> Result<String, CliError> {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
            Ok(rt) => rt,
            Err(e) => return tx.send(Err(e.to_string())).unwrap_or(()),
        };
        rt.block_on(async move {
            match tokio::net::TcpListener::bind("127.0.0.1:0").await {
                Ok(listener) => {
                    let addr = listener.local_addr().map_err(|e| e.to_string());
                    let _ = tx.send(addr);
                    if let Err(e) = shapeprog_service::serve(listener, config).await {
                        log::error!("service stopped: {e}");
                    }
                }
                Err(e) => {
                    let _ = tx.send(Err(e.to_string()));
                }
            }
        });
    });
    let addr = rx.recv().map_err(|e| CliError::Service(e.to_string()))?.map_err(CliError::Service)?;
    Ok(format!("http://{addr}"))
}

struct Ctx {
    config: Config,
    server: Option<String>,
}

impl Ctx {
    fn client(&self) -> Result<Client, CliError> {
        let url = match &self.server {
            Some(u) => u.clone(),
            None => spawn_service(self.config.clone())?,
        };
        Ok(Client::new(&url))
    }

    /// A session on `graph`, checked to exist locally first so a bad path is
    /// an input error rather than a service error.
    fn session(&self, client: &Client, graph: &Path, shape: Option<&str>) -> Result<String, CliError> {
        let text = read(graph)?;
        let body = NewSession { graph: Some(text), shape: Some(shape_name(graph, shape)), ..NewSession::default() };
        Ok(client.create_session(&body)?.id)
    }
}

fn load_program(path: &Path) -> Result<EditProgram, CliError> {
    parse(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn assignment(program: &EditProgram, set: &[(String, f64)]) -> Result<Params, CliError> {
    let mut out = BTreeMap::new();
    for (k, v) in set {
        if program.param(k).is_none() {
            return Err(CliError::Input(format!("the program has no parameter {k}")));
        }
        out.insert(k.clone(), *v);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = Config::load(cli.config.as_deref()).map_err(|e| CliError::Input(e.to_string()))?;
    let ctx = Ctx { config, server: cli.server };
    match cli.command {
        Command::Build { manifest, fixture, output } => {
            let body = match (manifest, fixture) {
                (Some(m), None) => {
                    let abs = std::fs::canonicalize(&m).map_err(|e| CliError::Input(format!("{}: {e}", m.display())))?;
                    NewSession::manifest(&abs.to_string_lossy())
                }
                (None, Some(f)) => NewSession::fixture(&f),
                _ => return Err(CliError::Input("give a manifest or --fixture".into())),
            };
            let client = ctx.client()?;
            let s = client.create_session(&body)?;
            write(&output, client.graph(&s.id)?.as_bytes())?;
            let parts = s.graph["parts"].as_array().map_or(0, Vec::len);
            let relations = s.graph["relations"].as_array().map_or(0, Vec::len);
            eprintln!("{parts} parts, {relations} relations");
        }
        Command::Edit { graph, request, llm, output, explain } => {
            let opts = llm.options()?;
            let client = ctx.client()?;
            let id = ctx.session(&client, &graph, llm.shape.as_deref())?;
            let r = client.request_with(&id, &request, &opts)?;
            if explain {
                eprint!("{}", client.report(&id, Some(r.program_id))?);
            }
            for w in r.bundle["warnings"].as_array().into_iter().flatten() {
                eprintln!("warning: {}", w.as_str().unwrap_or_default());
            }
            if !r.broken.is_empty() {
                eprintln!("broken relations: {}", r.broken.join(", "));
            }
            emit(output.as_deref(), &r.program)?;
            if !r.stalled.is_empty() {
                return Err(CliError::Stalled(r.stalled));
            }
        }
        Command::Proxydural { graph, llm, output, explain } => {
            let opts = llm.options()?;
            let client = ctx.client()?;
            let id = ctx.session(&client, &graph, llm.shape.as_deref())?;
            let r = client.proxydural(&id, &opts)?;
            for (pid, req) in r.program_ids.iter().zip(&r.requests) {
                eprintln!("program {pid}: {req}");
                if explain {
                    eprint!("{}", client.report(&id, Some(*pid))?);
                }
            }
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            emit(output.as_deref(), &r.active)?;
        }
        Command::Eval { graph, program, set, output } => {
            let p = load_program(&program)?;
            let sigma = assignment(&p, &set)?;
            let client = ctx.client()?;
            let id = ctx.session(&client, &graph, None)?;
            client.upload_program(&id, &print(&p), false)?;
            write(&output.join("shape.obj"), client.export(&id, &sigma)?.as_bytes())?;
            write(&output.join("frame.spev"), &client.eval_bytes(&id, &sigma)?)?;
        }
        Command::Sweep { graph, program, param, frames, set, output } => {
            let p = load_program(&program)?;
            let decl = p.param(&param).ok_or_else(|| CliError::Input(format!("the program has no parameter {param}")))?;
            if frames == 0 {
                return Err(CliError::Input("--frames must be positive".into()));
            }
            let (lo, hi) = (decl.lo, decl.hi);
            let mut sigma = assignment(&p, &set)?;
            let client = ctx.client()?;
            let id = ctx.session(&client, &graph, None)?;
            client.upload_program(&id, &print(&p), false)?;
            let mut index = String::from("frame,value\n");
            for i in 0..frames {
                let t = if frames == 1 { 0.0 } else { i as f64 / (frames - 1) as f64 };
                let v = lo + (hi - lo) * t;
                sigma.insert(param.clone(), v);
                write(&output.join(format!("frame_{i:03}.obj")), client.export(&id, &sigma)?.as_bytes())?;
                index.push_str(&format!("{i},{v}\n"));
            }
            write(&output.join("frames.csv"), index.as_bytes())?;
        }
        Command::Compose { first, second, output } => {
            let c = compose(&load_program(&first)?, &load_program(&second)?);
            emit(output.as_deref(), &print(&c))?;
        }
        Command::Metrics { graph, program, reference, name } => {
            let g = load_graph(&graph).map_err(|e| CliError::Input(format!("{}: {e}", graph.display())))?;
            let parse_on = |path: &Path| {
                parse_for(&read(path)?, &g).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
            };
            let (p, gt) = (parse_on(&program)?, parse_on(&reference)?);
            let name = name.unwrap_or_else(|| program.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
            let row = evaluate(&p, &gt, &g);
            let mut out = Vec::new();
            write_csv(&mut out, &[(name, row)]).map_err(|e| CliError::Output(e.to_string()))?;
            std::io::stdout().write_all(&out).map_err(|e| CliError::Output(e.to_string()))?;
        }
        Command::Serve { port, host } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Service(e.to_string()))?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| CliError::Service(format!("{host}:{port}: {e}")))?;
                eprintln!("listening on http://{}", listener.local_addr().map_err(|e| CliError::Service(e.to_string()))?);
                shapeprog_service::serve(listener, ctx.config).await.map_err(|e| CliError::Service(e.to_string()))
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
