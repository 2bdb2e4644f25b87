use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use olframe_cli::driver::{run_transcript, Driver};
use olframe_cli::repl::repl;
use olframe_cli::transcript::parse_transcript;
use olframe_core::kb::{validate_knowledge_base, LoadOptions};
use olframe_core::session::{AmbiguityPolicy, Session, SessionConfig, SessionError};
use olframe_core::LanguageId;
use olframe_gateway::{serve, Gateway, GatewayConfig, ServerOptions};

const EXIT_USAGE: u8 = 1;
const EXIT_KB: u8 = 2;
const EXIT_PROTOCOL: u8 = 4;

#[derive(Parser)]
#[command(name = "olframe", version, about = "Interpret and validate imperative utterances against a knowledge base")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    /// Offer every plan and wait for a choice.
    Ask,
    /// Execute the first plan.
    Auto,
}

#[derive(Args, Clone)]
struct SessionFlags {
    /// What to do when several plans fit.
    #[arg(long, value_enum, default_value = "ask")]
    policy: Policy,
    /// Do not execute plans.
    #[arg(long)]
    no_exec: bool,
    /// Write learned concepts back to the KB directory on exit.
    #[arg(long)]
    persist_kb: bool,
    /// Language of utterances.
    #[arg(long, default_value = "en")]
    lang: String,
    /// Accept records with unknown fields, with a warning.
    #[arg(long)]
    lenient: bool,
}

impl SessionFlags {
    fn config(&self) -> SessionConfig {
        SessionConfig {
            policy: match self.policy {
                Policy::Ask => AmbiguityPolicy::AskUser,
                Policy::Auto => AmbiguityPolicy::AutoFirst,
            },
            execute: !self.no_exec,
            persist_kb: self.persist_kb,
            load: LoadOptions { lenient: self.lenient },
        }
    }

    fn language(&self) -> Result<LanguageId, String> {
        LanguageId::new(self.lang.clone()).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Interactive dialogue.
    Repl {
        #[arg(long)]
        kb: PathBuf,
        #[command(flatten)]
        flags: SessionFlags,
        /// Print the interpretation trace after each utterance.
        #[arg(long)]
        trace: bool,
        /// Also write the JSONL event log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a transcript; exit 0 iff every expectation holds.
    Run {
        transcript: PathBuf,
        #[arg(long)]
        kb: PathBuf,
        #[command(flatten)]
        flags: SessionFlags,
        /// Add the interpretation trace of each utterance to the log.
        #[arg(long)]
        trace: bool,
        /// Write the JSONL event log here instead of stdout.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Check a KB directory and list every problem found.
    Validate {
        kb: PathBuf,
        #[arg(long)]
        lenient: bool,
    },
    /// Serve the gateway protocol over TCP.
    Serve {
        /// Directory whose subdirectories are the KBs clients can open.
        #[arg(long)]
        kb_root: PathBuf,
        /// KB opened when a client names none.
        #[arg(long)]
        kb: Option<String>,
        #[arg(long, default_value = "127.0.0.1:7878")]
        bind: SocketAddr,
        /// Seconds between server heartbeats.
        #[arg(long, default_value_t = 30)]
        heartbeat: u64,
        #[command(flatten)]
        flags: SessionFlags,
    },
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("olframe: {message}");
    ExitCode::from(code)
}

fn session_error(e: SessionError) -> ExitCode {
    match e {
        SessionError::Kb(_) => fail(EXIT_KB, e),
        other => fail(EXIT_PROTOCOL, other),
    }
}

fn open_log(path: Option<&Path>, default: Box<dyn Write>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => default,
    })
}

fn open_session(kb: &Path, flags: &SessionFlags) -> Result<Session, ExitCode> {
    let language = flags.language().map_err(|e| fail(EXIT_USAGE, e))?;
    Session::open(kb, language, flags.config()).map_err(session_error)
}

fn close(session: Session) -> ExitCode {
    match session.close() {
        Ok(Some(path)) => {
            eprintln!("learned concepts written to {}", path.display());
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => session_error(e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Validate { kb, lenient } => {
            let report = validate_knowledge_base(&kb, LoadOptions { lenient });
            for w in &report.warnings {
                println!("warning: {w}");
            }
            for e in &report.errors {
                println!("error[{}]: {e}", e.code());
            }
            println!(
                "{}: {} records, {} errors, {} warnings",
                kb.display(),
                report.record_count,
                report.errors.len(),
                report.warnings.len()
            );
            if report.is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_KB)
            }
        }
        Command::Run {
            transcript,
            kb,
            flags,
            trace,
            log,
        } => {
            let text = match std::fs::read_to_string(&transcript) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_USAGE, format!("{}: {e}", transcript.display())),
            };
            let directives = match parse_transcript(&text) {
                Ok(d) => d,
                Err(e) => return fail(EXIT_PROTOCOL, format!("{}: {e}", transcript.display())),
            };
            let session = match open_session(&kb, &flags) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let sink = match open_log(log.as_deref(), Box::new(io::stdout())) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            let mut driver = Driver::new(session, trace, sink);
            let report = run_transcript(&mut driver, &directives);
            for m in &report.mismatches {
                eprintln!("{m}");
            }
            for p in &report.protocol_errors {
                eprintln!("protocol error at {p}");
            }
            let code = report.exit_code();
            let closed = close(driver.into_session());
            if code != 0 {
                ExitCode::from(code as u8)
            } else {
                closed
            }
        }
        Command::Repl { kb, flags, trace, log } => {
            let session = match open_session(&kb, &flags) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let sink = match open_log(log.as_deref(), Box::new(io::sink())) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            let mut driver = Driver::new(session, log.is_some() && trace, sink);
            if let Err(e) = repl(&mut driver, io::stdin().lock(), io::stdout(), trace) {
                return fail(EXIT_USAGE, e);
            }
            close(driver.into_session())
        }
        Command::Serve {
            kb_root,
            kb,
            bind,
            heartbeat,
            flags,
        } => {
            let language = match flags.language() {
                Ok(l) => l,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            if let Some(name) = &kb {
                let report = validate_knowledge_base(kb_root.join(name), flags.config().load);
                if let Some(e) = report.errors.first() {
                    return fail(EXIT_KB, e);
                }
            }
            let gateway = Arc::new(Gateway::new(GatewayConfig {
                kb_root,
                default_kb: kb,
                language,
                session: flags.config(),
            }));
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(r) => r,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            let result = runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(bind).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                let options = ServerOptions {
                    heartbeat: Duration::from_secs(heartbeat.max(1)),
                };
                serve(listener, gateway, options).await
            });
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_USAGE, e),
            }
        }
    }
}
