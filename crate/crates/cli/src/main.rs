use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pex_client::Client;
use pex_core::config::Config;
use pex_core::exercises::{default_catalog, ExerciseEngine, Submission, Verdict};
use pex_core::fortunes::{load_corpus, FortuneCorpus};
use pex_core::gradebook::{
    log_path, parse_log, render_csv, render_detail, render_table, score, score_user, LogRecord,
    ParsedLog, ScoreRow, ScoreRules,
};
use pex_core::identity::Roster;
use pex_server::Service;

#[derive(Parser)]
#[command(
    name = "pex",
    version,
    about = "Parametrized exercise platform: operator tools"
)]
struct Cli {
    /// Configuration file (key=value lines).
    #[arg(long, short, global = true, default_value = "pex.conf")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manage the roster of student identities.
    #[command(subcommand)]
    Roster(RosterCommand),
    /// Run a server in the foreground.
    Serve {
        #[arg(value_enum)]
        which: ServeWhich,
    },
    /// Print the instance a student sees.
    Gen {
        exercise: String,
        user: String,
        /// Hex nonce for dynamic exercises (offline only).
        #[arg(long)]
        nonce: Option<String>,
        #[command(flatten)]
        remote: Remote,
        /// Print the instance as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Check answers and print the feedback.
    Checkans {
        exercise: String,
        user: String,
        /// Answer as name=value; repeatable.
        #[arg(long = "field", value_parser = parse_field)]
        fields: Vec<(String, String)>,
        /// Hex nonce of the instance being answered.
        #[arg(long)]
        nonce: Option<String>,
        /// Hex integrity tag; computed locally when omitted offline.
        #[arg(long)]
        tag: Option<String>,
        #[command(flatten)]
        remote: Remote,
    },
    /// Print the score table for one or more exercises.
    Grade {
        #[arg(required = true)]
        exercises: Vec<String>,
        #[command(flatten)]
        rules: RuleArgs,
        /// CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
    },
    /// Print one student's score and full history for an exercise.
    Detail {
        exercise: String,
        user: String,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Print the reference solution.
    Solve {
        exercise: String,
        user: String,
        #[arg(long)]
        nonce: Option<String>,
        /// Confirms the caller is allowed to see solutions.
        #[arg(long)]
        i_am_instructor: bool,
        /// Print fields, nonce and tag as one JSON object.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum RosterCommand {
    /// Derive and store identities for new users.
    Add {
        #[arg(required = true)]
        users: Vec<String>,
    },
    /// List users and their authentication codes.
    List,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ServeWhich {
    Web,
    Auth,
    All,
}

#[derive(Args)]
struct Remote {
    /// Use a running web service instead of the local secret.
    #[arg(long)]
    server: Option<String>,
}

#[derive(Args)]
struct RuleArgs {
    /// Points per exercise (default: the catalog value).
    #[arg(long)]
    points: Option<u32>,
    #[arg(long, default_value_t = 3)]
    effort_threshold: usize,
    #[arg(long, default_value_t = 0.2)]
    effort_fraction: f64,
}

fn parse_field(text: &str) -> Result<(String, String), String> {
    text.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected name=value, got {text:?}"))
}

fn decode_hex_arg(name: &str, text: Option<&str>) -> Result<Option<Vec<u8>>> {
    text.map(|t| hex::decode(t.trim()).with_context(|| format!("--{name} is not hex")))
        .transpose()
}

fn load_config(path: &PathBuf) -> Result<Config> {
    Config::load(path).with_context(|| format!("loading {}", path.display()))
}

fn offline_engine(config: &Config) -> Result<ExerciseEngine> {
    let corpus = match &config.corpus_path {
        Some(path) => load_corpus(path)?,
        None => FortuneCorpus::bundled(),
    };
    Ok(ExerciseEngine::new(
        config.derivation_context()?,
        corpus,
        default_catalog(),
    )?)
}

impl RuleArgs {
    fn rules(&self, default_points: u32) -> ScoreRules {
        ScoreRules {
            points: self.points.unwrap_or(default_points),
            effort_threshold: self.effort_threshold,
            effort_fraction: self.effort_fraction,
        }
    }
}

fn catalog_points(exercise_id: &str) -> u32 {
    default_catalog()
        .iter()
        .find(|s| s.exercise_id == exercise_id)
        .map_or(25, |s| s.points)
}

fn read_log(config: &Config, exercise_id: &str) -> Result<ParsedLog> {
    let path = log_path(&config.log_dir, exercise_id)?;
    if !path.exists() {
        return Ok(ParsedLog::default());
    }
    let parsed = parse_log(&path)?;
    for bad in &parsed.rejected {
        eprintln!(
            "{}:{}: skipped: {}",
            path.display(),
            bad.line_number,
            bad.reason
        );
    }
    Ok(parsed)
}

fn print_verdict(verdict: &Verdict) {
    print!("{}", verdict.feedback_text);
    if let Some(reward) = &verdict.reward {
        println!("\n[reward] {reward}");
    }
}

async fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Roster(cmd) => {
            let config = load_config(&cli.config)?;
            let mut roster = Roster::load(&config.roster_path)?;
            match cmd {
                RosterCommand::Add { users } => {
                    let ctx = config.derivation_context()?;
                    for user in &users {
                        if !roster.add(&ctx, user)? {
                            eprintln!("{user}: already on the roster");
                        }
                    }
                    roster.save(&config.roster_path)?;
                }
                RosterCommand::List => {
                    for identity in roster.iter() {
                        println!("{} {}", identity.user_id, identity.uac_hex());
                    }
                }
            }
        }
        Command::Serve { which } => {
            let config = load_config(&cli.config)?;
            let service = Arc::new(Service::from_config(&config)?);
            let web = async {
                let listener = tokio::net::TcpListener::bind(config.listen_http).await?;
                eprintln!("web service on http://{}", listener.local_addr()?);
                pex_server::web::serve(listener, Arc::clone(&service)).await
            };
            let auth = async {
                let listener = tokio::net::TcpListener::bind(config.listen_auth).await?;
                eprintln!("auth server on {}", listener.local_addr()?);
                pex_server::auth::serve(listener, Arc::clone(&service)).await
            };
            match which {
                ServeWhich::Web => web.await?,
                ServeWhich::Auth => auth.await?,
                ServeWhich::All => {
                    tokio::try_join!(web, auth)?;
                }
            }
        }
        Command::Gen {
            exercise,
            user,
            nonce,
            remote,
            json,
        } => {
            let instance = match remote.server {
                Some(url) => {
                    if nonce.is_some() {
                        bail!("--nonce only applies offline; the server mints its own");
                    }
                    Client::new(url).instance(&exercise, &user).await?
                }
                None => {
                    let engine = offline_engine(&load_config(&cli.config)?)?;
                    let nonce = decode_hex_arg("nonce", nonce.as_deref())?;
                    engine.generate(&exercise, &user, nonce.as_deref())?
                }
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&instance)?);
            } else {
                print!("{}", instance.display_text);
            }
        }
        Command::Checkans {
            exercise,
            user,
            fields,
            nonce,
            tag,
            remote,
        } => {
            let answers: BTreeMap<String, String> = fields.into_iter().collect();
            let verdict = match remote.server {
                Some(url) => {
                    let client = Client::new(url);
                    match (nonce, tag) {
                        (Some(nonce), Some(tag)) => {
                            let request = pex_core::api::SubmitRequest {
                                user,
                                answers,
                                nonce,
                                tag,
                            };
                            client.submit_raw(&exercise, &request).await?
                        }
                        (None, None) => {
                            let instance = client.instance(&exercise, &user).await?;
                            client.submit(&instance, answers).await?
                        }
                        _ => bail!("--nonce and --tag go together"),
                    }
                }
                None => {
                    let engine = offline_engine(&load_config(&cli.config)?)?;
                    let nonce = decode_hex_arg("nonce", nonce.as_deref())?.unwrap_or_default();
                    let integrity_tag = match decode_hex_arg("tag", tag.as_deref())? {
                        Some(tag) => tag,
                        None => engine.integrity_tag(&exercise, &user, &nonce),
                    };
                    engine.check(&Submission {
                        exercise_id: exercise,
                        user_id: user,
                        fields: answers,
                        nonce,
                        integrity_tag,
                        received_at: chrono::Utc::now(),
                    })?
                }
            };
            print_verdict(&verdict);
        }
        Command::Grade {
            exercises,
            rules,
            csv,
        } => {
            let config = load_config(&cli.config)?;
            let roster = Roster::load(&config.roster_path)?;
            let mut users: Vec<String> = roster.iter().map(|s| s.user_id.clone()).collect();
            let mut extra = std::collections::BTreeSet::new();
            let mut tables = Vec::new();
            for exercise in &exercises {
                let parsed = read_log(&config, exercise)?;
                let scores = score(&parsed.records, &rules.rules(catalog_points(exercise)));
                extra.extend(scores.keys().filter(|u| roster.get(u).is_none()).cloned());
                tables.push(scores);
            }
            users.extend(extra);
            let rows: Vec<ScoreRow> = users
                .into_iter()
                .map(|user| {
                    let scores = tables
                        .iter()
                        .map(|t| t.get(&user).copied().unwrap_or(0))
                        .collect();
                    ScoreRow {
                        user_id: user,
                        scores,
                    }
                })
                .collect();
            if csv {
                let ids: Vec<&str> = exercises.iter().map(String::as_str).collect();
                print!("{}", render_csv(&ids, &rows));
            } else {
                print!("{}", render_table(&rows));
            }
        }
        Command::Detail {
            exercise,
            user,
            rules,
        } => {
            let config = load_config(&cli.config)?;
            let parsed = read_log(&config, &exercise)?;
            let records: Vec<&LogRecord> = parsed
                .records
                .iter()
                .filter(|r| r.user_id == user)
                .collect();
            let total = score_user(
                records.iter().copied(),
                &rules.rules(catalog_points(&exercise)),
            );
            print!("{}", render_detail(total, &records));
        }
        Command::Solve {
            exercise,
            user,
            nonce,
            i_am_instructor,
            json,
        } => {
            if !i_am_instructor {
                bail!("solutions are for instructors; pass --i-am-instructor");
            }
            let engine = offline_engine(&load_config(&cli.config)?)?;
            let nonce = decode_hex_arg("nonce", nonce.as_deref())?;
            let instance = engine.generate(&exercise, &user, nonce.as_deref())?;
            let solution = engine.solve(&instance)?;
            if json {
                let out = serde_json::json!({
                    "fields": solution.fields,
                    "nonce": hex::encode(&instance.nonce),
                    "tag": hex::encode(&instance.integrity_tag),
                });
                println!("{}", serde_json::to_string_pretty(&out)?);
                return Ok(());
            }
            for (name, value) in &solution.fields {
                if value.contains('\n') {
                    println!("{name}:\n{value}");
                } else {
                    println!("{name}={value}");
                }
            }
            if !instance.nonce.is_empty() {
                println!("nonce={}", hex::encode(&instance.nonce));
                println!("tag={}", hex::encode(&instance.integrity_tag));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("pex: {e}");
            return ExitCode::FAILURE;
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pex: {e:#}");
            ExitCode::FAILURE
        }
    }
}
