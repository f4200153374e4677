//! Thin command-line client for the control plane API. Every command is one
//! request; all validation and diffing happens on the server.

pub mod client;
pub mod render;

use std::ffi::OsString;
use std::io::{IsTerminal, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use client::{encode, Client, ClientError, Reply};

#[derive(Parser)]
#[command(name = "confplane", version, about = "Manage versioned configurations, schemas and node placements")]
struct Cli {
    /// API address, e.g. http://127.0.0.1:8080.
    #[arg(long, env = "CONFPLANE_SERVER", global = true)]
    server: Option<String>,
    /// Output format; pretty on a terminal, json otherwise.
    #[arg(short = 'o', long = "output", value_enum, global = true)]
    output: Option<OutputMode>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputMode {
    Pretty,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Standalone configurations.
    #[command(subcommand)]
    Config(ConfigCommand),
    /// Configuration groups.
    #[command(subcommand)]
    Group(ConfigCommand),
    /// Validation schemas.
    #[command(subcommand)]
    Schema(SchemaCommand),
    /// Node pool.
    #[command(subcommand)]
    Node(NodeCommand),
    /// Place a stored config on every node matching a label query.
    Disseminate(DisseminateArgs),
    /// Configs placed on a node in a namespace.
    Fetch(FetchArgs),
}

#[derive(Args)]
struct Identity {
    org: String,
    name: String,
    version: String,
}

#[derive(Subcommand)]
enum ConfigCommand {
    /// Store a new immutable version.
    Put {
        #[command(flatten)]
        id: Identity,
        /// YAML payload file, `-` for stdin.
        #[arg(short = 'f', long = "file")]
        file: Option<PathBuf>,
        /// Inline parameter (standalone configs only); repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Validate against this schema before storing.
        #[arg(long, value_name = "ORG/NAME/VERSION")]
        schema: Option<String>,
    },
    /// Show one stored version.
    Get {
        #[command(flatten)]
        id: Identity,
    },
    /// All versions of a name in creation order.
    Timeline { org: String, name: String },
    /// Differences between two stored versions.
    Diff {
        org: String,
        name: String,
        #[arg(long = "ref")]
        reference: String,
        #[arg(long)]
        target: String,
        /// Organization of the reference version, if different.
        #[arg(long)]
        ref_org: Option<String>,
        /// Name of the reference version, if different.
        #[arg(long)]
        ref_name: Option<String>,
    },
    /// Names stored under an organization.
    List { org: String },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    #[value(alias = "config")]
    Standalone,
    Group,
}

impl Kind {
    fn wire(self) -> &'static str {
        match self {
            Kind::Standalone => "standalone",
            Kind::Group => "group",
        }
    }
}

#[derive(Subcommand)]
enum SchemaCommand {
    /// Store a new schema version from YAML.
    Put {
        #[command(flatten)]
        id: Identity,
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
    },
    Get {
        #[command(flatten)]
        id: Identity,
    },
    /// All versions of a schema in creation order.
    History { org: String, name: String },
    Delete {
        #[command(flatten)]
        id: Identity,
    },
    /// Check a YAML payload against a stored schema without storing it.
    Validate {
        #[command(flatten)]
        id: Identity,
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(long, value_enum, default_value = "standalone")]
        kind: Kind,
    },
}

#[derive(Subcommand)]
enum NodeCommand {
    Register {
        node_id: String,
        #[arg(long)]
        org: String,
        /// Label; `true`/`false` are booleans, numbers are numeric.
        #[arg(long = "label", value_name = "KEY=VALUE")]
        labels: Vec<String>,
    },
    /// Replace a node's labels.
    Label {
        node_id: String,
        #[arg(long = "label", value_name = "KEY=VALUE")]
        labels: Vec<String>,
    },
    List {
        #[arg(long)]
        org: String,
        /// Only nodes matching this query, e.g. `region=eu,cores>4`.
        #[arg(long)]
        query: Option<String>,
    },
}

#[derive(Args)]
struct DisseminateArgs {
    #[command(flatten)]
    id: Identity,
    #[arg(long, value_enum, default_value = "standalone")]
    kind: Kind,
    #[arg(long)]
    namespace: String,
    #[arg(long)]
    query: String,
}

#[derive(Args)]
struct FetchArgs {
    node_id: String,
    namespace: String,
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Client(ClientError),
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        Failure::Client(e)
    }
}

/// What a successful command prints.
struct Output {
    reply: Reply,
    pretty: fn(&Value) -> String,
    exit: i32,
}

fn show(reply: Reply, pretty: fn(&Value) -> String) -> Result<Output, Failure> {
    Ok(Output { reply, pretty, exit: 0 })
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    let mut text = String::new();
    let result = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    result.map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

fn split_pair<'a>(pair: &'a str, flag: &str) -> Result<(&'a str, &'a str), Failure> {
    match pair.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k, v)),
        _ => Err(Failure::Usage(format!("{flag} expects KEY=VALUE, got {pair:?}"))),
    }
}

/// `--set` pairs as a flat YAML mapping; JSON string syntax is valid YAML.
fn inline_yaml(pairs: &[String]) -> Result<String, Failure> {
    let mut yaml = String::new();
    for pair in pairs {
        let (k, v) = split_pair(pair, "--set")?;
        yaml.push_str(&format!("{}: {}\n", Value::from(k), Value::from(v)));
    }
    Ok(yaml)
}

fn label_value(text: &str) -> Value {
    match text {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => match text.parse::<f64>() {
            Ok(x) if x.is_finite() => json!(x),
            _ => Value::from(text),
        },
    }
}

fn labels(pairs: &[String]) -> Result<Value, Failure> {
    pairs
        .iter()
        .map(|pair| {
            let (k, v) = split_pair(pair, "--label")?;
            Ok(json!({"key": k, "value": label_value(v)}))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Value::Array)
}

fn id_path(id: &Identity) -> String {
    format!("{}/{}/{}", encode(&id.org), encode(&id.name), encode(&id.version))
}

fn config_command(client: &Client, collection: &str, cmd: ConfigCommand) -> Result<Output, Failure> {
    match cmd {
        ConfigCommand::Put { id, file, set, schema } => {
            let yaml = match (file, set.is_empty()) {
                (Some(_), false) => return Err(Failure::Usage("use either --file or --set, not both".into())),
                (Some(path), true) => read_input(&path)?,
                (None, false) if collection == "groups" => {
                    return Err(Failure::Usage("--set is only available for standalone configs".into()))
                }
                (None, false) => inline_yaml(&set)?,
                (None, true) => return Err(Failure::Usage("a payload is required: --file or --set".into())),
            };
            let mut body = json!({"name": id.name, "version": id.version, "yaml": yaml});
            if let Some(schema) = schema {
                body["schemaRef"] = Value::from(schema);
            }
            show(client.post(&format!("/v1/orgs/{}/{collection}", encode(&id.org)), &body)?, render::stored)
        }
        ConfigCommand::Get { id } => {
            let path =
                format!("/v1/orgs/{}/{collection}/{}/{}", encode(&id.org), encode(&id.name), encode(&id.version));
            show(client.get(&path)?, render::record)
        }
        ConfigCommand::Timeline { org, name } => show(
            client.get(&format!("/v1/orgs/{}/{collection}/{}/timeline", encode(&org), encode(&name)))?,
            render::timeline,
        ),
        ConfigCommand::Diff { org, name, reference, target, ref_org, ref_name } => {
            let mut path = format!(
                "/v1/orgs/{}/{collection}/{}/diff?ref={}&target={}",
                encode(&org),
                encode(&name),
                encode(&reference),
                encode(&target)
            );
            if let Some(o) = ref_org {
                path.push_str(&format!("&refOrg={}", encode(&o)));
            }
            if let Some(n) = ref_name {
                path.push_str(&format!("&refName={}", encode(&n)));
            }
            show(client.get(&path)?, render::diff)
        }
        ConfigCommand::List { org } => {
            show(client.get(&format!("/v1/orgs/{}/{collection}", encode(&org)))?, render::names)
        }
    }
}

fn schema_command(client: &Client, cmd: SchemaCommand) -> Result<Output, Failure> {
    match cmd {
        SchemaCommand::Put { id, file } => {
            let yaml = read_input(&file)?;
            let body = json!({"organization": id.org, "name": id.name, "version": id.version, "yaml": yaml});
            show(client.post("/v1/schemas", &body)?, render::schema_stored)
        }
        SchemaCommand::Get { id } => show(client.get(&format!("/v1/schemas/{}", id_path(&id)))?, render::schema),
        SchemaCommand::History { org, name } => show(
            client.get(&format!("/v1/schemas/{}/{}/history", encode(&org), encode(&name)))?,
            render::schema_history,
        ),
        SchemaCommand::Delete { id } => show(client.delete(&format!("/v1/schemas/{}", id_path(&id)))?, render::deleted),
        SchemaCommand::Validate { id, file, kind } => {
            let yaml = read_input(&file)?;
            let body = json!({"kind": kind.wire(), "yaml": yaml});
            let reply = client.post(&format!("/v1/schemas/{}/validate", id_path(&id)), &body)?;
            let exit = if reply.value.get("valid") == Some(&Value::Bool(true)) { 0 } else { 1 };
            Ok(Output { reply, pretty: render::validation, exit })
        }
    }
}

fn node_command(client: &Client, cmd: NodeCommand) -> Result<Output, Failure> {
    match cmd {
        NodeCommand::Register { node_id, org, labels: pairs } => {
            let body = json!({"nodeId": node_id, "organization": org, "labels": labels(&pairs)?});
            show(client.post("/v1/nodes", &body)?, render::node)
        }
        NodeCommand::Label { node_id, labels: pairs } => {
            let body = json!({"labels": labels(&pairs)?});
            show(client.put(&format!("/v1/nodes/{}/labels", encode(&node_id)), &body)?, render::node)
        }
        NodeCommand::List { org, query } => {
            let mut path = format!("/v1/nodes?org={}", encode(&org));
            if let Some(q) = query {
                path.push_str(&format!("&query={}", encode(&q)));
            }
            show(client.get(&path)?, render::nodes)
        }
    }
}

fn execute(client: &Client, command: Command) -> Result<Output, Failure> {
    match command {
        Command::Config(cmd) => config_command(client, "configs", cmd),
        Command::Group(cmd) => config_command(client, "groups", cmd),
        Command::Schema(cmd) => schema_command(client, cmd),
        Command::Node(cmd) => node_command(client, cmd),
        Command::Disseminate(args) => {
            let body = json!({
                "org": args.id.org,
                "kind": args.kind.wire(),
                "name": args.id.name,
                "version": args.id.version,
                "namespace": args.namespace,
                "query": args.query,
            });
            show(client.post("/v1/disseminations", &body)?, render::placement)
        }
        Command::Fetch(args) => {
            let mut path =
                format!("/v1/nodes/{}/namespaces/{}/configs", encode(&args.node_id), encode(&args.namespace));
            if let Some(name) = args.name {
                path.push_str(&format!("?name={}", encode(&name)));
            }
            show(client.get(&path)?, render::fetched)
        }
    }
}

/// Runs one invocation and returns its exit code: 0 success, 1 failure
/// reported by the server or transport, 2 usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational =
                matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if informational { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return if informational { 0 } else { 2 };
        }
    };
    let server = match cli.server.as_deref().map(str::trim) {
        Some(s) if !s.is_empty() => s.to_owned(),
        _ => {
            let _ = writeln!(err, "error: no server address; pass --server or set CONFPLANE_SERVER");
            return 2;
        }
    };
    let mode =
        cli.output.unwrap_or(if std::io::stdout().is_terminal() { OutputMode::Pretty } else { OutputMode::Json });
    let client = Client::new(&server);
    match execute(&client, cli.command) {
        Ok(output) => {
            let written = match mode {
                // Exactly the response body, so scripts can compare it byte for byte.
                OutputMode::Json => out.write_all(output.reply.body.as_bytes()),
                OutputMode::Pretty => out.write_all((output.pretty)(&output.reply.value).as_bytes()),
            };
            if written.and_then(|_| out.flush()).is_err() {
                return 1;
            }
            output.exit
        }
        Err(Failure::Usage(message)) => {
            let _ = writeln!(err, "error: {message}");
            2
        }
        Err(Failure::Input(message)) => {
            let _ = writeln!(err, "error: {message}");
            1
        }
        Err(Failure::Client(e)) => {
            let _ = writeln!(err, "error: {e}");
            if let ClientError::Api { details, .. } = &e {
                for v in details {
                    let v = json!({"path": v.path, "rule": v.rule, "message": v.message});
                    let _ = writeln!(err, "  {}", render::violation(&v));
                }
            }
            1
        }
    }
}
