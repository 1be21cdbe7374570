use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "prkg", version, about = "Personal research knowledge graph")]
pub struct Cli {
    /// Act as this role (default: the configured role, else admin).
    #[arg(long = "as", global = true, env = "PRKG_ROLE", value_name = "ROLE")]
    pub as_role: Option<String>,

    /// Snapshot file to operate on.
    #[arg(long, global = true, env = "PRKG_DATA", value_name = "PATH")]
    pub data: Option<PathBuf>,

    /// Configuration file (TOML).
    #[arg(long, global = true, env = "PRKG_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    /// One JSON record per line.
    Lines,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a new graph owned by NAME.
    Init {
        #[arg(long)]
        owner: String,
    },
    #[command(subcommand)]
    Node(NodeCmd),
    #[command(subcommand)]
    Rel(RelCmd),
    #[command(subcommand)]
    Link(LinkCmd),
    #[command(subcommand)]
    Import(ImportCmd),
    #[command(subcommand)]
    Inbox(InboxCmd),
    #[command(subcommand)]
    Role(RoleCmd),
    /// Add a grant rule to a role.
    Grant(RuleArgs),
    /// Add a deny rule to a role.
    Deny(RuleArgs),
    /// Run a query and print its rows.
    Query { text: String },
    /// Report orphans and schema warnings.
    Validate,
    #[command(subcommand)]
    Export(ExportCmd),
    /// Rewrite the snapshot in canonical form.
    Save,
}

#[derive(Debug, Subcommand)]
pub enum NodeCmd {
    Add {
        #[arg(long = "label", required = true)]
        labels: Vec<String>,
        #[arg(long = "prop", value_name = "K=V")]
        props: Vec<String>,
    },
    Delete {
        id: u64,
        #[arg(long)]
        cascade: bool,
    },
    /// Set or remove node properties.
    Set {
        id: u64,
        #[arg(long = "prop", value_name = "K=V")]
        props: Vec<String>,
        #[arg(long = "unset", value_name = "K")]
        unset: Vec<String>,
    },
    /// Print a node and its relationships.
    Show { id: u64 },
}

#[derive(Debug, Subcommand)]
pub enum RelCmd {
    Add {
        src: u64,
        dst: u64,
        #[arg(value_name = "TYPE")]
        rel_type: String,
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        end: Option<String>,
        #[arg(long = "prop", value_name = "K=V")]
        props: Vec<String>,
    },
    End { id: u64, date: String },
}

#[derive(Debug, Subcommand)]
pub enum LinkCmd {
    Add { node: u64, source: String, uri: String },
}

#[derive(Debug, Subcommand)]
pub enum ImportCmd {
    /// Candidate triples, one JSON object per line.
    Triples { file: PathBuf },
    Bibtex { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum InboxCmd {
    List {
        #[arg(long)]
        state: Option<String>,
    },
    Accept { id: u64 },
    Reject { id: u64 },
}

#[derive(Debug, Subcommand)]
pub enum RoleCmd {
    Create { name: String },
    Copy { new: String, from: String },
    /// Print roles and their rules.
    List,
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    pub role: String,
    pub privilege: String,
    /// graph | node-label L | rel-type T | node ID | prop L KEY | prop-pred L KEY V1,V2
    #[arg(required = true, num_args = 1.., allow_hyphen_values = true)]
    pub scope: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum ExportCmd {
    /// Write the visible graph as N-Triples.
    Rdf { file: PathBuf },
}
