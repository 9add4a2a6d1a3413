//! `catecom`: validate, classify, build, fingerprint, store and export
//! computational-model documents.
//!
//! Exit codes: 0 success, 1 domain violation, 2 input or parse error.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use catecom_core::builder::{build_unit_model, compose_compound_model, BuildOptions};
use catecom_core::entity::document::{parse_any, parse_method, serialize_pretty, DocumentError};
use catecom_core::entity::{CategoryPath, Entity, PropertyRecord, UnitModel};
use catecom_core::fingerprint::fingerprint;
use catecom_core::interop::{BindingDocument, InteropBinding};
use catecom_core::method::{diff_against_defaults, parse_flavor_defaults, FlavorDefaults};
use catecom_core::registry::{DuplicatePolicy, Filter, Registry, RegistryError, REGISTRY_ENV};
use catecom_core::taxonomy::{classify, ClassifyError, Feature, ModelFeature, TaxonomyExtension};
use catecom_core::triples::{default_subject_id, export_triples, to_ntriples, DEFAULT_BASE_IRI};
use catecom_core::{TaxonomyTree, Validator};

#[derive(Parser)]
#[command(name = "catecom", version, about = "Categorize and catalogue computational models")]
struct Cli {
    /// Registry root directory.
    #[arg(long, global = true, env = REGISTRY_ENV)]
    registry: Option<PathBuf>,
    /// JSON list of taxonomy nodes added to the built-in tree.
    #[arg(long, global = true)]
    taxonomy_extra: Option<PathBuf>,
    /// JSON map of flavor id to default parameter values.
    #[arg(long, global = true)]
    flavor_defaults: Option<PathBuf>,
    /// Output format of `export`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Ntriples)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Ntriples,
}

#[derive(Subcommand)]
enum Command {
    /// Check documents; one line per violation.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Derive a category path from model features.
    Classify {
        /// Feature the model has.
        #[arg(long = "feature")]
        features: Vec<Feature>,
        /// Feature the model explicitly lacks.
        #[arg(long = "not-feature")]
        absent: Vec<Feature>,
    },
    /// Build a unit model and print it.
    New(NewArgs),
    /// Chain unit models into a compound model and print it.
    Compose(ComposeArgs),
    /// Print the content fingerprint of a model.
    Fingerprint {
        file: PathBuf,
        #[arg(long)]
        material: Option<String>,
    },
    /// Add a document to the registry and print its id.
    Store {
        file: PathBuf,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        material: Option<String>,
        #[arg(long)]
        reject_duplicates: bool,
    },
    /// List registry ids matching every filter.
    Query(QueryArgs),
    /// Show where a property was recorded along a compound model.
    Trace {
        binding: PathBuf,
        #[arg(long)]
        property: String,
        /// Compound model file; defaults to the registry entry named by the binding.
        #[arg(long)]
        compound: Option<PathBuf>,
        /// Only the last occurrence.
        #[arg(long)]
        last: bool,
    },
    /// Emit RDF triples for a document.
    Export {
        file: PathBuf,
        /// Subject id; defaults to the entity slug.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value = DEFAULT_BASE_IRI)]
        base_iri: String,
    },
}

#[derive(Args)]
struct NewArgs {
    #[arg(long)]
    category: String,
    #[arg(long)]
    name: String,
    #[arg(long)]
    slug: String,
    #[arg(long)]
    flowchart_id: String,
    #[arg(long)]
    functional: Option<String>,
    #[arg(long = "tag")]
    tags: Vec<String>,
    #[arg(long = "modifier")]
    modifiers: Vec<String>,
    #[arg(long = "augmentation")]
    augmentations: Vec<String>,
    #[arg(long = "reference")]
    references: Vec<String>,
    /// Method document attached to the model.
    #[arg(long)]
    method: Option<PathBuf>,
    /// Drop method parameters equal to this flavor's defaults.
    #[arg(long, requires = "method")]
    flavor: Option<String>,
}

#[derive(Args)]
struct ComposeArgs {
    /// Unit model files in chain order.
    #[arg(long = "unit", required = true)]
    units: Vec<PathBuf>,
    /// `flowchartId=workflowUnitId`, once per unit model.
    #[arg(long = "map")]
    mapping: Vec<String>,
    /// Global method document.
    #[arg(long)]
    method: PathBuf,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    slug: Option<String>,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    tag: Vec<String>,
    #[arg(long)]
    category: Vec<String>,
    #[arg(long)]
    slug: Vec<String>,
    #[arg(long)]
    search: Vec<String>,
    /// Generic `key=value` filter.
    #[arg(long = "filter")]
    filters: Vec<String>,
}

/// A failed command: exit code plus message for standard error.
struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl Display) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn domain(message: impl Display) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_entity(path: &Path) -> Result<Entity, Failure> {
    parse_any(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn taxonomy(cli: &Cli) -> Result<TaxonomyTree, Failure> {
    let tree = TaxonomyTree::builtin();
    let Some(path) = &cli.taxonomy_extra else {
        return Ok(tree);
    };
    let ext: Vec<TaxonomyExtension> =
        serde_json::from_slice(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    tree.apply(&ext).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn check_valid(tree: &TaxonomyTree, path: &Path, entity: &Entity) -> Result<(), Failure> {
    let violations = Validator::new(tree).validate(entity);
    if violations.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = violations.iter().map(|v| format!("{}:{v}", path.display())).collect();
    Err(domain(lines.join("\n")))
}

fn registry(cli: &Cli) -> Result<Registry, Failure> {
    let root = cli
        .registry
        .clone()
        .ok_or_else(|| input(format!("no registry: pass --registry or set {REGISTRY_ENV}")))?;
    Registry::open_with(root, taxonomy(cli)?).map_err(registry_failure)
}

fn registry_failure(e: RegistryError) -> Failure {
    match e {
        RegistryError::Io { .. } | RegistryError::Corrupt { .. } => input(e),
        _ => domain(e),
    }
}

fn cmd_validate(cli: &Cli, files: &[PathBuf]) -> Outcome {
    let tree = taxonomy(cli)?;
    let mut files = files.to_vec();
    files.sort();
    let mut code = 0;
    for path in &files {
        let entity = match fs::read(path).map_err(|e| e.to_string()).and_then(|raw| parse_any(&raw).map_err(|e| e.to_string())) {
            Ok(e) => e,
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                code = 2;
                continue;
            }
        };
        for v in Validator::new(&tree).validate(&entity) {
            println!("{}:{v}", path.display());
            code = code.max(1);
        }
    }
    Ok(code)
}

fn cmd_classify(features: &[Feature], absent: &[Feature]) -> Outcome {
    let set: Vec<ModelFeature> = features
        .iter()
        .map(|f| ModelFeature::yes(*f))
        .chain(absent.iter().map(|f| ModelFeature::no(*f)))
        .collect();
    match classify(&set) {
        Ok(path) => {
            println!("{path}");
            Ok(0)
        }
        Err(ClassifyError::NoMatch) => {
            println!("no match");
            Ok(1)
        }
        Err(ClassifyError::Ambiguity { candidates }) => {
            println!("ambiguous: {}", candidates.join(" "));
            Ok(1)
        }
        Err(e @ ClassifyError::Contradiction(_)) => {
            println!("{e}");
            Ok(1)
        }
    }
}

fn flavor(cli: &Cli, id: &str) -> Result<FlavorDefaults, Failure> {
    let path = cli
        .flavor_defaults
        .as_ref()
        .ok_or_else(|| input("--flavor needs --flavor-defaults"))?;
    let raw = String::from_utf8(read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let mut all = parse_flavor_defaults(&raw).map_err(|e| input(format!("{}: {e}", path.display())))?;
    all.remove(id)
        .ok_or_else(|| input(format!("{}: no flavor `{id}`", path.display())))
}

fn method_file(path: &Path) -> Result<catecom_core::Method, Failure> {
    parse_method(&read(path)?).map_err(|e: DocumentError| input(format!("{}: {e}", path.display())))
}

fn cmd_new(cli: &Cli, a: &NewArgs) -> Outcome {
    let tree = taxonomy(cli)?;
    let path = CategoryPath::parse(&a.category).map_err(|e| input(format!("--category: {e}")))?;
    let mut options = BuildOptions::default().tags(a.tags.iter().cloned());
    options.modifiers = a.modifiers.clone();
    options.augmentations = a.augmentations.clone();
    options.references = a.references.clone();
    if let Some(f) = &a.functional {
        options = options.functional(f.clone());
    }
    if let Some(m) = &a.method {
        let mut method = method_file(m)?;
        if let Some(id) = &a.flavor {
            let kept = diff_against_defaults(&method.parameters, &flavor(cli, id)?);
            method.precision.retain(|k| kept.iter().any(|p| &p.key == k));
            method.parameters = kept;
        }
        options = options.method(method);
    }
    let model = build_unit_model(&tree, &path, &a.name, &a.slug, &a.flowchart_id, options).map_err(domain)?;
    println!("{}", serialize_pretty(&model.into()));
    Ok(0)
}

fn cmd_compose(cli: &Cli, a: &ComposeArgs) -> Outcome {
    let tree = taxonomy(cli)?;
    let mut units: Vec<UnitModel> = Vec::new();
    for path in &a.units {
        match read_entity(path)? {
            Entity::Unit(u) => {
                check_valid(&tree, path, &Entity::Unit(u.clone()))?;
                units.push(u);
            }
            other => return Err(input(format!("{}: expected a unit model, found a {}", path.display(), other.kind()))),
        }
    }
    let mut mapping = Vec::new();
    for m in &a.mapping {
        let (fid, wu) = m
            .split_once('=')
            .ok_or_else(|| input(format!("--map `{m}`: expected flowchartId=workflowUnitId")))?;
        mapping.push((fid.to_string(), wu.to_string()));
    }
    let mut cm = compose_compound_model(units, mapping, method_file(&a.method)?).map_err(domain)?;
    if let Some(name) = &a.name {
        cm.extras.insert("name".into(), name.clone().into());
    }
    if let Some(slug) = &a.slug {
        cm.extras.insert("slug".into(), slug.clone().into());
    }
    let entity = Entity::Compound(cm);
    check_valid(&tree, Path::new("<compound>"), &entity)?;
    println!("{}", serialize_pretty(&entity));
    Ok(0)
}

fn cmd_fingerprint(cli: &Cli, file: &Path, material: Option<&str>) -> Outcome {
    let tree = taxonomy(cli)?;
    let entity = read_entity(file)?;
    check_valid(&tree, file, &entity)?;
    println!("{}", fingerprint(&entity, material).digest);
    Ok(0)
}

fn cmd_store(cli: &Cli, file: &Path, id: Option<&str>, material: Option<&str>, reject: bool) -> Outcome {
    let entity = read_entity(file)?;
    let mut reg = registry(cli)?;
    reg.set_policy(if reject { DuplicatePolicy::Reject } else { DuplicatePolicy::Warn });
    let out = reg.store(&entity, id, material).map_err(registry_failure)?;
    reg.flush().map_err(registry_failure)?;
    if let Some(existing) = &out.duplicate_of {
        eprintln!("warning: same fingerprint as `{existing}`");
    }
    println!("{}", out.id);
    Ok(0)
}

fn cmd_query(cli: &Cli, a: &QueryArgs) -> Outcome {
    let mut filters = Vec::new();
    let pairs = [("tag", &a.tag), ("category", &a.category), ("slug", &a.slug), ("search", &a.search)];
    for (key, values) in pairs {
        for v in values {
            filters.push(Filter::from_parts(key, v).map_err(registry_failure)?);
        }
    }
    for f in &a.filters {
        filters.push(Filter::parse(f).map_err(registry_failure)?);
    }
    let reg = registry(cli)?;
    for id in reg.query(&filters) {
        println!("{id}");
    }
    Ok(0)
}

fn print_record(r: &PropertyRecord) {
    let kind = serde_json::to_value(r.kind).expect("kind serializes");
    println!(
        "{}\t{}\t{}\t{}",
        r.order,
        r.source_flowchart_id,
        r.source_workflow_unit_id,
        kind.as_str().unwrap_or_default()
    );
}

fn cmd_trace(cli: &Cli, binding: &Path, property: &str, compound: Option<&Path>, last: bool) -> Outcome {
    let doc: BindingDocument =
        serde_json::from_slice(&read(binding)?).map_err(|e| input(format!("{}: {e}", binding.display())))?;
    let entity = match compound {
        Some(p) => read_entity(p)?,
        None => registry(cli)?
            .load_entity(&doc.compound_model_ref)
            .map_err(registry_failure)?,
    };
    let Entity::Compound(cm) = entity else {
        return Err(input(format!("`{}` is not a compound model", doc.compound_model_ref)));
    };
    let b = InteropBinding::from_document(doc, cm).map_err(domain)?;
    if last {
        if let Some(r) = b.last_occurrence(property) {
            print_record(r);
        }
    } else {
        for r in b.property_trace(property) {
            print_record(r);
        }
    }
    Ok(0)
}

fn cmd_export(cli: &Cli, file: &Path, id: Option<&str>, base_iri: &str) -> Outcome {
    let tree = taxonomy(cli)?;
    let entity = read_entity(file)?;
    check_valid(&tree, file, &entity)?;
    let id = id.map(str::to_string).unwrap_or_else(|| default_subject_id(&entity));
    let triples = export_triples(&entity, &id, base_iri);
    match cli.format {
        Format::Ntriples => print!("{}", to_ntriples(&triples)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&triples).expect("triples serialize")),
    }
    Ok(0)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { files } => cmd_validate(cli, files),
        Command::Classify { features, absent } => cmd_classify(features, absent),
        Command::New(a) => cmd_new(cli, a),
        Command::Compose(a) => cmd_compose(cli, a),
        Command::Fingerprint { file, material } => cmd_fingerprint(cli, file, material.as_deref()),
        Command::Store {
            file,
            id,
            material,
            reject_duplicates,
        } => cmd_store(cli, file, id.as_deref(), material.as_deref(), *reject_duplicates),
        Command::Query(a) => cmd_query(cli, a),
        Command::Trace {
            binding,
            property,
            compound,
            last,
        } => cmd_trace(cli, binding, property, compound.as_deref(), *last),
        Command::Export { file, id, base_iri } => cmd_export(cli, file, id.as_deref(), base_iri),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
