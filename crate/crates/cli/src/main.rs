use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cyclopair::cohomology::{
    build_cohomology, classify_demuskin, dims_closed_form, log_level_direct, log_level_recursive, CohomologyError,
};
use cyclopair::field::{
    check_pairing_match, o_membership, parse_element, total_rigidity, trichotomic_search, FieldError, FieldModel,
    HSpec, OTarget,
};
use cyclopair::oracle::{self, CentralExtension, FiniteGroup, OracleError};
use cyclopair::pair::divisors_json;
use cyclopair::rigidity::{rigidity_report, RigidityError};
use cyclopair::units::UnitError;
use cyclopair::{parse_pair, Ambient, PairError, PairExpr};

#[derive(Parser, Debug)]
#[command(name = "cyclopair", version, about = "Cyclotomic pro-p pairs, their cohomology and field models")]
struct Cli {
    /// The prime p.
    #[arg(long, global = true, default_value_t = 2)]
    p: u64,
    /// p-adic precision K (digits), at least 8.
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u32).range(8..))]
    precision: u32,
    /// Truncation degree D of cohomology rings, at least 2.
    #[arg(long = "max-degree", global = true, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..))]
    max_degree: u64,
    /// Search bound for enumerations.
    #[arg(long, global = true, default_value_t = 4096)]
    bound: u64,
    /// Field model: a JSON file path or inline JSON.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug)]
struct ExprInput {
    /// Pair expression, e.g. "ext(1, E)" or "padic(n=3, case=II, f=2)".
    expr: Option<String>,
    /// Read the expression from a file instead.
    #[arg(long)]
    file: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse an expression and print its tree.
    Parse(ExprInput),
    /// Canonical normal form.
    Normalize(ExprInput),
    /// Rank, abelianization and logarithmic level.
    Invariants(ExprInput),
    /// Truncated cohomology ring.
    Cohom(ExprInput),
    /// Demuškin test and classification.
    Demuskin(ExprInput),
    /// Logarithmic level, recursively and from ε-powers.
    Logl(ExprInput),
    /// Rigid classes of H^1 and the extension checks.
    Rigid(ExprInput),
    /// Computations in a field model (needs --model).
    #[command(subcommand)]
    Field(FieldCommand),
    /// Brute-force cohomology of small finite groups.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand, Debug)]
enum FieldCommand {
    /// Basis of F^×/(F^×)^p.
    Classgroup,
    /// Class of an element.
    Class { a: String },
    /// Symbol {a, b}.
    Symbol { a: String, b: String },
    /// Compare the symbol map with the cup product of a pair (default: the predicted pair).
    Pairing { expr: Option<String> },
    /// Predicted Galois pair.
    Predict,
    /// Search b with {a,b} = {a,1-b} = {a,1-1/b} = 0.
    Trichotomic { a: String },
    /// Membership in O^-, O^+ or O for S = (F^×)^p.
    Omember {
        a: String,
        #[arg(long, value_enum, default_value_t = TargetArg::Ominus)]
        target: TargetArg,
        /// Generators of H over (F^×)^p, comma separated (default: all of F^×).
        #[arg(long)]
        h: Option<String>,
    },
    /// Total rigidity of (F^×)^p within the search bound.
    Rigidity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Ominus,
    Oplus,
    O,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// dim H^1(G, F_p) and a basis of Hom(G, F_p).
    H1 { group: String },
    /// dim H^2(G, F_p).
    H2 { group: String },
    /// Class of φ ∪ ψ for homomorphisms given by their values on all elements.
    Cup {
        group: String,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
    },
    /// Class of a central extension with kernel of order p.
    Extclass {
        /// The total group.
        total: String,
        /// The quotient group.
        quotient: String,
        /// Kernel generator (index or label in the total group).
        #[arg(long)]
        kernel: String,
        /// Image of each element of the total group, comma separated.
        #[arg(long)]
        map: String,
    },
}

/// Exit 1 for bad input, 2 for failures of the computation itself.
enum CliError {
    Validation(String),
    Internal(String),
}

impl From<PairError> for CliError {
    fn from(e: PairError) -> Self {
        match e {
            PairError::Unit(u) => u.into(),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<UnitError> for CliError {
    fn from(e: UnitError) -> Self {
        match e {
            UnitError::PrecisionExhausted { .. } => CliError::Internal(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<CohomologyError> for CliError {
    fn from(e: CohomologyError) -> Self {
        match e {
            CohomologyError::Unit(u) => u.into(),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<RigidityError> for CliError {
    fn from(e: RigidityError) -> Self {
        match e {
            RigidityError::Cohomology(c) => c.into(),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::PrecisionExhausted(_) => CliError::Internal(e.to_string()),
            FieldError::Unit(u) => u.into(),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Validation(e.to_string())
    }
}

struct Ctx {
    amb: Ambient,
    max_degree: usize,
    bound: u64,
    model: Option<String>,
}

impl Ctx {
    fn expr(&self, input: &ExprInput) -> Result<PairExpr, CliError> {
        let text = match (&input.expr, &input.file) {
            (Some(t), None) => t.clone(),
            (None, Some(path)) => {
                fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?
            }
            (Some(_), Some(_)) => return Err(CliError::Validation("give the expression or --file, not both".into())),
            (None, None) => return Err(CliError::Validation("missing expression (positional or --file)".into())),
        };
        let e = parse_pair(text.trim(), &self.amb)?;
        e.validate(&self.amb)?;
        Ok(e)
    }

    fn model(&self) -> Result<FieldModel, CliError> {
        let Some(m) = &self.model else {
            return Err(CliError::Validation("this command needs --model".into()));
        };
        let text = if m.trim_start().starts_with('{') {
            m.clone()
        } else {
            fs::read_to_string(m).map_err(|e| CliError::Validation(format!("cannot read {m}: {e}")))?
        };
        Ok(FieldModel::from_json(&text, self.amb.p)?)
    }
}

fn group_or_file(spec: &str) -> Result<FiniteGroup, CliError> {
    let t = spec.trim();
    if t.ends_with(".json") {
        let text = fs::read_to_string(t).map_err(|e| CliError::Validation(format!("cannot read {t}: {e}")))?;
        return Ok(FiniteGroup::from_spec(&text)?);
    }
    Ok(FiniteGroup::from_spec(t)?)
}

fn int_list(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| CliError::Validation(format!("'{s}' is not a nonnegative integer"))))
        .collect()
}

fn run_expr(cmd: &Command, ctx: &Ctx) -> Result<Value, CliError> {
    let amb = &ctx.amb;
    Ok(match cmd {
        Command::Parse(input) => {
            let e = ctx.expr(input)?;
            json!({"expr": e.render(), "tree": e.to_json()})
        }
        Command::Normalize(input) => {
            let n = ctx.expr(input)?.normalize(amb)?;
            json!({"normalForm": n.render(), "tree": n.to_json()})
        }
        Command::Invariants(input) => {
            let e = ctx.expr(input)?;
            json!({
                "rank": e.rank(),
                "abelianization": divisors_json(&e.abelianization(amb)?),
                "logl": log_level_recursive(&e, amb).to_json(),
            })
        }
        Command::Cohom(input) => {
            let e = ctx.expr(input)?;
            let ga = build_cohomology(&e, amb, ctx.max_degree)?;
            let mut v = ga.to_json();
            v["closedForm"] = json!(dims_closed_form(&e, ctx.max_degree));
            v
        }
        Command::Demuskin(input) => {
            let e = ctx.expr(input)?;
            serde_json::to_value(classify_demuskin(&e, amb)?).map_err(|e| CliError::Internal(e.to_string()))?
        }
        Command::Logl(input) => {
            let e = ctx.expr(input)?;
            json!({
                "recursive": log_level_recursive(&e, amb).to_json(),
                "direct": log_level_direct(&e, amb, ctx.max_degree)?.to_json(),
                "maxDegree": ctx.max_degree,
            })
        }
        Command::Rigid(input) => {
            let e = ctx.expr(input)?;
            serde_json::to_value(rigidity_report(&e, amb, ctx.bound)?).map_err(|e| CliError::Internal(e.to_string()))?
        }
        Command::Field(fc) => run_field(fc, ctx)?,
        Command::Oracle(oc) => run_oracle(oc, amb.p)?,
    })
}

fn run_field(cmd: &FieldCommand, ctx: &Ctx) -> Result<Value, CliError> {
    let model = ctx.model()?;
    let elem = |t: &str| parse_element(&model, t).map_err(CliError::from);
    let bound = ctx.bound as usize;
    Ok(match cmd {
        FieldCommand::Classgroup => json!({
            "model": model.name(),
            "dim": model.class_dim(),
            "basis": model.class_labels(),
            "symbolDim": model.symbol_dim(),
        }),
        FieldCommand::Class { a } => {
            let x = elem(a)?;
            json!({"a": model.render(&x), "class": model.class_of(&x)?, "basis": model.class_labels()})
        }
        FieldCommand::Symbol { a, b } => {
            let (x, y) = (elem(a)?, elem(b)?);
            json!({
                "a": model.render(&x),
                "b": model.render(&y),
                "symbol": model.symbol(&x, &y)?,
            })
        }
        FieldCommand::Pairing { expr } => {
            let e = match expr {
                Some(t) => {
                    let e = parse_pair(t, &ctx.amb)?;
                    e.validate(&ctx.amb)?;
                    e
                }
                None => model.predict_galois_pair(ctx.amb.precision)?,
            };
            json!({
                "model": model.name(),
                "pair": e.render(),
                "matches": check_pairing_match(&model, &e, &ctx.amb, ctx.bound)?,
            })
        }
        FieldCommand::Predict => {
            let e = model.predict_galois_pair(ctx.amb.precision)?;
            json!({"model": model.name(), "pair": e.render(), "tree": e.to_json()})
        }
        FieldCommand::Trichotomic { a } => {
            let x = elem(a)?;
            let mut v = trichotomic_search(&model, &x, bound)?.to_json(&model);
            v["a"] = json!(model.render(&x));
            v
        }
        FieldCommand::Omember { a, target, h } => {
            let x = elem(a)?;
            let h = match h {
                None => HSpec::All,
                Some(gens) => {
                    let gens = gens.split(',').map(|g| elem(g.trim())).collect::<Result<Vec<_>, _>>()?;
                    HSpec::generated_by(&model, &gens)?
                }
            };
            let target = match target {
                TargetArg::Ominus => OTarget::OMinus,
                TargetArg::Oplus => OTarget::OPlus,
                TargetArg::O => OTarget::ORing,
            };
            serde_json::to_value(o_membership(&model, &x, &h, target, bound)?)
                .map_err(|e| CliError::Internal(e.to_string()))?
        }
        FieldCommand::Rigidity => total_rigidity(&model, bound, ctx.bound)?.to_json(&model),
    })
}

fn run_oracle(cmd: &OracleCommand, p: u64) -> Result<Value, CliError> {
    Ok(match cmd {
        OracleCommand::H1 { group } => {
            let g = group_or_file(group)?;
            let basis = oracle::h1_basis(&g, p)?;
            json!({"order": g.order(), "p": p, "h1Dim": basis.len(), "basis": basis, "labels": g.labels()})
        }
        OracleCommand::H2 { group } => {
            let g = group_or_file(group)?;
            json!({"order": g.order(), "p": p, "h2Dim": oracle::h2_dim(&g, p)?})
        }
        OracleCommand::Cup { group, phi, psi } => {
            let g = group_or_file(group)?;
            let h = oracle::h2(&g, p)?;
            let class = oracle::cup_h1h1(&g, &h, &int_list(phi)?, &int_list(psi)?)?;
            let zero = class.iter().all(|&x| x == 0);
            json!({"h2Dim": h.dim(), "class": class, "isZero": zero})
        }
        OracleCommand::Extclass { total, quotient, kernel, map } => {
            let t = group_or_file(total)?;
            let q = group_or_file(quotient)?;
            let z = match kernel.parse::<usize>() {
                Ok(i) => i,
                Err(_) => t
                    .index_of(kernel)
                    .ok_or_else(|| CliError::Validation(format!("no element labelled '{kernel}'")))?,
            };
            let map: Vec<usize> = int_list(map)?.into_iter().map(|x| x as usize).collect();
            let ext = CentralExtension { total: &t, quotient: &q, kernel_generator: z, map: &map };
            let kp = ext.validate()?;
            if kp != p {
                return Err(CliError::Validation(format!("kernel has order {kp}, but --p is {p}")));
            }
            let h = oracle::h2(&q, p)?;
            let class = oracle::extension_class(&ext, &h, None)?;
            let zero = class.iter().all(|&x| x == 0);
            json!({"h2Dim": h.dim(), "class": class, "isZero": zero})
        }
    })
}

fn render_table(v: &Value) -> String {
    match v {
        Value::Object(map) => map
            .iter()
            .map(|(k, x)| format!("{k:<16} {}", if x.is_string() { x.as_str().unwrap_or_default().to_string() } else { x.to_string() }))
            .collect::<Vec<_>>()
            .join("\n"),
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let amb = match Ambient::new(cli.p, cli.precision) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let ctx = Ctx { amb, max_degree: cli.max_degree as usize, bound: cli.bound, model: cli.model.clone() };
    match run_expr(&cli.command, &ctx) {
        Ok(v) => {
            match cli.format {
                Format::Json => println!("{v}"),
                Format::Table => println!("{}", render_table(&v)),
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
