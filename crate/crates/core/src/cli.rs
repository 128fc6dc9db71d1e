//! The `sofic` command line.
//!
//! Exit codes: 0 success (or no witness), 1 usage or input error, 2 closure
//! witness found, 3 certificate refuted.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_rational::Rational64;

use crate::almosthom::{
    ahom_to_separating, identity_embedding, iterate_amplify, separating_to_ahom, AlmostHom, DEFAULT_DEGREE_CAP,
};
use crate::catalog::{self, NILPOTENT_16, NILPOTENT_16_SET};
use crate::conjgraph::{graph_norm, ConjGraph};
use crate::error::{Error, Result};
use crate::groups::{Caps, FiniteGroup, SymmetricAction};
use crate::metrics::{parse_rational, verify_norm_axioms, CharacterData, Norm, NormValue, NormedGroup};
use crate::separability::{
    check_separation, closure_search, parse_mode, profinite_nonmember_certificate, stabilization, CatalogEntry,
    ClosureProblem, NOracle, NonmemberCertificate,
};
use crate::words::{GenImages, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_WITNESS: i32 = 2;
pub const EXIT_REFUTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sofic", version, about = "Bi-invariant norms, conjugacy graphs, almost-homomorphisms and closure experiments on finite groups")]
pub struct Cli {
    /// Directory searched for group files `<name>`, `<name>.tbl`, `<name>.perm`
    #[arg(long, global = true, value_name = "PATH")]
    pub catalog: Option<PathBuf>,
    /// Seed for sampled modes; required whenever sampling
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Search mode: exhaustive or sampled:<count>
    #[arg(long, global = true, value_name = "MODE")]
    pub mode: Option<String>,
    /// Write output here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Cap on group order for closures and tables
    #[arg(long = "cap-order", global = true, value_name = "M")]
    pub cap_order: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bi-invariant norm of a finite group: the normalised Hamming norm, the
    /// character norm sqrt((2 chi(e) - 2 Re chi(g)) / chi(e)), or the
    /// conjugacy-graph norm ||.||_C, with the five norm axioms checked.
    Norm(NormArgs),
    /// The conjugacy-class graph Gamma(G, C): vertices are classes, with an
    /// edge x -- y when x lies in c y for some c in C.
    Conjgraph(ConjgraphArgs),
    /// Amplification of an almost-homomorphism into S_n by a -> phi(a) x phi(a)
    /// in S_n x S_n < S_{n^2}, iterated until the margin reaches a target.
    Amplify(AmplifyArgs),
    /// Checks whether a map into S_n is a (Phi, eps, alpha)-homomorphism:
    /// measured defect below eps, margin above alpha, identity to identity.
    #[command(name = "ahom-check")]
    AhomCheck(AhomCheckArgs),
    /// Checks (r, eps, delta)-separation of N = ker(F -> Q) by a homomorphism
    /// F -> H, optionally passing through the almost-homomorphism of F/N and
    /// back.
    Separate(SeparateArgs),
    /// Searches homomorphisms F -> H over a catalog for one under which w
    /// leaves the product of the image classes of g_1, ..., g_k, which would
    /// place w outside the profinite closure of [g_1]^F ... [g_k]^F.
    Closure(ClosureArgs),
    /// Stabilisation of S^n for S = [g_1][g_1^-1] ... [g_k][g_k^-1], compared
    /// with the symmetrised union and with the normal closure.
    Stabilize(StabilizeArgs),
    /// Replays a profinite non-membership certificate: exit 0 if valid, 3 if
    /// refuted.
    #[command(name = "verify-certificate")]
    VerifyCertificate(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Builtin name (S<n>, Q8, D4, ...) or group file
    pub group: String,
    /// hamming, character, graph or zero
    pub kind: String,
    /// Generating classes for the graph norm, by label
    #[arg(long, num_args = 1.., value_name = "LABEL")]
    pub classes: Vec<String>,
    /// Scale factor for the graph norm
    #[arg(long, value_name = "P/Q")]
    pub scale: Option<String>,
    /// Character file for the character norm (default: fixed-point character)
    #[arg(long, value_name = "PATH")]
    pub character: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConjgraphArgs {
    pub group: String,
    /// Generating class labels
    pub classes: Vec<String>,
    /// Emit DOT instead of an edge list
    #[arg(long)]
    pub dot: bool,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// Permutation group whose inclusion into S_n is the starting map
    pub group: String,
    /// Redefine one image, as "<element>=<image>", e.g. "(1 2)=(1 3)"
    #[arg(long, value_name = "A=B")]
    pub corrupt: Vec<String>,
}

#[derive(Debug, Args)]
pub struct AmplifyArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Target margin, below 1
    #[arg(long, value_name = "P/Q")]
    pub target: String,
    #[arg(long = "degree-cap", default_value_t = DEFAULT_DEGREE_CAP)]
    pub degree_cap: usize,
}

#[derive(Debug, Args)]
pub struct AhomCheckArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Defect thresholds, paired in order with --alpha
    #[arg(long, required = true, value_name = "P/Q")]
    pub eps: Vec<String>,
    /// Margin thresholds
    #[arg(long, required = true, value_name = "P/Q")]
    pub alpha: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SeparateArgs {
    /// Target group H
    pub group: String,
    /// Images of x_1, ..., x_n in H
    #[arg(long, num_args = 1.., required = true)]
    pub images: Vec<String>,
    /// Quotient Q with N = ker(F -> Q); defaults to H with the same images
    #[arg(long)]
    pub quotient: Option<String>,
    #[arg(long = "quotient-images", num_args = 1..)]
    pub quotient_images: Vec<String>,
    /// Norm on H: hamming, graph or zero
    #[arg(long, default_value = "hamming")]
    pub norm: String,
    /// Generating classes when the norm is graph
    #[arg(long, num_args = 1..)]
    pub classes: Vec<String>,
    #[arg(long)]
    pub radius: usize,
    #[arg(long, value_name = "P/Q")]
    pub eps: String,
    #[arg(long, value_name = "P/Q")]
    pub delta: String,
    /// Also restrict to an almost-homomorphism of F/N and extend back
    #[arg(long = "via-ahom")]
    pub via_ahom: bool,
}

#[derive(Debug, Args)]
pub struct ClosureArgs {
    /// Experiment config file
    pub config: PathBuf,
    /// Where to write a certificate if a witness is found
    #[arg(long, value_name = "PATH")]
    pub certificate: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilizeArgs {
    pub group: String,
    /// Elements g_1, ..., g_k
    #[arg(required = true)]
    pub elements: Vec<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub certificate: PathBuf,
}

struct Ctx {
    catalog: Option<PathBuf>,
    caps: Caps,
    seed: Option<u64>,
    mode: Option<String>,
}

impl Ctx {
    fn group(&self, reference: &str) -> Result<FiniteGroup> {
        if let Some(dir) = &self.catalog {
            for name in [reference.to_string(), format!("{reference}.tbl"), format!("{reference}.perm")] {
                let p = dir.join(&name);
                if p.is_file() {
                    return catalog::load_group(&p, self.caps);
                }
            }
        }
        let mut found = catalog::resolve(reference, self.caps)?;
        if found.len() != 1 {
            return Err(Error::Malformed(format!("{reference} names a set of groups, not one group")));
        }
        Ok(found.remove(0))
    }

    fn entries(&self, reference: &str) -> Vec<CatalogEntry> {
        let refs: Vec<String> = if reference == NILPOTENT_16_SET {
            NILPOTENT_16.iter().map(|s| s.to_string()).collect()
        } else {
            vec![reference.to_string()]
        };
        refs.into_iter()
            .map(|r| match self.group(&r) {
                Ok(g) => CatalogEntry::Loaded(g),
                Err(e) => CatalogEntry::Unavailable { reference: r, reason: e.to_string() },
            })
            .collect()
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((text, code)) => match emit(cli.out.as_deref(), &text) {
            Ok(()) => code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<(String, i32)> {
    let caps = match cli.cap_order {
        Some(m) => Caps { perm_closure: m, table_order: m },
        None => Caps::default(),
    };
    let ctx = Ctx { catalog: cli.catalog.clone(), caps, seed: cli.seed, mode: cli.mode.clone() };
    match &cli.command {
        Command::Norm(a) => cmd_norm(&ctx, a).map(|s| (s, EXIT_OK)),
        Command::Conjgraph(a) => cmd_conjgraph(&ctx, a).map(|s| (s, EXIT_OK)),
        Command::Amplify(a) => cmd_amplify(&ctx, a).map(|s| (s, EXIT_OK)),
        Command::AhomCheck(a) => cmd_ahom_check(&ctx, a).map(|s| (s, EXIT_OK)),
        Command::Separate(a) => cmd_separate(&ctx, a).map(|s| (s, EXIT_OK)),
        Command::Closure(a) => cmd_closure(&ctx, a),
        Command::Stabilize(a) => cmd_stabilize(&ctx, a).map(|s| (s, EXIT_OK)),
        Command::VerifyCertificate(a) => cmd_verify(&ctx, a),
    }
}

fn class_ids(g: &FiniteGroup, labels: &[String]) -> Result<Vec<usize>> {
    let p = g.classes();
    labels
        .iter()
        .map(|l| p.find(l).ok_or_else(|| Error::Malformed(format!("unknown class label {l:?} in {}", g.label()))))
        .collect()
}

fn fixed_point_character(g: &FiniteGroup) -> Result<CharacterData> {
    let p = g.classes();
    if g.degree().is_none() {
        return Err(Error::WrongTarget(format!("{} is not a permutation group; pass --character", g.label())));
    }
    let chi = (0..p.num_classes())
        .map(|c| Complex64::new(g.perm(p.rep(c)).expect("perm").fixed_points() as f64, 0.0))
        .collect();
    CharacterData::new("fixed-point", chi)
}

fn build_norm(g: &FiniteGroup, kind: &str, classes: &[String], scale: Option<&str>, character: Option<&Path>) -> Result<Norm> {
    match kind {
        "hamming" => Norm::hamming(g),
        "zero" => Ok(Norm::zero(g)),
        "character" => {
            let cd = match character {
                Some(path) => CharacterData::parse(&std::fs::read_to_string(path)?)?,
                None => fixed_point_character(g)?,
            };
            Norm::character(g, &cd)
        }
        "graph" => {
            let ids = class_ids(g, classes)?;
            let eps = scale.map(parse_rational).transpose()?.unwrap_or(Rational64::from_integer(1));
            if eps <= Rational64::from_integer(0) {
                return Err(Error::Malformed(format!("scale must be positive, got {eps}")));
            }
            graph_norm(g, &ids)?.to_norm(g, eps)
        }
        other => Err(Error::Malformed(format!("unknown norm kind {other:?}; expected hamming, character, graph or zero"))),
    }
}

fn cmd_norm(ctx: &Ctx, a: &NormArgs) -> Result<String> {
    let g = ctx.group(&a.group)?;
    let norm = build_norm(&g, &a.kind, &a.classes, a.scale.as_deref(), a.character.as_deref())?;
    let p = g.classes();
    let mut s = format!("norm {} on {} (order {}, {} classes)\n", norm.label(), g.label(), g.order(), p.num_classes());
    let rows: Vec<[String; 4]> = (0..p.num_classes())
        .map(|c| [p.label(c).to_string(), p.size(c).to_string(), g.element_label(p.rep(c)), norm.class_value(c).to_string()])
        .collect();
    let header = ["class", "size", "representative", "value"].map(String::from);
    let widths: Vec<usize> = (0..4).map(|i| rows.iter().chain([&header]).map(|r| r[i].len()).max().unwrap_or(0)).collect();
    for r in std::iter::once(&header).chain(&rows) {
        let cells: Vec<String> = (0..4).map(|i| format!("{:<w$}", r[i], w = widths[i])).collect();
        let _ = writeln!(s, "{}", cells.join("  ").trim_end());
    }
    let report = verify_norm_axioms(&g, &norm.element_values());
    s.push_str(&report.to_string());
    let _ = writeln!(s, "axioms: {}", if report.all_pass() { "all pass" } else { "FAILED" });
    Ok(s)
}

fn cmd_conjgraph(ctx: &Ctx, a: &ConjgraphArgs) -> Result<String> {
    let g = ctx.group(&a.group)?;
    let ids = class_ids(&g, &a.classes)?;
    let graph = ConjGraph::build(&g, &ids)?;
    if a.dot {
        return Ok(graph.to_dot(&format!("Gamma({}, {{{}}})", g.label(), a.classes.join(", "))));
    }
    Ok(graph.edge_list())
}

fn build_map(ctx: &Ctx, a: &MapArgs) -> Result<(FiniteGroup, AlmostHom<SymmetricAction>)> {
    let g = ctx.group(&a.group)?;
    let mut ah = identity_embedding(&g)?;
    let n = g.degree().expect("perm group");
    for spec in &a.corrupt {
        let (lhs, rhs) = spec
            .split_once('=')
            .ok_or_else(|| Error::Malformed(format!("--corrupt expects <element>=<image>, got {spec:?}")))?;
        let i = g.parse_element(lhs)?;
        if i == 0 {
            return Err(Error::Malformed("the identity cannot be corrupted".into()));
        }
        ah.set_image(i, crate::groups::Perm::parse_cycles(rhs.trim(), n)?);
    }
    Ok((g, ah))
}

fn cmd_amplify(ctx: &Ctx, a: &AmplifyArgs) -> Result<String> {
    let (g, ah) = build_map(ctx, &a.map)?;
    let target = parse_rational(&a.target)?;
    let run = iterate_amplify(&ah, target, a.degree_cap)?;
    Ok(format!("amplifying {} into S{} toward margin {target}\n{run}", g.label(), ah.target().degree))
}

fn cmd_ahom_check(ctx: &Ctx, a: &AhomCheckArgs) -> Result<String> {
    if a.eps.len() != a.alpha.len() {
        return Err(Error::Malformed(format!("{} --eps values but {} --alpha values", a.eps.len(), a.alpha.len())));
    }
    let (_, ah) = build_map(ctx, &a.map)?;
    let thresholds = a
        .eps
        .iter()
        .zip(&a.alpha)
        .map(|(e, al)| Ok((NormValue::Exact(parse_rational(e)?), NormValue::Exact(parse_rational(al)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ah.report(&thresholds)?.to_string())
}

fn parse_images(g: &FiniteGroup, texts: &[String]) -> Result<GenImages<usize>> {
    GenImages::new(texts.iter().map(|t| g.parse_element(t)).collect::<Result<Vec<_>>>()?)
}

fn cmd_separate(ctx: &Ctx, a: &SeparateArgs) -> Result<String> {
    let h = ctx.group(&a.group)?;
    let gi = parse_images(&h, &a.images)?;
    let q_owned;
    let (q, qi) = match &a.quotient {
        Some(name) => {
            q_owned = ctx.group(name)?;
            let qi = parse_images(&q_owned, &a.quotient_images)?;
            (&q_owned, qi)
        }
        None => (&h, gi.clone()),
    };
    let oracle = NOracle::new(q, qi)?;
    let norm = build_norm(&h, &a.norm, &a.classes, None, None)?;
    let target = NormedGroup { group: &h, norm: &norm };
    let eps = NormValue::Exact(parse_rational(&a.eps)?);
    let delta = NormValue::Exact(parse_rational(&a.delta)?);
    let verdict = check_separation(&target, &gi, &oracle, a.radius, eps, delta)?;
    let mut s = format!("separation of ker(F -> {}) by F -> {} with {}\n{verdict}", q.label(), h.label(), norm.label());
    if a.via_ahom {
        let cah = separating_to_ahom(target, &gi, &oracle, a.radius, eps, delta)?;
        let _ = writeln!(s, "restriction to the cosets of the radius-{} ball:", a.radius);
        s.push_str(&cah.ah.is_ahom(eps, delta)?.to_string());
        let cert = ahom_to_separating(&cah, &oracle, a.radius)?;
        let imgs: Vec<String> = cert.hom.images().iter().map(|&x| h.element_label(x)).collect();
        let _ = writeln!(s, "extended homomorphism: {}", imgs.join(", "));
        s.push_str(&cert.to_string());
        let back = check_separation(&target, &cert.hom, &oracle, a.radius, eps, delta)?;
        let _ = write!(s, "extended homomorphism re-checked:\n{back}");
    }
    Ok(s)
}

/// A parsed experiment config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub rank: usize,
    pub g_words: Vec<String>,
    pub w: String,
    pub catalog: Vec<String>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub run_id: Option<String>,
}

impl RunConfig {
    /// Lines `rank`, `g`, `w`, `catalog`, `mode`, `seed`, `run-id`; `#`
    /// starts a comment.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let (mut rank, mut g_words, mut w, mut cat, mut mode, mut seed, mut run_id) =
            (None, Vec::new(), None, Vec::new(), None, None, None);
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (key, value) = l.split_once(char::is_whitespace).map_or((l, ""), |(k, v)| (k, v.trim()));
            let err = |msg: String| Error::Parse { line, msg };
            if value.is_empty() {
                return Err(err(format!("field {key:?} needs a value")));
            }
            match key {
                "rank" => {
                    let r: usize = value.parse().map_err(|_| err(format!("rank: expected a positive integer, got {value:?}")))?;
                    if r == 0 {
                        return Err(err("rank: must be positive".into()));
                    }
                    rank = Some(r);
                }
                "g" => g_words.push((line, value.to_string())),
                "w" => w = Some((line, value.to_string())),
                "catalog" => cat.extend(value.split_whitespace().map(str::to_string)),
                "mode" => mode = Some(value.to_string()),
                "seed" => seed = Some(value.parse().map_err(|_| err(format!("seed: expected an unsigned 64-bit integer, got {value:?}")))?),
                "run-id" => run_id = Some(value.to_string()),
                other => return Err(err(format!("unknown field {other:?}"))),
            }
        }
        let end = last_line.max(1);
        let rank = rank.ok_or(Error::Parse { line: end, msg: "missing field \"rank\"".into() })?;
        let (wl, w) = w.ok_or(Error::Parse { line: end, msg: "missing field \"w\"".into() })?;
        for (line, text) in g_words.iter().chain([&(wl, w.clone())]) {
            Word::parse(text, rank).map_err(|e| Error::Parse { line: *line, msg: format!("word {text:?}: {e}") })?;
        }
        if cat.is_empty() {
            return Err(Error::Parse { line: end, msg: "missing field \"catalog\"".into() });
        }
        Ok(RunConfig { rank, g_words: g_words.into_iter().map(|(_, t)| t).collect(), w, catalog: cat, mode, seed, run_id })
    }

    pub fn problem(&self) -> Result<ClosureProblem> {
        let g = self.g_words.iter().map(|t| Word::parse(t, self.rank)).collect::<Result<Vec<_>>>()?;
        ClosureProblem::new(g, Word::parse(&self.w, self.rank)?)
    }
}

fn cmd_closure(ctx: &Ctx, a: &ClosureArgs) -> Result<(String, i32)> {
    let text = std::fs::read_to_string(&a.config).map_err(|e| Error::Io(format!("{}: {e}", a.config.display())))?;
    let cfg = RunConfig::parse(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Malformed(format!("{}:{line}: {msg}", a.config.display())),
        other => other,
    })?;
    let problem = cfg.problem()?;
    let seed = ctx.seed.or(cfg.seed);
    let mode_text = ctx.mode.clone().or(cfg.mode.clone()).unwrap_or_else(|| "exhaustive".into());
    let mode = parse_mode(&mode_text, seed)?;
    let entries: Vec<CatalogEntry> = cfg.catalog.iter().flat_map(|r| ctx.entries(r)).collect();
    let outcome = closure_search(&problem, &entries, mode, cfg.run_id.as_deref())?;
    let log = outcome.to_json_lines();
    match &outcome.witness {
        None => Ok((log, EXIT_OK)),
        Some(w) => {
            if let Some(path) = &a.certificate {
                let CatalogEntry::Loaded(g) = &entries[w.group_index] else { unreachable!("witness from a loaded group") };
                let cert = profinite_nonmember_certificate(&problem, g.clone(), w.hom.clone())?;
                std::fs::write(path, cert.to_text()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            Ok((log, EXIT_WITNESS))
        }
    }
}

fn cmd_stabilize(ctx: &Ctx, a: &StabilizeArgs) -> Result<String> {
    let g = ctx.group(&a.group)?;
    let elems = a.elements.iter().map(|t| g.parse_element(t)).collect::<Result<Vec<_>>>()?;
    let rep = stabilization(&g, &elems)?;
    Ok(format!("stabilization in {} for {}\n{rep}", g.label(), a.elements.join(", ")))
}

fn cmd_verify(ctx: &Ctx, a: &VerifyArgs) -> Result<(String, i32)> {
    let text = std::fs::read_to_string(&a.certificate).map_err(|e| Error::Io(format!("{}: {e}", a.certificate.display())))?;
    let cert = NonmemberCertificate::parse(&text, ctx.caps)?;
    let check = cert.check()?;
    let code = if check.valid { EXIT_OK } else { EXIT_REFUTED };
    Ok((check.to_string(), code))
}
